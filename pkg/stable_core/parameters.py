# stable_core/parameters.py

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Alpha:
    """
    Индекс устойчивости α, строго 0 < α < 1

    Example:
        >>> Alpha(0.5).value
        0.5
    """

    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or not (0.0 < value < 1.0):
            raise DomainError(
                f"α должно лежать строго в (0, 1), получено {self.value}",
                {"alpha": self.value},
            )
        object.__setattr__(self, "value", value)

    def __float__(self):
        return self.value

    @classmethod
    def of(cls, alpha):
        """Принимает Alpha или число"""
        return alpha if isinstance(alpha, cls) else cls(alpha)


@dataclass(frozen=True)
class StableConvention:
    """
    Масштаб устойчивого закона: показатель Лапласа (scale·λ)^α

    scale=1: стандартная конвенция E[exp(-λT)] = exp(-λ^α), она базовая
    везде. scale=2 соответствует записи ψ(λ) = (2λ)^α.
    """

    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise DomainError(
                f"scale должен быть > 0, получено {self.scale}",
                {"scale": self.scale},
            )

    def laplace_exponent(self, alpha, lam):
        return (self.scale * lam) ** Alpha.of(alpha).value

    def gg_rate(self, alpha, beta):
        """λ такое, что ψ(λ) = β в данной конвенции"""
        return beta ** (1.0 / Alpha.of(alpha).value) / self.scale

    def standard_rate(self, alpha, beta):
        """
        Скорость экспоненциального наклона в переменной стандартной
        конвенции: T_c = scale·T, поэтому λ_c·T_c = (scale·λ_c)·T
        """
        return self.scale * self.gg_rate(alpha, beta)


STANDARD = StableConvention()
