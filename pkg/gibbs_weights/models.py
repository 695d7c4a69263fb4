# gibbs_weights/models.py

"""
Модели Гиббса типа α: устойчивый драйвер + смешивающая плотность
γ(t) = h(t)·f_α(t) в стандартной конвенции

    PoissonDirichlet(α, θ):  h(t) = Γ(θ+1)/Γ(θ/α+1) · t^(-θ)
    GeneralizedGamma(α, β):  h(t) = exp(β - β^(1/α)·t)
    TabulatedTilt(α, t, h):  h задана таблицей, PCHIP по log t
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln

from stable_core.densities import stable_cdf, stable_table
from stable_core.errors import DomainError, TiltRangeError
from stable_core.parameters import STANDARD, Alpha, StableConvention
from stable_core.quadrature import LOG_SCALE_LIMIT, integrate_adaptive

logger = logging.getLogger(__name__)

_TILT_SIGN = -1.0            # знак показателя экспоненциального наклона
_LOG_OVERFLOW = 700.0

TILT_NORMALIZATION_TOLERANCE = 1e-6
TILT_TAIL_TOLERANCE = 1e-8
TAIL_POLICIES = ("power", "constant", "zero")


class GibbsModel:
    """
    Базовый класс модели PK(ρ_α, h·f_α)

    Подклассы задают log h(t). Всё остальное (наклон в координатах
    разнообразия, метаданные) общее.
    """

    kind = "generic"
    has_closed_form = False

    def __init__(self, alpha):
        self.alpha = Alpha.of(alpha)

    @property
    def a(self):
        return self.alpha.value

    def log_tilt(self, t):
        raise NotImplementedError

    def tilt(self, t):
        """h(t); +inf при переполнении"""
        value = self.log_tilt(t)
        if value > _LOG_OVERFLOW:
            return math.inf
        return math.exp(value)

    def log_tilt_at_diversity(self, s):
        """log h(s^(-1/α))"""
        return self.log_tilt(s ** (-1.0 / self.a))

    def tilt_at_diversity(self, s):
        value = self.log_tilt_at_diversity(s)
        if value > _LOG_OVERFLOW:
            return math.inf
        return math.exp(value)

    def describe(self):
        return {"kind": self.kind, "alpha": self.a}

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "kind")
        return f"{type(self).__name__}({params})"


class PoissonDirichlet(GibbsModel):
    """
    Двухпараметрическая модель Пуассона-Дирихле PD(α, θ), θ > -α

    Example:
        >>> PoissonDirichlet(0.5, 1.0).tilt(1.0)
        0.5
    """

    kind = "pd"
    has_closed_form = True

    def __init__(self, alpha, theta):
        super().__init__(alpha)
        theta = float(theta)
        if not math.isfinite(theta) or theta <= -self.a:
            raise DomainError(
                f"для PD нужно θ > -α, получено θ={theta}, α={self.a}",
                {"theta": theta, "alpha": self.a},
            )
        self.theta = theta
        self._log_const = float(gammaln(theta + 1.0) - gammaln(theta / self.a + 1.0))

    def log_tilt(self, t):
        return self._log_const - self.theta * math.log(t)

    def describe(self):
        return {"kind": self.kind, "alpha": self.a, "theta": self.theta}


class GeneralizedGamma(GibbsModel):
    """
    Нормированная обобщённая гамма-модель с наклоном exp(ψ - λt)

    В стандартной конвенции ψ = β, λ = β^(1/α). Конвенция с масштабом c
    описывает ту же модель (T_c = c·T, λ_c = β^(1/α)/c), поэтому наклон
    в стандартной переменной от неё не зависит.

    Args:
        alpha: Индекс α
        beta: β > 0
        convention: Конвенция, в которой записан λ (для метаданных)
    """

    kind = "gg"

    def __init__(self, alpha, beta, convention=STANDARD):
        super().__init__(alpha)
        beta = float(beta)
        if not (math.isfinite(beta) and beta > 0.0):
            raise DomainError(f"для GenGamma нужно β > 0, получено {beta}", {"beta": beta})
        if not isinstance(convention, StableConvention):
            raise DomainError("convention должен быть StableConvention")
        self.beta = beta
        self.convention = convention
        self.rate = convention.standard_rate(self.alpha, beta)

    def log_tilt(self, t):
        return self.beta + _TILT_SIGN * self.rate * t

    def log_tilt_at_diversity(self, s):
        # h(s^(-1/α)) = exp(β - (β/s)^(1/α))
        return self.beta + _TILT_SIGN * (self.beta / s) ** (1.0 / self.a)

    def describe(self):
        return {
            "kind": self.kind,
            "alpha": self.a,
            "beta": self.beta,
            "rate": self.rate,
            "convention_scale": self.convention.scale,
        }


class TabulatedTilt(GibbsModel):
    """
    Наклон h, заданный таблицей (t_i, h_i)

    Интерполяция: монотонный кубический PCHIP для log h по log t на
    объявленном носителе [t_min, t_max]. Вне носителя действует политика
    хвоста:
        power: продолжение log h линейно по log t (степенной хвост);
        constant: h равно краевому значению;
        zero: хвост сверхэкспоненциально мал и считается нулём.

    При построении проверяется, что γ = h·f_α является собственной плотностью:
    ∫ h f_α dt = 1 с точностью 1e-6, а масса, отброшенная хвостом zero,
    меньше TILT_TAIL_TOLERANCE.

    Raises:
        DomainError: таблица некорректна или γ не нормирована
        TiltRangeError: носитель слишком узок для политики zero
    """

    kind = "tilt"

    def __init__(self, alpha, t, h, lower_tail="constant", upper_tail="zero",
                 source=None, check=True):
        super().__init__(alpha)
        t = np.asarray(t, dtype=float)
        h = np.asarray(h, dtype=float)
        if t.ndim != 1 or t.shape != h.shape or len(t) < 4:
            raise DomainError("таблица наклона: нужны два одинаковых столбца длиной >= 4")
        if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
            raise DomainError("таблица наклона: t должны быть положительными и строго возрастать")
        if not np.all(np.isfinite(h)) or np.any(h <= 0.0):
            raise DomainError("таблица наклона: h должна быть конечной и положительной")
        for name, policy in (("lower_tail", lower_tail), ("upper_tail", upper_tail)):
            if policy not in TAIL_POLICIES:
                raise DomainError(f"{name} должен быть одним из {TAIL_POLICIES}", {name: policy})

        self.t = t
        self.h = h
        self.lower_tail = lower_tail
        self.upper_tail = upper_tail
        self.source = source
        self.t_min = float(t[0])
        self.t_max = float(t[-1])
        self._log_t = np.log(t)
        self._log_h = np.log(h)
        self._interp = PchipInterpolator(self._log_t, self._log_h, extrapolate=False)
        self._slope_lo = float((self._log_h[1] - self._log_h[0]) / (self._log_t[1] - self._log_t[0]))
        self._slope_hi = float((self._log_h[-1] - self._log_h[-2]) / (self._log_t[-1] - self._log_t[-2]))
        self.normalization = math.nan
        if check:
            self._check_support()
            self.normalization = self._check_normalization()

    @classmethod
    def from_csv(cls, path, alpha, **kwargs):
        """Таблица из CSV со столбцами t,h"""
        frame = pd.read_csv(path)
        missing = {"t", "h"} - set(frame.columns)
        if missing:
            raise DomainError(f"в таблице наклона нет столбцов {sorted(missing)}", {"path": str(path)})
        frame = frame.sort_values("t")
        return cls(alpha, frame["t"].to_numpy(), frame["h"].to_numpy(), source=str(path), **kwargs)

    @classmethod
    def from_model(cls, model, t, **kwargs):
        """Табулирует наклон другой модели на точках t"""
        t = np.asarray(t, dtype=float)
        h = np.array([model.tilt(float(x)) for x in t])
        return cls(model.alpha, t, h, source=repr(model), **kwargs)

    def log_tilt(self, t):
        if t < self.t_min:
            return self._tail(t, self.lower_tail, 0, self._slope_lo)
        if t > self.t_max:
            return self._tail(t, self.upper_tail, -1, self._slope_hi)
        return float(self._interp(math.log(t)))

    def _tail(self, t, policy, edge, slope):
        if policy == "zero":
            return -math.inf
        if policy == "constant":
            return float(self._log_h[edge])
        return float(self._log_h[edge] + slope * (math.log(t) - self._log_t[edge]))

    def _check_support(self):
        alpha = self.a
        if self.lower_tail == "zero":
            dropped = float(self.h[0]) * stable_cdf(alpha, self.t_min)
            if dropped > TILT_TAIL_TOLERANCE:
                raise TiltRangeError(
                    "носитель наклона обрезает слишком много массы слева",
                    {"t_min": self.t_min, "dropped_mass": dropped, "tolerance": TILT_TAIL_TOLERANCE},
                )
        if self.upper_tail == "zero":
            dropped = float(self.h[-1]) * (1.0 - stable_cdf(alpha, self.t_max))
            if dropped > TILT_TAIL_TOLERANCE:
                raise TiltRangeError(
                    "носитель наклона обрезает слишком много массы справа",
                    {"t_max": self.t_max, "dropped_mass": dropped, "tolerance": TILT_TAIL_TOLERANCE},
                )

    def _check_normalization(self):
        total = tilt_mass(self)
        gap = abs(total - 1.0)
        if gap >= TILT_NORMALIZATION_TOLERANCE:
            raise DomainError(
                "h·f_α не является плотностью вероятности",
                {"integral": total, "gap": gap, "tolerance": TILT_NORMALIZATION_TOLERANCE},
            )
        logger.debug("наклон %s: ∫h f_α = %.10f", self.source, total)
        return total

    def describe(self):
        return {
            "kind": self.kind,
            "alpha": self.a,
            "source": self.source,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "lower_tail": self.lower_tail,
            "upper_tail": self.upper_tail,
            "points": int(self.t.size),
        }


def tilt_mass(model):
    """∫ h(t) f_α(t) dt по переменной log t, разбитой на носитель и хвосты"""
    table = stable_table(model.a)

    def integrand(v):
        if v > LOG_SCALE_LIMIT:
            return 0.0
        t = math.exp(v)
        h = model.tilt(t)
        if h == 0.0:
            return 0.0
        return h * t * table.pdf_scalar(t)

    lo = math.log(table.t_lo)
    cuts = [lo]
    t_min = getattr(model, "t_min", None)
    t_max = getattr(model, "t_max", None)
    if t_min is not None and math.log(t_min) > lo:
        cuts.append(math.log(t_min))
    if t_max is not None and math.log(t_max) > cuts[-1]:
        cuts.append(math.log(t_max))
    cuts.append(math.inf)

    total = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        value, _ = integrate_adaptive(integrand, left, right, epsabs=1e-13, epsrel=1e-10)
        total += value
    return total


@dataclass(frozen=True)
class Composition:
    """
    Размеры блоков (n_1, ..., n_k) разбиения [n]

    Example:
        >>> Composition((2, 1)).n, Composition((2, 1)).k
        (3, 2)
    """

    parts: tuple
    n: int = field(init=False)
    k: int = field(init=False)

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts:
            raise DomainError("композиция должна содержать хотя бы один блок")
        if any(p < 1 for p in parts):
            raise DomainError("все блоки должны иметь размер >= 1", {"parts": list(parts)})
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "n", sum(parts))
        object.__setattr__(self, "k", len(parts))
