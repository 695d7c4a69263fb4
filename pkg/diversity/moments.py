# diversity/moments.py

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from stable_core.errors import DomainError, VerificationFailure
from stable_core.parameters import Alpha

logger = logging.getLogger(__name__)

LOG_CONVEX_TOLERANCE = 1e-9


@dataclass
class MomentSequence:
    """
    Моменты M_0..M_R (M_0 = 1) и, при наличии, их стандартные ошибки

    Args:
        values: Моменты по r = 0..R
        standard_errors: Стандартные ошибки (для эмпирических моментов)
    """

    values: list
    standard_errors: list = field(default=None)

    def __post_init__(self):
        self.values = [float(v) for v in self.values]
        if not self.values:
            raise DomainError("последовательность моментов пуста")
        if abs(self.values[0] - 1.0) > 1e-12:
            raise DomainError("момент порядка 0 должен равняться 1", {"m0": self.values[0]})
        if self.standard_errors is not None:
            self.standard_errors = [float(v) for v in self.standard_errors]

    @property
    def order(self):
        return len(self.values) - 1

    def __getitem__(self, r):
        return self.values[r]

    def __len__(self):
        return len(self.values)

    def log_convexity_gap(self):
        """
        max_r [2 log M_r - log M_(r-1) - log M_(r+1)], неравенство Ляпунова
        требует <= 0
        """
        if len(self.values) < 3:
            return -math.inf
        logs = np.log(np.asarray(self.values))
        return float(np.max(2.0 * logs[1:-1] - logs[:-2] - logs[2:]))

    def check_invariants(self, tolerance=LOG_CONVEX_TOLERANCE):
        if any(not (v > 0.0) for v in self.values):
            raise VerificationFailure("моменты должны быть положительными", {"values": self.values})
        gap = self.log_convexity_gap()
        if gap > tolerance:
            raise VerificationFailure(
                "последовательность моментов не лог-выпукла",
                {"gap": gap, "tolerance": tolerance},
            )
        return gap

    def to_dict(self):
        payload = {"order": self.order, "values": self.values}
        if self.standard_errors is not None:
            payload["standard_errors"] = self.standard_errors
        return payload


def _check_r(r):
    r = float(r)
    if not (math.isfinite(r) and r >= 0.0):
        raise DomainError(f"порядок момента должен быть >= 0, получено {r}", {"r": r})
    return r


def _check_theta(alpha, theta):
    theta = float(theta)
    if not (math.isfinite(theta) and theta > -alpha):
        raise DomainError(f"нужно θ > -α, получено θ={theta}", {"theta": theta, "alpha": alpha})
    return theta


def log_pd_conditional_moment(alpha, theta, state, r):
    a = Alpha.of(alpha).value
    theta = _check_theta(a, theta)
    r = _check_r(r)
    c = (theta + state.k * a) / a
    return float(
        gammaln(c + r) - gammaln(c) + gammaln(theta + state.n) - gammaln(theta + state.n + r * a)
    )


def pd_conditional_moment(alpha, theta, state, r):
    """
    ((θ+kα)/α)_r · Γ(θ+n)/Γ(θ+n+rα)

    Example:
        >>> from diversity.conditional import ConditioningState
        >>> round(pd_conditional_moment(0.5, 1.0, ConditioningState(2, 1), 1), 5)
        1.80541
    """
    return math.exp(log_pd_conditional_moment(alpha, theta, state, r))


def gtilde_moment(alpha, state, r):
    """(k)_r · Γ(n)/Γ(n+rα); частный случай θ = 0"""
    return pd_conditional_moment(alpha, 0.0, state, r)


def pd_conditional_moments(alpha, theta, state, order):
    return MomentSequence([pd_conditional_moment(alpha, theta, state, r) for r in range(int(order) + 1)])


def grid_moments(grid, order):
    """Моменты r = 0..R табулированной плотности"""
    values = [1.0] + [grid.moment(r) for r in range(1, int(order) + 1)]
    return MomentSequence(values)


@dataclass
class ChfPartialSum:
    """Частичная сумма характеристической функции и оценка отброшенного"""

    value: complex
    truncation_bound: float
    order: int
    diverging: bool

    def to_dict(self):
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "truncation_bound": self.truncation_bound,
            "order": self.order,
            "diverging": self.diverging,
        }


def chf_partial_sum(alpha, theta, state, t, order):
    """
    Σ_{r=0}^{R} (it)^r/r! · ((θ+kα)/α)_r / (θ+n)_{rα}

    (θ+n)_{rα} = Γ(θ+n+rα)/Γ(θ+n). Оценка отброшенного: модуль
    следующего слагаемого; если он растёт, выдаётся предупреждение.

    Returns:
        ChfPartialSum
    """
    order = int(order)
    if order < 0:
        raise DomainError(f"R должно быть >= 0, получено {order}", {"R": order})
    t = float(t)
    if t == 0.0:
        return ChfPartialSum(complex(1.0, 0.0), 0.0, order, False)

    log_abs_t = math.log(abs(t))
    phase_unit = 1j if t > 0.0 else -1j

    def log_magnitude(r):
        return r * log_abs_t - gammaln(r + 1.0) + log_pd_conditional_moment(alpha, theta, state, r)

    terms = [math.exp(log_magnitude(r)) * phase_unit ** r for r in range(order + 1)]
    value = complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))
    next_log = log_magnitude(order + 1)
    bound = math.exp(next_log)
    diverging = order > 0 and next_log > log_magnitude(order)
    if diverging:
        logger.warning(
            "⚠️ ряд характеристической функции расходится при t=%g, R=%d: следующий член %.3g",
            t, order, bound,
        )
    return ChfPartialSum(value, bound, order, diverging)


def pd_expected_new_blocks(alpha, theta, n, k, m):
    """
    Точное E[число новых блоков среди m наблюдений | K_n = k] для PD(α, θ):

    (θ/α + k) [Γ(θ+n+m+α)Γ(θ+n) / (Γ(θ+n+α)Γ(θ+n+m)) - 1]
    """
    a = Alpha.of(alpha).value
    theta = _check_theta(a, theta)
    m = int(m)
    if m < 0:
        raise DomainError(f"m должно быть >= 0, получено {m}", {"m": m})
    if m == 0:
        return 0.0
    log_ratio = (
        gammaln(theta + n + m + a) + gammaln(theta + n)
        - gammaln(theta + n + a) - gammaln(theta + n + m)
    )
    return float((theta / a + k) * math.expm1(log_ratio))
