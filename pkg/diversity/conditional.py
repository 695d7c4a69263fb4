# diversity/conditional.py

"""
Плотности условного α-разнообразия

    g̃(s): плотность Y_{α,k}·W^α, W ~ Beta(kα, n-kα);
    f_h(s)      = h(s^(-1/α)) g̃(s) / E[h(S^(-1/α))], S ~ g̃;
    E[h]        = V_{n,k,h} · α^(1-k) Γ(n) / Γ(k).

Нормировка всегда берётся из веса V_{n,k,h}; прямое интегрирование
числителя используется только как проверка.
"""

import logging
import math
from dataclasses import dataclass

from scipy.special import gammaln

from gibbs_weights.models import GeneralizedGamma, GibbsModel, PoissonDirichlet
from gibbs_weights.weights import log_gg_sum, log_gg_weight_integral, log_weight
from stable_core.densities import stable_table
from stable_core.errors import DomainError, PrecisionError
from stable_core.kernels import KERNEL_EPSABS, KERNEL_EPSREL, beta_kernel
from stable_core.parameters import Alpha
from stable_core.quadrature import integrate_adaptive, integrate_log_scale

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConditioningState:
    """
    Наблюдение K_n = k

    Example:
        >>> ConditioningState(10, 3).free_mass(0.5)
        8.5
    """

    n: int
    k: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.k) != self.k:
            raise DomainError("n и k должны быть целыми", {"n": self.n, "k": self.k})
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        if not (1 <= self.k <= self.n):
            raise DomainError(
                f"нужно 1 <= k <= n, получено n={self.n}, k={self.k}",
                {"n": self.n, "k": self.k},
            )

    def free_mass(self, alpha):
        """n - kα (> 0 при α < 1)"""
        value = self.n - self.k * Alpha.of(alpha).value
        if value <= 0.0:
            raise DomainError("нужно n - kα > 0", {"n": self.n, "k": self.k, "alpha": float(alpha)})
        return value

    def as_dict(self):
        return {"n": self.n, "k": self.k}


def _check_s(s):
    s = float(s)
    if not (math.isfinite(s) and s > 0.0):
        raise DomainError(f"s должно быть > 0, получено {s}", {"s": s})
    return s


def _log_gtilde_const(alpha, state):
    return float(gammaln(state.n) - gammaln(state.free_mass(alpha)) - gammaln(state.k))


def log_gtilde_pdf(alpha, state, s):
    a = Alpha.of(alpha).value
    s = _check_s(s)
    exponent = state.n - 1 - state.k * a
    kernel = beta_kernel(a, exponent, s ** (-1.0 / a))
    if kernel <= 0.0:
        return -math.inf
    return _log_gtilde_const(a, state) + (state.k - 1) * math.log(s) + math.log(kernel)


def gtilde_pdf(alpha, state, s):
    """
    g̃(s) = Γ(n)/(Γ(n-kα)Γ(k)) s^(k-1/α-1) ∫_0^1 p^(n-1-kα) f_α((1-p)s^(-1/α)) dp

    После замены y = (1-p)s^(-1/α) интеграл сводится к ядру K_a при
    a = n-1-kα: g̃(s) = Γ(n)/(Γ(n-kα)Γ(k)) s^(k-1) K_a(s^(-1/α)).
    """
    return math.exp(log_gtilde_pdf(alpha, state, s))


class ConditionalDensity:
    """
    Условная плотность f_h для модели и наблюдения (n, k)

    Нормировка считается один раз при создании.

    Args:
        model: GibbsModel
        state: ConditioningState
        method: Метод веса (auto | sum | integral | generic)
        table: Готовая WeightTable (если есть, вес берётся из неё)
    """

    def __init__(self, model, state, method="auto", table=None):
        if not isinstance(model, GibbsModel):
            raise DomainError("нужна модель GibbsModel")
        self.model = model
        self.state = state
        self.alpha = model.a
        if table is not None:
            log_v, tag = table.log_v(state.n, state.k), table.method(state.n, state.k)
        else:
            log_v, tag = log_weight(model, state.n, state.k, method)
        self.log_weight = log_v
        self.normalizer_method = tag
        self.log_normalizer = float(
            log_v + (1 - state.k) * math.log(self.alpha) + gammaln(state.n) - gammaln(state.k)
        )

    @property
    def normalizer(self):
        """E[h(S^(-1/α))] при S ~ g̃"""
        return math.exp(self.log_normalizer)

    def log_pdf(self, s):
        s = _check_s(s)
        log_h = self.model.log_tilt_at_diversity(s)
        if log_h == -math.inf:
            return -math.inf
        return log_h + log_gtilde_pdf(self.alpha, self.state, s) - self.log_normalizer

    def pdf(self, s):
        value = self.log_pdf(s)
        return math.exp(value) if value < 700.0 else math.inf

    def metadata(self):
        return {
            "model": self.model.describe(),
            "state": self.state.as_dict(),
            "normalizer": self.normalizer,
            "log_normalizer": self.log_normalizer,
            "normalizer_method": self.normalizer_method,
        }


def conditional_pdf(model, state, s, method="auto"):
    """
    Плотность условного α-разнообразия при K_n = k

    Example:
        >>> pd0 = PoissonDirichlet(0.5, 0.0)
        >>> st = ConditioningState(10, 3)
        >>> abs(conditional_pdf(pd0, st, 1.0) - gtilde_pdf(0.5, st, 1.0)) < 1e-12
        True
    """
    return ConditionalDensity(model, state, method).pdf(s)


def normalizer_by_quadrature(model, state):
    """
    E[h(S^(-1/α))] прямым интегрированием h·g̃ по log s

    Только для проверки нормировки из веса.
    """
    alpha = model.a

    def numerator(s):
        log_h = model.log_tilt_at_diversity(s)
        if log_h == -math.inf:
            return 0.0
        value = log_h + log_gtilde_pdf(alpha, state, s)
        return math.exp(value) if value < 700.0 else math.inf

    value, _ = integrate_log_scale(numerator, epsabs=1e-14, epsrel=1e-9)
    return value


def conditional_mass(density):
    """∫ f_h(s) ds для готовой ConditionalDensity"""
    value, _ = integrate_log_scale(density.pdf, epsabs=1e-14, epsrel=1e-9)
    return value


def log_unconditional_pdf(model, s):
    s = _check_s(s)
    log_h = model.log_tilt_at_diversity(s)
    if log_h == -math.inf:
        return -math.inf
    a = model.a
    log_g = -math.log(a) - (1.0 + 1.0 / a) * math.log(s) + stable_table(a).log_pdf_scalar(s ** (-1.0 / a))
    return log_h + log_g


def unconditional_pdf(model, s):
    """
    Плотность α-разнообразия модели: h(s^(-1/α)) · g_α(s)

    Для PD(α, θ) это Γ(θ+1)/Γ(θ/α+1) s^(θ/α) g_α(s).
    """
    value = log_unconditional_pdf(model, s)
    return math.exp(value) if value < 700.0 else math.inf


# --- Пуассон-Дирихле ---

def _pd_w_integral(alpha, b, x0):
    """∫_0^1 f_α(x0 w) (1-w)^(b-1) dw, разбиение в w = 1/2"""
    table = stable_table(alpha)
    if x0 <= table.t_lo:
        return 0.0

    left = 0.0
    w_lo = table.t_lo / x0
    if w_lo < 0.5:
        def left_integrand(u):
            w = math.exp(u)
            return w * table.pdf_scalar(x0 * w) * math.exp((b - 1.0) * math.log1p(-w))

        left, _ = integrate_adaptive(
            left_integrand, math.log(w_lo), math.log(0.5), epsabs=KERNEL_EPSABS, epsrel=KERNEL_EPSREL
        )

    right, _ = integrate_adaptive(
        lambda w: table.pdf_scalar(x0 * w),
        0.5, 1.0, epsabs=KERNEL_EPSABS, epsrel=KERNEL_EPSREL,
        weight="alg", wvar=(0.0, b - 1.0),
    )
    return left + right


def log_pd_conditional_pdf(alpha, theta, state, z):
    model = PoissonDirichlet(alpha, theta)
    a = model.a
    z = _check_s(z)
    b = state.free_mass(a)
    x0 = z ** (-1.0 / a)
    integral = _pd_w_integral(a, b, x0)
    if integral <= 0.0:
        return -math.inf
    const = gammaln(theta + state.n) - gammaln(b) - gammaln(theta / a + state.k)
    return float(const + (theta / a + state.k - 1.0 - 1.0 / a) * math.log(z) + math.log(integral))


def pd_conditional_pdf(alpha, theta, state, z):
    """
    Условная плотность для PD(α, θ):

    Γ(θ+n)/(Γ(n-kα)Γ(θ/α+k)) z^(θ/α+k-1-1/α) ∫_0^1 f_α(z^(-1/α) w) (1-w)^(n-kα-1) dw

    Собственный интеграл по w, независимый от пути через g̃.
    """
    return math.exp(log_pd_conditional_pdf(alpha, theta, state, z))


# --- обобщённая гамма ---

class GGConditionalDensity:
    """
    Условная плотность GenGamma(α, β):

    Γ(k) exp(-(β/s)^(1/α)) g̃(s) / Σ_i C(n-1,i)(-1)^i β^(i/α) Γ(k-i/α; β)

    Если знакопеременная сумма теряет точность, знаменатель берётся из
    интегральной формы веса (метка integral-fallback).
    """

    def __init__(self, alpha, beta, state):
        self.model = GeneralizedGamma(alpha, beta)
        self.alpha = self.model.a
        self.beta = self.model.beta
        self.state = state
        n, k = state.n, state.k
        try:
            log_sum, digits = log_gg_sum(self.alpha, self.beta, n, k)
            self.normalizer_method = "sum"
            self.digits = digits
        except PrecisionError as e:
            logger.warning("⚠️ GG (n=%d, k=%d): %s", n, k, e.message)
            log_v = log_gg_weight_integral(self.alpha, self.beta, n, k)
            log_sum = float(log_v + gammaln(n) - self.beta - (k - 1) * math.log(self.alpha))
            self.normalizer_method = "integral-fallback"
            self.digits = None
        self.log_sum = log_sum

    def log_pdf(self, s):
        s = _check_s(s)
        log_tilt = self.model.log_tilt_at_diversity(s) - self.beta
        return (
            float(gammaln(self.state.k))
            + log_tilt
            + log_gtilde_pdf(self.alpha, self.state, s)
            - self.log_sum
        )

    def pdf(self, s):
        value = self.log_pdf(s)
        return math.exp(value) if value < 700.0 else math.inf

    def metadata(self):
        return {
            "model": self.model.describe(),
            "state": self.state.as_dict(),
            "normalizer": math.exp(self.log_sum),
            "log_normalizer": self.log_sum,
            "normalizer_method": self.normalizer_method,
            "sum_digits": self.digits,
        }


def gg_conditional_pdf(alpha, beta, state, s):
    """Условная плотность обобщённой гамма-модели"""
    return GGConditionalDensity(alpha, beta, state).pdf(s)
