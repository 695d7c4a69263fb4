# gibbs_weights/weights.py

"""
Веса Гиббса V_{n,k}

Все вычисления ведутся в лог-домене; публичные функции без префикса
log_ возвращают exp от результата.
"""

import logging
import math

from scipy import optimize
from scipy.special import gammaln

from stable_core.errors import DomainError, PrecisionError
from stable_core.kernels import beta_kernel
from stable_core.parameters import Alpha
from stable_core.densities import stable_table
from stable_core.quadrature import LOG_SCALE_LIMIT, integrate_adaptive

from .models import GeneralizedGamma, GibbsModel, PoissonDirichlet
from .special import log_incomplete_gamma_upper

logger = logging.getLogger(__name__)

MIN_SUM_DIGITS = 6.0
TERM_RELATIVE_ERROR = 1e-12
GG_EPSREL = 1e-11
GENERIC_EPSREL = 1e-9
WEIGHT_METHODS = ("auto", "closed", "sum", "integral", "generic")


def _check_nk(n, k):
    if int(n) != n or int(k) != k:
        raise DomainError("n и k должны быть целыми", {"n": n, "k": k})
    n, k = int(n), int(k)
    if not (1 <= k <= n):
        raise DomainError(f"нужно 1 <= k <= n, получено n={n}, k={k}", {"n": n, "k": k})
    return n, k


def _check_beta(beta):
    beta = float(beta)
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"нужно β > 0, получено {beta}", {"beta": beta})
    return beta


# --- Пуассон-Дирихле ---

def log_pd_weight(alpha, theta, n, k):
    a = Alpha.of(alpha).value
    theta = float(theta)
    if not (math.isfinite(theta) and theta > -a):
        raise DomainError(f"нужно θ > -α, получено θ={theta}", {"theta": theta, "alpha": a})
    n, k = _check_nk(n, k)
    return float(
        (k - 1) * math.log(a)
        + gammaln(theta / a + k)
        + gammaln(theta + 1.0)
        - gammaln(theta + n)
        - gammaln(theta / a + 1.0)
    )


def pd_weight(alpha, theta, n, k):
    """
    V_{n,k} = α^(k-1) Γ(θ/α+k) Γ(θ+1) / (Γ(θ+n) Γ(θ/α+1))

    Example:
        >>> round(pd_weight(0.5, 0.5, 2, 1), 12)
        0.666666666667
    """
    return math.exp(log_pd_weight(alpha, theta, n, k))


# --- обобщённая гамма: интегральная форма ---

def log_gg_weight_integral(alpha, beta, n, k):
    """
    log V = β + n log 2 + k log α - log Γ(n) + log ∫ λ^(n-1) e^(-(b+2λ)^α) (b+2λ)^(kα-n) dλ,
    b = β^(1/α)

    Интеграл берётся по u = log λ вокруг максимума подынтегральной функции.
    """
    a = Alpha.of(alpha).value
    beta = _check_beta(beta)
    n, k = _check_nk(n, k)
    b = beta ** (1.0 / a)
    c = n - k * a

    def log_integrand(u):
        w = b + 2.0 * math.exp(u)
        return n * u - w ** a - c * math.log(w)

    def slope(u):
        e = 2.0 * math.exp(u)
        w = b + e
        return n - e * (a * w ** (a - 1.0) + c / w)

    lo, hi = -1.0, 1.0
    while slope(lo) <= 0.0:
        lo -= 10.0
    while slope(hi) >= 0.0:
        hi += 2.0
    u_star = optimize.brentq(slope, lo, hi, xtol=1e-13)
    peak = log_integrand(u_star)

    def integrand(u):
        if u > 700.0:
            return 0.0
        return math.exp(log_integrand(u) - peak)

    left, _ = integrate_adaptive(integrand, -math.inf, u_star, epsabs=0.0, epsrel=GG_EPSREL)
    right, _ = integrate_adaptive(integrand, u_star, math.inf, epsabs=0.0, epsrel=GG_EPSREL)
    return float(
        beta + n * math.log(2.0) + k * math.log(a) - gammaln(n) + peak + math.log(left + right)
    )


def gg_weight_integral(alpha, beta, n, k):
    """
    Вес обобщённой гамма-модели через одномерный интеграл

    Example:
        >>> round(gg_weight_integral(0.5, 1.0, 2, 1), 5)
        0.59635
    """
    return math.exp(log_gg_weight_integral(alpha, beta, n, k))


# --- обобщённая гамма: сумма неполных гамма-функций ---

def gg_sum_terms(alpha, beta, n, k):
    """
    Слагаемые C(n-1,i) (-1)^i β^(i/α) Γ(k - i/α; β), i = 0..n-1,
    в виде (знак, log|слагаемое|)
    """
    a = Alpha.of(alpha).value
    beta = _check_beta(beta)
    n, k = _check_nk(n, k)
    log_beta = math.log(beta)
    terms = []
    for i in range(n):
        log_binom = gammaln(n) - gammaln(i + 1) - gammaln(n - i)
        log_abs = float(log_binom + (i / a) * log_beta + log_incomplete_gamma_upper(k - i / a, beta))
        terms.append((-1.0 if i % 2 else 1.0, log_abs))
    return terms


def log_gg_sum(alpha, beta, n, k, min_digits=MIN_SUM_DIGITS):
    """
    log Σ_i C(n-1,i)(-1)^i β^(i/α) Γ(k-i/α; β) и оценка верных цифр

    Returns:
        tuple: (log суммы, оценка числа значащих цифр)

    Raises:
        PrecisionError: сумма потеряла больше цифр, чем допустимо
    """
    terms = gg_sum_terms(alpha, beta, n, k)
    scale = max(log_abs for _, log_abs in terms)
    scaled = [sign * math.exp(log_abs - scale) for sign, log_abs in terms]
    total = math.fsum(scaled)
    magnitude = math.fsum(abs(x) for x in scaled)
    if total <= 0.0:
        digits = 0.0
    else:
        digits = -math.log10(TERM_RELATIVE_ERROR * magnitude / total)
    if digits < min_digits:
        raise PrecisionError(
            "знакопеременная сумма потеряла точность, используйте интегральную форму",
            {"alpha": float(alpha), "beta": float(beta), "n": n, "k": k,
             "estimated_digits": digits, "required_digits": min_digits},
        )
    return scale + math.log(total), digits


def log_gg_weight_sum(alpha, beta, n, k, min_digits=MIN_SUM_DIGITS):
    a = Alpha.of(alpha).value
    n, k = _check_nk(n, k)
    log_sum, _ = log_gg_sum(a, beta, n, k, min_digits)
    return float(_check_beta(beta) + (k - 1) * math.log(a) - gammaln(n) + log_sum)


def gg_weight_sum(alpha, beta, n, k):
    """
    V = e^β α^(k-1)/Γ(n) Σ_i C(n-1,i)(-1)^i β^(i/α) Γ(k-i/α; β)

    Raises:
        PrecisionError: при оценке верных цифр ниже MIN_SUM_DIGITS
    """
    return math.exp(log_gg_weight_sum(alpha, beta, n, k))


# --- произвольный наклон ---

def log_generic_weight(model, n, k):
    """
    log V_{n,k,h} = k log α - log Γ(n-kα) + log ∫ h(t) t^(-1-kα) K_a(t) dt,
    a = n - 1 - kα, K_a: ядро beta_kernel

    Это двойной интеграл по (s, p) после замены t = s^(-1/α),
    y = (1-p)t; интегрирование по t ведётся в переменной log t.
    """
    if not isinstance(model, GibbsModel):
        raise DomainError("нужна модель GibbsModel")
    n, k = _check_nk(n, k)
    alpha = model.a
    exponent = n - 1 - k * alpha
    table = stable_table(alpha)

    def integrand(v):
        if v > LOG_SCALE_LIMIT:
            return 0.0
        t = math.exp(v)
        h = model.tilt(t)
        if h == 0.0:
            return 0.0
        kernel = beta_kernel(alpha, exponent, t)
        if kernel == 0.0:
            return 0.0
        return h * math.exp(-k * alpha * v) * kernel

    cuts = [math.log(table.t_lo)]
    for name in ("t_min", "t_max"):
        bound = getattr(model, name, None)
        if bound is not None and math.log(bound) > cuts[-1]:
            cuts.append(math.log(bound))
    if cuts[-1] < 0.0:
        cuts.append(0.0)
    cuts.append(math.inf)

    total = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        value, _ = integrate_adaptive(integrand, left, right, epsabs=1e-300, epsrel=GENERIC_EPSREL)
        total += value
    if not total > 0.0:
        raise DomainError("вес V_{n,k,h} не положителен", {"n": n, "k": k, "integral": total})
    return float(k * math.log(alpha) - gammaln(n - k * alpha) + math.log(total))


def generic_weight(model, n, k):
    """Вес для произвольного наклона h вложенной адаптивной квадратурой"""
    return math.exp(log_generic_weight(model, n, k))


# --- диспетчер ---

def log_weight(model, n, k, method="auto", min_digits=MIN_SUM_DIGITS):
    """
    log V_{n,k} для модели и метка метода

    Порядок по умолчанию: замкнутая форма, затем сумма, затем квадратура.

    Returns:
        tuple: (log V, метка из closed | sum | quadrature)
    """
    if method not in WEIGHT_METHODS:
        raise DomainError(f"метод должен быть одним из {WEIGHT_METHODS}", {"method": method})

    if method == "generic":
        return log_generic_weight(model, n, k), "quadrature"

    if isinstance(model, PoissonDirichlet):
        return log_pd_weight(model.alpha, model.theta, n, k), "closed"

    if isinstance(model, GeneralizedGamma):
        if method == "integral":
            return log_gg_weight_integral(model.alpha, model.beta, n, k), "quadrature"
        try:
            return log_gg_weight_sum(model.alpha, model.beta, n, k, min_digits), "sum"
        except PrecisionError as e:
            if method == "sum":
                raise
            logger.info("V[%d][%d]: %s, переход к интегральной форме", n, k, e.message)
            return log_gg_weight_integral(model.alpha, model.beta, n, k), "quadrature"

    return log_generic_weight(model, n, k), "quadrature"
