# stable_core/densities.py

"""
Плотности положительного α-устойчивого закона и закона Миттаг-Леффлера

Стандартная конвенция: E[exp(-λT)] = exp(-λ^α).

Прямой путь вычисления f_α(t):
    - интегральное представление Золотарева на (0, π) + адаптивная
      квадратура, когда t^(-α) > SERIES_Y;
    - сходящийся ряд по t^(-α) в хвосте, когда t^(-α) <= SERIES_Y.

Быстрый путь (StableDensityTable): сплайн по log t для гладкой части
log J(x), используется во вложенных интегралах.
"""

import bisect
import logging
import math
from functools import lru_cache

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

from .errors import DomainError
from .parameters import STANDARD, Alpha
from .quadrature import integrate_adaptive

logger = logging.getLogger(__name__)

SERIES_Y = 0.25          # граница ряда по y = t^(-α)
SERIES_TERMS = 48
UNDERFLOW_EXPONENT = 800.0
TABLE_POINTS = 2048
J_EPSREL = 1e-12


def _check_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} должно быть конечным и > 0, получено {value}", {name: value})
    return value


class _Zolotarev:
    """Вспомогательные величины интегрального представления для одного α"""

    def __init__(self, alpha):
        a = alpha
        self.alpha = a
        self.power = 1.0 / (1.0 - a)           # 1/(1-α)
        self.ratio = a / (1.0 - a)             # α/(1-α)
        self.log_a0 = self.ratio * math.log(a) + math.log1p(-a)
        self.a0 = math.exp(self.log_a0)
        self.log_const = math.log(a / ((1.0 - a) * math.pi))
        # коэффициенты ряда: (-1)^(j+1) Γ(αj+1)/j! sin(παj) / π
        j = np.arange(1, SERIES_TERMS + 1, dtype=float)
        self.series_j = j
        self.series_c = (
            (-1.0) ** (j + 1)
            * np.exp(gammaln(a * j + 1.0) - gammaln(j + 1.0))
            * np.sin(math.pi * a * j)
            / math.pi
        )
        self.cdf_c = (
            (-1.0) ** (j + 1)
            * np.exp(gammaln(a * j) - gammaln(j + 1.0))
            * np.sin(math.pi * a * j)
            / math.pi
        )

    def log_A(self, u):
        a = self.alpha
        return (
            self.power * (math.log(math.sin(a * u)) - math.log(math.sin(u)))
            + math.log(math.sin((1.0 - a) * u))
            - math.log(math.sin(a * u))
        )

    def x_of(self, t):
        return t ** (-self.ratio)

    def peak(self, x):
        """Точка u, где A(u) = 1/x (максимум подынтегральной функции)"""
        if self.a0 * x >= 1.0:
            return None
        target = -math.log(x)
        lo, hi = 1e-9, math.pi - 1e-12
        if self.log_A(lo) >= target:
            return None
        return optimize.brentq(lambda u: self.log_A(u) - target, lo, hi, xtol=1e-14)

    def log_J(self, x):
        """log ∫_0^π A(u) exp(-(A(u) - A0) x) du"""
        a0 = self.a0

        def integrand(u):
            la = self.log_A(u)
            if la > 700.0:
                return 0.0
            return math.exp(la - (math.exp(la) - a0) * x)

        u_peak = self.peak(x)
        points = [u_peak] if u_peak is not None and 0.0 < u_peak < math.pi else None
        value, _ = integrate_adaptive(
            integrand, 0.0, math.pi, epsabs=0.0, epsrel=J_EPSREL, points=points
        )
        return math.log(value)

    def log_pdf_direct(self, t):
        if t ** (-self.alpha) <= SERIES_Y:
            return self.log_pdf_series(t)
        x = self.x_of(t)
        if self.a0 * x > UNDERFLOW_EXPONENT:
            return -math.inf
        return self.log_const - self.power * math.log(t) - self.a0 * x + self.log_J(x)

    def log_pdf_series(self, t):
        y = t ** (-self.alpha)
        total = float(np.dot(self.series_c, y ** self.series_j))
        return math.log(total) - math.log(t)

    def series_array(self, t):
        y = t[:, None] ** (-self.alpha)
        total = (self.series_c[None, :] * y ** self.series_j[None, :]).sum(axis=1)
        return np.log(total) - np.log(t)

    def cdf_direct(self, t):
        y = t ** (-self.alpha)
        if y <= SERIES_Y:
            return 1.0 - float(np.dot(self.cdf_c, y ** self.series_j))
        x = self.x_of(t)
        if self.a0 * x > UNDERFLOW_EXPONENT:
            return 0.0

        def integrand(u):
            la = self.log_A(u)
            if la > 700.0:
                return 0.0
            return math.exp(-math.exp(la) * x)

        u_peak = self.peak(x)
        points = [u_peak] if u_peak is not None and 0.0 < u_peak < math.pi else None
        value, _ = integrate_adaptive(
            integrand, 0.0, math.pi, epsabs=1e-14, epsrel=1e-11, points=points
        )
        return min(1.0, value / math.pi)


@lru_cache(maxsize=64)
def _zolotarev(alpha_value):
    return _Zolotarev(alpha_value)


class StableDensityTable:
    """
    Табулированная плотность f_α для вложенных интегралов

    Сплайн строится по гладкой части log J(x(t)) на логарифмической сетке
    [t_lo, t_hi]; ниже t_lo плотность меньше exp(-UNDERFLOW_EXPONENT) и
    считается нулём, выше t_hi: ряд.

    Args:
        alpha: Индекс α
        points: Число узлов сплайна
    """

    def __init__(self, alpha, points=TABLE_POINTS):
        self.alpha = Alpha.of(alpha).value
        self.core = _zolotarev(self.alpha)
        core = self.core
        x_lo = UNDERFLOW_EXPONENT / core.a0
        self.t_lo = x_lo ** (-1.0 / core.ratio)
        self.t_hi = SERIES_Y ** (-1.0 / self.alpha)
        self.log_t_lo = math.log(self.t_lo)
        self.log_t_hi = math.log(self.t_hi)

        knots = np.linspace(self.log_t_lo, self.log_t_hi, points)
        values = np.array([core.log_J(core.x_of(math.exp(v))) for v in knots])
        self.spline = CubicSpline(knots, values)

        # коэффициенты для быстрого скалярного вычисления без накладных расходов scipy
        self._knots = knots.tolist()
        self._coef = self.spline.c.T.tolist()
        logger.debug(
            "таблица f_α построена: α=%.4f, t ∈ [%.3g, %.3g], %d узлов",
            self.alpha, self.t_lo, self.t_hi, points,
        )

    def log_pdf_scalar(self, t):
        """log f_α(t) для одного t > 0"""
        if t >= self.t_hi:
            return self.core.log_pdf_series(t)
        if t <= self.t_lo:
            return -math.inf
        core = self.core
        v = math.log(t)
        i = bisect.bisect_right(self._knots, v) - 1
        if i >= len(self._coef):
            i = len(self._coef) - 1
        d = v - self._knots[i]
        c0, c1, c2, c3 = self._coef[i]
        log_j = ((c0 * d + c1) * d + c2) * d + c3
        return core.log_const - core.power * v - core.a0 * t ** (-core.ratio) + log_j

    def pdf_scalar(self, t):
        return math.exp(self.log_pdf_scalar(t))

    def log_pdf(self, t):
        """log f_α(t) для массива t > 0"""
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        out = np.full(flat.shape, -np.inf)
        core = self.core

        upper = flat >= self.t_hi
        if upper.any():
            out[upper] = core.series_array(flat[upper])

        middle = (flat > self.t_lo) & ~upper
        if middle.any():
            tm = flat[middle]
            v = np.log(tm)
            out[middle] = core.log_const - core.power * v - core.a0 * tm ** (-core.ratio) + self.spline(v)
        return out.reshape(t.shape) if t.ndim else out[0]

    def pdf(self, t):
        return np.exp(self.log_pdf(t))


@lru_cache(maxsize=16)
def stable_table(alpha_value):
    """Кэш таблиц f_α по значению α"""
    return StableDensityTable(alpha_value)


def log_stable_pdf(alpha, t):
    """log f_α(t), прямой (точный) путь"""
    a = Alpha.of(alpha).value
    t = _check_positive("t", t)
    return _zolotarev(a).log_pdf_direct(t)


def stable_pdf(alpha, t, convention=STANDARD):
    """
    Плотность положительного α-устойчивого закона

    Args:
        alpha: Индекс α ∈ (0, 1)
        t: Точка t > 0
        convention: Конвенция масштаба (по умолчанию стандартная)

    Returns:
        float: f_α(t); в конвенции scale=c это f_α(t/c)/c

    Example:
        >>> round(stable_pdf(0.5, 1.0), 7)
        0.2196956
    """
    t = _check_positive("t", t)
    scale = convention.scale
    return math.exp(log_stable_pdf(alpha, t / scale)) / scale


def stable_cdf(alpha, t):
    """Функция распределения T через то же интегральное представление"""
    a = Alpha.of(alpha).value
    t = _check_positive("t", t)
    return _zolotarev(a).cdf_direct(t)


def log_ml_pdf(alpha, s):
    a = Alpha.of(alpha).value
    s = _check_positive("s", s)
    return -math.log(a) - (1.0 + 1.0 / a) * math.log(s) + log_stable_pdf(a, s ** (-1.0 / a))


def ml_pdf(alpha, s):
    """
    Плотность Миттаг-Леффлера g_α(s) = α^-1 s^(-1-1/α) f_α(s^(-1/α)),
    то есть плотность S = T^(-α)
    """
    return math.exp(log_ml_pdf(alpha, s))


def _check_order(k):
    k = float(k)
    if not math.isfinite(k) or k < 0.0:
        raise DomainError(f"порядок наклона должен быть >= 0, получено {k}", {"k": k})
    return k


def log_tilt_constant(alpha, k):
    """log Γ(kα+1)/Γ(k+1)"""
    return float(gammaln(k * alpha + 1.0) - gammaln(k + 1.0))


def tilted_ml_pdf(alpha, k, y):
    """
    Полиномиально наклонённая плотность Миттаг-Леффлера
    g_{α,kα}(y) = Γ(kα+1)/Γ(k+1) · y^k · g_α(y)

    Порядок k может быть любым вещественным >= 0 (k=0: без наклона).
    """
    a = Alpha.of(alpha).value
    k = _check_order(k)
    y = _check_positive("y", y)
    return math.exp(log_tilt_constant(a, k) + k * math.log(y) + log_ml_pdf(a, y))


def tilted_stable_pdf(alpha, k, t):
    """f_{S_{α,kα}}(t) = Γ(kα+1)/Γ(k+1) · t^(-kα) · f_α(t)"""
    a = Alpha.of(alpha).value
    k = _check_order(k)
    t = _check_positive("t", t)
    return math.exp(log_tilt_constant(a, k) - k * a * math.log(t) + log_stable_pdf(a, t))


def log_ml_moment(alpha, k, r):
    a = Alpha.of(alpha).value
    k = _check_order(k)
    r = float(r)
    if not math.isfinite(r) or r < 0.0:
        raise DomainError(f"порядок момента должен быть >= 0, получено {r}", {"r": r})
    return float(
        gammaln(k + r + 1.0) - gammaln(k + 1.0) + gammaln(k * a + 1.0) - gammaln(k * a + r * a + 1.0)
    )


def ml_moment(alpha, k, r):
    """
    E[Y_{α,k}^r] = Γ(k+r+1)/Γ(k+1) · Γ(kα+1)/Γ(kα+rα+1)

    Example:
        >>> round(ml_moment(0.5, 1, 2), 10)
        4.0
    """
    return math.exp(log_ml_moment(alpha, k, r))


# Векторные версии на быстром пути (для сеток и вложенных интегралов)

def log_ml_pdf_array(alpha, s):
    a = Alpha.of(alpha).value
    s = np.asarray(s, dtype=float)
    return -math.log(a) - (1.0 + 1.0 / a) * np.log(s) + stable_table(a).log_pdf(s ** (-1.0 / a))


def tilted_ml_pdf_array(alpha, k, y):
    a = Alpha.of(alpha).value
    y = np.asarray(y, dtype=float)
    return np.exp(log_tilt_constant(a, k) + k * np.log(y) + log_ml_pdf_array(a, y))


def tilted_stable_pdf_array(alpha, k, t):
    a = Alpha.of(alpha).value
    t = np.asarray(t, dtype=float)
    return np.exp(log_tilt_constant(a, k) - k * a * np.log(t) + stable_table(a).log_pdf(t))


if __name__ == "__main__":
    print("🧪 Проверка плотностей при α = 1/2\n")
    for t in (0.1, 1.0, 10.0):
        exact = t ** -1.5 * math.exp(-1.0 / (4.0 * t)) / (2.0 * math.sqrt(math.pi))
        print(f"  t={t:>5}: f={stable_pdf(0.5, t):.12g}  точно={exact:.12g}")
    print(f"\n  g(1) = {ml_pdf(0.5, 1.0):.10f}  (ожидается {math.exp(-0.25) / math.sqrt(math.pi):.10f})")
