# gibbs_weights/special.py

"""
Верхняя неполная гамма-функция Γ(a, x) = ∫_x^∞ u^(a-1) e^(-u) du
для любого вещественного a и x > 0

Ветви:
    x >= max(1, a + 1): цепная дробь Лежандра (алгоритм Ленца);
    a > 0, x меньше: scipy gammaincc·Γ(a);
    a <= 0, x < 1: рекурсия вниз от дробной части a
                     (или от E1 при целом a), в масштабированном виде.
"""

import math
import sys

from scipy import special

from stable_core.errors import DomainError, NumericError

CF_ACCURACY = 1e-15
CF_MAX_ITERATIONS = 5000
_TINY = sys.float_info.min / sys.float_info.epsilon


def _log_continued_fraction(a, x):
    """log Γ(a, x) через цепную дробь; сходится при x >= 1 для любого a"""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, CF_MAX_ITERATIONS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_ACCURACY:
            if h <= 0.0:
                break
            return -x + a * math.log(x) + math.log(h)
    raise NumericError(
        "цепная дробь для Γ(a, x) не сошлась",
        {"a": a, "x": x, "iterations": CF_MAX_ITERATIONS},
    )


def _log_small_x_nonpositive(a, x):
    """
    a <= 0, x < 1: G_b = Γ(b, x)·x^(-b)·e^x, рекурсия G_(b-1) = (x·G_b - 1)/(b-1)

    Масштаб снимает переполнение x^a при больших |a| и малых x.
    """
    steps = int(math.floor(-a))
    start = a + steps                      # start ∈ (-1, 0]
    if start == 0.0:
        g = special.exp1(x) * math.exp(x)
    else:
        start += 1.0                       # start ∈ (0, 1)
        steps += 1
        g = special.gammaincc(start, x) * math.exp(special.gammaln(start) - start * math.log(x) + x)
    b = start
    for _ in range(steps):
        g = (x * g - 1.0) / (b - 1.0)
        b -= 1.0
    if not g > 0.0:
        raise NumericError("рекурсия Γ(a, x) потеряла знак", {"a": a, "x": x, "scaled": g})
    return math.log(g) + a * math.log(x) - x


def log_incomplete_gamma_upper(a, x):
    """log Γ(a, x); значение всегда положительно при x > 0"""
    a = float(a)
    x = float(x)
    if not math.isfinite(a):
        raise DomainError(f"a должно быть конечным, получено {a}", {"a": a})
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"x должно быть > 0, получено {x}", {"x": x})

    if x >= 1.0 and x >= a + 1.0:
        return _log_continued_fraction(a, x)
    if a > 0.0:
        q = special.gammaincc(a, x)
        if q > 0.0:
            return math.log(q) + special.gammaln(a)
        return _log_continued_fraction(a, x)
    return _log_small_x_nonpositive(a, x)


def incomplete_gamma_upper(a, x):
    """
    Верхняя неполная гамма-функция для любого вещественного a

    Args:
        a: Порядок (может быть отрицательным)
        x: Нижний предел, x > 0

    Returns:
        float: Γ(a, x)

    Example:
        >>> round(incomplete_gamma_upper(0, 1), 6)
        0.219384
        >>> round(incomplete_gamma_upper(-1, 1), 6)
        0.148496
    """
    log_value = log_incomplete_gamma_upper(a, x)
    if log_value > 709.0:
        raise NumericError("Γ(a, x) переполняет double", {"a": a, "x": x, "log_value": log_value})
    return math.exp(log_value)
