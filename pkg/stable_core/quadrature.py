# stable_core/quadrature.py

import logging
import math

from scipy import integrate

from .errors import NumericError

logger = logging.getLogger(__name__)

EPSABS = 1e-10
EPSREL = 1e-8
LIMIT = 200
REFINED_LIMIT = 2000


def _attempt(f, a, b, epsabs, epsrel, limit, **kwargs):
    result = integrate.quad(
        f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1, **kwargs
    )
    value, abserr = result[0], result[1]
    message = result[3] if len(result) > 3 else None
    return value, abserr, message


def integrate_adaptive(f, a, b, epsabs=EPSABS, epsrel=EPSREL, **kwargs):
    """
    Адаптивная квадратура QUADPACK с эскалацией

    Сначала обычный прогон, при неудаче: один прогон с увеличенным
    лимитом подынтервалов, затем ошибка.

    Args:
        f: Подынтегральная функция одного аргумента
        a, b: Пределы (допускаются бесконечные)
        epsabs, epsrel: Допуски
        **kwargs: Передаются в scipy.integrate.quad (points, weight, wvar)

    Returns:
        tuple: (значение, оценка абсолютной погрешности)

    Raises:
        NumericError: если уточнение не помогло
    """
    value, abserr, message = _attempt(f, a, b, epsabs, epsrel, LIMIT, **kwargs)
    if message is None and math.isfinite(value):
        return value, abserr

    logger.debug("квадратура на [%s, %s]: %s, уточняем", a, b, message)
    value, abserr, message = _attempt(f, a, b, epsabs, epsrel, REFINED_LIMIT, **kwargs)
    if message is None and math.isfinite(value):
        return value, abserr

    target = max(epsabs, epsrel * abs(value))
    if message is not None and math.isfinite(value) and abserr <= 10.0 * target:
        logger.warning("⚠️ квадратура на [%s, %s] принята с оценкой %.3g: %s", a, b, abserr, message)
        return value, abserr

    raise NumericError(
        "квадратура не сошлась после уточнения",
        {"a": a, "b": b, "value": value, "abserr": abserr, "message": str(message)},
    )


def integrate_positive(f, center=1.0, epsabs=EPSABS, epsrel=EPSREL):
    """
    Интеграл по (0, ∞), разбитый в точке center

    Хвост [center, ∞) QUADPACK обрабатывает заменой переменной.
    """
    left, err_left = integrate_adaptive(f, 0.0, center, epsabs=epsabs, epsrel=epsrel)
    right, err_right = integrate_adaptive(f, center, math.inf, epsabs=epsabs, epsrel=epsrel)
    return left + right, err_left + err_right


LOG_SCALE_LIMIT = 700.0


def integrate_log_scale(pdf, split=0.0, epsabs=EPSABS, epsrel=EPSREL):
    """
    ∫_0^∞ pdf(s) ds как ∫ s·pdf(s) d(log s) с разбиением в log s = split

    При |log s| > 700 или переполнении в преобразовании аргумента
    подынтегральное выражение считается нулём; бесконечное значение
    самой плотности приводит к NumericError.
    """

    def integrand(v):
        if abs(v) > LOG_SCALE_LIMIT:
            return 0.0
        s = math.exp(v)
        try:
            return s * pdf(s)
        except OverflowError:
            return 0.0

    left, err_left = integrate_adaptive(integrand, -math.inf, split, epsabs=epsabs, epsrel=epsrel)
    right, err_right = integrate_adaptive(integrand, split, math.inf, epsabs=epsabs, epsrel=epsrel)
    return left + right, err_left + err_right
