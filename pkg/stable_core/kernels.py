# stable_core/kernels.py

import math

from .densities import stable_table
from .errors import DomainError
from .parameters import Alpha
from .quadrature import integrate_adaptive

KERNEL_EPSREL = 1e-10
KERNEL_EPSABS = 1e-300


def beta_kernel(alpha, a, x0):
    """
    K_a(x0) = ∫_0^x0 (1 - y/x0)^a f_α(y) dy

    Общее ядро условных плотностей и весов Гиббса. Интеграл делится в
    точке x0/2: левая часть берётся по log y, правая с алгебраическим
    весом z^a (z = 1 - y/x0), что снимает особенность при a < 0.

    Args:
        alpha: Индекс α
        a: Показатель, a > -1
        x0: Верхний предел, x0 > 0

    Returns:
        float: K_a(x0) ∈ [0, 1]; K_a(x0) -> 1 при x0 -> ∞
    """
    a_value = Alpha.of(alpha).value
    if not a > -1.0:
        raise DomainError(f"показатель ядра должен быть > -1, получено {a}", {"a": a})
    if not (math.isfinite(x0) and x0 > 0.0):
        raise DomainError(f"x0 должно быть > 0, получено {x0}", {"x0": x0})

    table = stable_table(a_value)
    half = 0.5 * x0
    if x0 <= table.t_lo:
        return 0.0

    left = 0.0
    if half > table.t_lo:
        log_x0 = math.log(x0)

        def left_integrand(v):
            y = math.exp(v)
            return y * table.pdf_scalar(y) * math.exp(a * math.log1p(-math.exp(v - log_x0)))

        left, _ = integrate_adaptive(
            left_integrand, math.log(table.t_lo), math.log(half), epsabs=KERNEL_EPSABS, epsrel=KERNEL_EPSREL
        )

    right, _ = integrate_adaptive(
        lambda z: table.pdf_scalar(x0 * (1.0 - z)),
        0.0, 0.5, epsabs=KERNEL_EPSABS, epsrel=KERNEL_EPSREL,
        weight="alg", wvar=(a, 0.0),
    )
    return left + x0 * right
