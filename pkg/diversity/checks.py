# diversity/checks.py

"""
Проверки представлений условного разнообразия и сэмплеры

    ratio_law_check: двухвыборочный KS между (S_{α,kα}/B)^(-α) и Y_{α,k}·B'^α;
    beta_mixture_check: замкнутые моменты обеих сторон равенства
                    Y_{α,θ/α+k}·Beta(θ+kα, n-kα)^α  =d  Y_{α,(θ+n)/α}·Beta(θ/α+k, n/α-k).
"""

import logging
import math

import numpy as np
from scipy.special import gammaln
from scipy.stats import ks_2samp

from gibbs_weights.models import PoissonDirichlet
from stable_core.densities import log_ml_moment
from stable_core.errors import DomainError
from stable_core.parameters import Alpha
from stable_core.sampling import sample_tilted_ml, sample_tilted_stable

from .grids import tabulate_for_model

logger = logging.getLogger(__name__)

MIN_RATIO_LAW_DRAWS = 10_000
MAX_MIXTURE_ORDER = 10


def _log_beta_moment(a, b, q):
    """log E[X^q], X ~ Beta(a, b)"""
    return float(gammaln(a + q) - gammaln(a) + gammaln(a + b) - gammaln(a + b + q))


def ratio_law_check(alpha, state, draws, rng):
    """
    KS-статистика между двумя ансамблями одного и того же закона

    Левая сторона: R = S_{α,kα}/B, B ~ Beta(kα, n-kα), значение R^(-α);
    S_{α,kα} берётся точным сэмплером Кантера с наклоном.
    Правая сторона: Y_{α,k}·B'^α, Y_{α,k}: обратной функцией
    распределения по сетке. Ансамбли используют разные подпотоки rng.

    Args:
        alpha: Индекс α
        state: ConditioningState
        draws: Число выборок на сторону (>= 1e4)
        rng: RandomStream

    Returns:
        float: KS-статистика
    """
    a = Alpha.of(alpha).value
    draws = int(draws)
    if draws < MIN_RATIO_LAW_DRAWS:
        raise DomainError(
            f"нужно не меньше {MIN_RATIO_LAW_DRAWS} выборок, получено {draws}", {"draws": draws}
        )
    n, k = state.n, state.k
    free = state.free_mass(a)

    left_stream = rng.substream(0)
    stable = sample_tilted_stable(a, k, left_stream, size=draws)
    beta = left_stream.generator.beta(k * a, free, draws)
    left = (stable / beta) ** (-a)

    right_stream = rng.substream(1)
    tilted = sample_tilted_ml(a, k, right_stream, size=draws)
    right = tilted * right_stream.generator.beta(k * a, free, draws) ** a

    statistic = float(ks_2samp(left, right).statistic)
    logger.info("🔍 закон отношения (α=%.3f, n=%d, k=%d): KS=%.5f на %d выборках", a, n, k, statistic, draws)
    return statistic


def beta_mixture_moment_sides(alpha, theta, state, r):
    """
    r-е моменты обеих сторон равенства в законе

    Returns:
        tuple: (левая, правая) в лог-шкале
    """
    a = Alpha.of(alpha).value
    n, k = state.n, state.k
    c = theta / a + k
    d = (theta + n) / a
    left = log_ml_moment(a, c, r) + _log_beta_moment(theta + k * a, n - k * a, r * a)
    right = log_ml_moment(a, d, r) + _log_beta_moment(c, d - c, r)
    return left, right


def beta_mixture_check(alpha, theta, state, order):
    """
    Максимальный относительный разрыв моментов r = 0..R двух представлений

    Вторая Beta требует n/α - k > 0; иначе DomainError.

    Example:
        >>> from diversity.conditional import ConditioningState
        >>> beta_mixture_check(0.5, 1.0, ConditioningState(10, 3), 5) < 1e-10
        True
    """
    a = Alpha.of(alpha).value
    PoissonDirichlet(a, theta)
    order = int(order)
    if not (0 <= order <= MAX_MIXTURE_ORDER):
        raise DomainError(f"R должно быть в 0..{MAX_MIXTURE_ORDER}, получено {order}", {"R": order})
    if state.n / a - state.k <= 0.0:
        raise DomainError(
            "второе представление требует n/α - k > 0",
            {"n": state.n, "k": state.k, "alpha": a, "value": state.n / a - state.k},
        )
    gap = 0.0
    for r in range(order + 1):
        left, right = beta_mixture_moment_sides(a, theta, state, r)
        gap = max(gap, abs(math.expm1(right - left)))
    return gap


def sample_conditional(model, state, size, rng, grid=None):
    """
    Выборка условного разнообразия

    Для PD: точное представление Y_{α,θ/α+k}·Beta(θ+kα, n-kα)^α, где
    Y_{α,c} = S_{α,cα}^(-α) из точного сэмплера. Для остальных моделей:
    обратная функция распределения по сетке (строится, если не передана).

    Args:
        model: GibbsModel
        state: ConditioningState
        size: Размер выборки
        rng: RandomStream
        grid: Готовая DensityGrid (необязательно)

    Returns:
        np.ndarray
    """
    size = int(size)
    if size < 1:
        raise DomainError(f"размер выборки должен быть >= 1, получено {size}", {"size": size})
    a = model.a
    if isinstance(model, PoissonDirichlet) and grid is None:
        order = model.theta / a + state.k
        stream = rng.substream(0)
        stable = sample_tilted_stable(a, order, stream, size=size)
        beta = stream.generator.beta(model.theta + state.k * a, state.free_mass(a), size)
        return stable ** (-a) * beta ** a
    grid = grid if grid is not None else tabulate_for_model(model, state)
    return grid.sample(rng.substream(1), size)


def empirical_chf(values, t):
    """
    Эмпирическая характеристическая функция и её стандартная ошибка

    Returns:
        tuple: (complex, float)
    """
    values = np.asarray(values, dtype=float)
    phase = np.exp(1j * float(t) * values)
    mean = complex(phase.mean())
    spread = np.sqrt(np.var(phase.real) + np.var(phase.imag))
    return mean, float(spread / math.sqrt(values.size))
