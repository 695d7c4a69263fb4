# mc_sim/goodness.py

"""
Согласие эмпирических ансамблей с теоретическими законами

KS против табулированной CDF, моменты с jackknife-ошибками, хи-квадрат
для дискретных законов числа блоков.
"""

import logging
import math

import numpy as np
from scipy.stats import chi2_contingency, chisquare, kstest

from diversity.moments import MomentSequence
from gibbs_weights.table import block_count_distribution
from stable_core.errors import DomainError

from .chain import new_block_counts
from .partitions import grow_partitions, rejection_new_blocks

logger = logging.getLogger(__name__)

COVERAGE_TOLERANCE = 1e-4
MAX_EMPIRICAL_ORDER = 6
MIN_EXPECTED_COUNT = 5.0


def ks_statistic(sample, grid, coverage_tolerance=COVERAGE_TOLERANCE):
    """
    sup |F_emp - F_grid| для выборки DiversitySample (или массива значений)

    Перед расчётом проверяется, что вне сетки лежит не больше
    coverage_tolerance значений; иначе TableRangeError с долей вне сетки.
    """
    values = np.asarray(getattr(sample, "values", sample), dtype=float)
    grid.require_coverage(values, coverage_tolerance)
    result = kstest(values, lambda x: grid.cdf_at(x) / grid.total_mass)
    logger.info("🔍 KS=%.5f на %d значениях", result.statistic, values.size)
    return float(result.statistic)


def _jackknife_se(x):
    """Jackknife-ошибка выборочного среднего"""
    size = x.size
    if size < 2:
        return math.nan
    leave_one_out = (x.sum() - x) / (size - 1)
    return float(math.sqrt((size - 1) / size * np.sum((leave_one_out - leave_one_out.mean()) ** 2)))


def empirical_moments(sample, order):
    """
    Выборочные моменты r = 0..R с jackknife-ошибками

    Returns:
        MomentSequence
    """
    order = int(order)
    if not (0 <= order <= MAX_EMPIRICAL_ORDER):
        raise DomainError(f"R должно быть в 0..{MAX_EMPIRICAL_ORDER}, получено {order}", {"R": order})
    values = np.asarray(getattr(sample, "values", sample), dtype=float)
    moments, errors = [1.0], [0.0]
    for r in range(1, order + 1):
        powered = values ** r
        moments.append(float(powered.mean()))
        errors.append(_jackknife_se(powered))
    return MomentSequence(moments, errors)


def moment_report(empirical, reference):
    """
    Сравнение эмпирических моментов с эталонными

    Returns:
        list: для каждого r эталон, оценка, ошибка и z-оценка
    """
    rows = []
    for r in range(1, empirical.order + 1):
        se = empirical.standard_errors[r]
        rows.append({
            "r": r,
            "reference": reference[r],
            "empirical": empirical[r],
            "standard_error": se,
            "z": (empirical[r] - reference[r]) / se if se > 0.0 else math.inf,
            "relative_gap": abs(empirical[r] / reference[r] - 1.0),
        })
    return rows


def chi_square_equivalence(sample_a, sample_b):
    """
    Двухвыборочный хи-квадрат для двух выборок целых значений

    Returns:
        dict: statistic, p_value, dof
    """
    a = np.asarray(sample_a, dtype=np.int64)
    b = np.asarray(sample_b, dtype=np.int64)
    size = int(max(a.max(initial=0), b.max(initial=0))) + 1
    counts = np.vstack([np.bincount(a, minlength=size), np.bincount(b, minlength=size)])
    counts = counts[:, counts.sum(axis=0) > 0]
    if counts.shape[1] < 2:
        return {"statistic": 0.0, "p_value": 1.0, "dof": 0}
    statistic, p_value, dof, _ = chi2_contingency(counts)
    return {"statistic": float(statistic), "p_value": float(p_value), "dof": int(dof)}


def _pool_small(observed, expected, minimum=MIN_EXPECTED_COUNT):
    """Слияние соседних ячеек с ожидаемым числом меньше minimum"""
    obs_out, exp_out = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= minimum:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0.0 and exp_out:
        obs_out[-1] += acc_o
        exp_out[-1] += acc_e
    return np.asarray(obs_out), np.asarray(exp_out)


def block_count_goodness(table, n, reps, rng):
    """
    Хи-квадрат закона K_n у выращенных разбиений против V[n][k]·S_α(n, k)

    Returns:
        dict: statistic, p_value, frequencies, expected
    """
    partitions = grow_partitions(table, n, reps, rng)
    ks = np.array([p.k for p in partitions])
    observed = np.bincount(ks, minlength=n + 1)[1:n + 1].astype(float)
    probs = block_count_distribution(table, n)
    expected = probs / probs.sum() * reps
    pooled_obs, pooled_exp = _pool_small(observed, expected)
    if pooled_obs.size < 2:
        statistic, p_value = 0.0, 1.0
    else:
        statistic, p_value = chisquare(pooled_obs, pooled_exp)
    return {
        "statistic": float(statistic),
        "p_value": float(p_value),
        "frequencies": (observed / reps).tolist(),
        "expected": probs.tolist(),
    }


def chain_vs_rejection(table, state, m, reps, rng):
    """
    Цепь по (n, k) против полного роста с отбором по K_n = k

    Returns:
        dict: результат chi_square_equivalence
    """
    chain = new_block_counts(table, state, m, reps, rng.substream(0))
    full = rejection_new_blocks(table, state, m, reps, rng.substream(1))
    result = chi_square_equivalence(chain, full)
    logger.info("🔍 цепь против отбора (n=%d, k=%d, m=%d): p=%.4f", state.n, state.k, m, result["p_value"])
    return result
