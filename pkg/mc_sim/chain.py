# mc_sim/chain.py

"""
Цепь числа блоков из состояния (n, k)

Вероятность нового блока зависит от конфигурации только через (n', k'),
поэтому размеры блоков не отслеживаются: на каждом шаге новый блок
появляется с вероятностью V[n'+1][k'+1]/V[n'][k'].
"""

import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from diversity.conditional import ConditioningState
from stable_core.errors import DomainError, TableRangeError, VerificationFailure

logger = logging.getLogger(__name__)

DEFAULT_BLOCK = 1000
MAX_ENUMERATED_STEPS = 16
CSV_FORMAT = "%.17g"


def _check_chain_range(table, n, m):
    if m < 0:
        raise DomainError(f"m должно быть >= 0, получено {m}", {"m": m})
    if n + m > table.nmax - 1:
        raise TableRangeError(
            f"цепь до n + m = {n + m} требует nmax >= {n + m + 1}",
            {"n": n, "m": m, "nmax": table.nmax},
        )


def _assert_balance(table, n, k):
    """Баланс массы правила предсказания в посещённых состояниях"""
    worst = float(np.max(table.mass_balance_array(n, k)))
    if worst > table.residual_tolerance:
        raise VerificationFailure(
            "правило предсказания не сохраняет массу",
            {"n": int(np.max(n)), "imbalance": worst, "tolerance": table.residual_tolerance},
        )


def conditional_block_chain(table, state, m, rng):
    """
    Число новых блоков среди m дополнительных элементов при K_n = k

    Args:
        table: WeightTable (n + m <= nmax - 1)
        state: ConditioningState
        m: Число дополнительных элементов
        rng: RandomStream

    Returns:
        int
    """
    m = int(m)
    _check_chain_range(table, state.n, m)
    gen = rng.generator
    n, k = state.n, state.k
    new = 0
    for _ in range(m):
        _assert_balance(table, n, k)
        if gen.random() < table.p_new(n, k):
            k += 1
            new += 1
        n += 1
    return new


def _chain_block(table, n, k, m, size, rng):
    """Векторная цепь для size независимых повторов на одном подпотоке"""
    gen = rng.generator
    blocks = np.full(size, k, dtype=np.int64)
    for step in range(m):
        current = n + step
        # все k между min и max: надмножество посещённых
        visited = np.arange(blocks.min(), blocks.max() + 1)
        _assert_balance(table, np.full(visited.size, current), visited)
        p_new = table.p_new_array(current, blocks)
        blocks += gen.random(size) < p_new
    return blocks - k


def _block_sizes(reps, block):
    sizes = [block] * (reps // block)
    if reps % block:
        sizes.append(reps % block)
    return sizes


def new_block_counts(table, state, m, reps, rng, n_jobs=1, block=DEFAULT_BLOCK):
    """
    reps независимых значений числа новых блоков

    Повторы режутся на пачки фиксированного размера, пачка b использует
    подпоток b, результат собирается по номеру пачки, поэтому он не
    зависит от числа воркеров.
    """
    m, reps = int(m), int(reps)
    if reps < 1:
        raise DomainError(f"reps должно быть >= 1, получено {reps}", {"reps": reps})
    _check_chain_range(table, state.n, m)
    sizes = _block_sizes(reps, int(block))
    streams = [rng.substream(b) for b in range(len(sizes))]
    if n_jobs == 1:
        chunks = [_chain_block(table, state.n, state.k, m, size, s) for size, s in zip(sizes, streams)]
    else:
        chunks = Parallel(n_jobs=n_jobs)(
            delayed(_chain_block)(table, state.n, state.k, m, size, s) for size, s in zip(sizes, streams)
        )
    return np.concatenate(chunks)


@dataclass
class DiversitySample:
    """
    Повторы K_m(new)/m^α при K_n = k с метаданными воспроизведения

    Args:
        model: Описание модели (dict)
        n, k: Наблюдённое состояние
        m: Размер дополнительной выборки
        values: Значения K_m(new)/m^α
        seed: Метаданные RandomStream
        statistic: new_blocks | total_blocks
    """

    model: dict
    n: int
    k: int
    m: int
    values: np.ndarray
    seed: dict
    statistic: str = "new_blocks"
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.any(self.values < 0.0):
            raise DomainError("значения разнообразия должны быть >= 0")

    @property
    def reps(self):
        return int(self.values.size)

    def mean(self):
        return float(np.mean(self.values))

    def metadata(self):
        payload = {
            "model": self.model,
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "reps": self.reps,
            "seed": self.seed,
            "statistic": self.statistic,
            "total_blocks_offset": self.k,
            "wall_time": self.wall_time,
        }
        payload.update(self.extra)
        return payload

    def to_frame(self):
        return pd.DataFrame({"rep": np.arange(self.reps), "value": self.values})

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FORMAT)
        return path

    def write_metadata(self, path):
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.metadata(), f, indent=2, ensure_ascii=False)
        return path


def empirical_diversity(table, state, m, reps, rng, n_jobs=1, block=DEFAULT_BLOCK):
    """
    Ансамбль K_m(new)/m^α | K_n = k

    Example:
        >>> from gibbs_weights import PoissonDirichlet, WeightTable
        >>> from diversity import ConditioningState
        >>> from stable_core import RandomStream
        >>> table = WeightTable(PoissonDirichlet(0.5, 1.0), 100)
        >>> empirical_diversity(table, ConditioningState(10, 3), 0, 2, RandomStream(1)).values
        array([0., 0.])
    """
    started = time.perf_counter()
    m = int(m)
    counts = new_block_counts(table, state, m, reps, rng, n_jobs=n_jobs, block=block)
    values = counts / m ** table.alpha if m > 0 else np.zeros(counts.size)
    sample = DiversitySample(
        model=table.model.describe(),
        n=state.n,
        k=state.k,
        m=m,
        values=values,
        seed=rng.metadata(),
        wall_time=time.perf_counter() - started,
        extra={"block": int(block)},
    )
    logger.info(
        "📊 %d повторов (n=%d, k=%d, m=%d): среднее %.6f за %.1f с",
        sample.reps, state.n, state.k, m, sample.mean(), sample.wall_time,
    )
    return sample


def empirical_unconditional_diversity(table, n, reps, rng, n_jobs=1, block=DEFAULT_BLOCK):
    """K_n/n^α с нуля: цепь из состояния (1, 1) на n - 1 шагов"""
    started = time.perf_counter()
    n = int(n)
    counts = new_block_counts(table, ConditioningState(1, 1), n - 1, reps, rng, n_jobs=n_jobs, block=block)
    return DiversitySample(
        model=table.model.describe(),
        n=0,
        k=0,
        m=n,
        values=(counts + 1) / n ** table.alpha,
        seed=rng.metadata(),
        statistic="total_blocks",
        wall_time=time.perf_counter() - started,
        extra={"block": int(block)},
    )


def new_block_distribution(table, state, m):
    """
    Точный закон числа новых блоков: динамика по k' за m шагов

    Returns:
        np.ndarray: вероятности 0..m новых блоков
    """
    m = int(m)
    _check_chain_range(table, state.n, m)
    probs = np.zeros(m + 1)
    probs[0] = 1.0
    for step in range(m):
        news = np.arange(step + 1)
        p_new = table.p_new_array(state.n + step, state.k + news)
        moved = probs[:step + 1] * p_new
        probs[:step + 1] -= moved
        probs[1:step + 2] += moved
    return probs


def enumerate_new_block_paths(table, state, m):
    """
    Тот же закон полным перебором 2^m путей цепи

    Returns:
        np.ndarray: вероятности 0..m новых блоков
    """
    m = int(m)
    if m > MAX_ENUMERATED_STEPS:
        raise DomainError(f"перебор путей ограничен m <= {MAX_ENUMERATED_STEPS}", {"m": m})
    _check_chain_range(table, state.n, m)
    probs = np.zeros(m + 1)
    for path in itertools.product((False, True), repeat=m):
        n, k, weight = state.n, state.k, 1.0
        for is_new in path:
            p = table.p_new(n, k)
            weight *= p if is_new else 1.0 - p
            k += is_new
            n += 1
        probs[sum(path)] += weight
    return probs


def finite_m_mean(table, state, m):
    """E[K_m(new)]/m^α из точного закона цепи"""
    if m == 0:
        return 0.0
    probs = new_block_distribution(table, state, m)
    return float(np.dot(np.arange(m + 1), probs) / math.pow(m, table.alpha))
