# mc_sim/partitions.py

"""
Последовательное построение гиббсовских разбиений по правилу предсказания

Из состояния с блоками n_1..n_k новый элемент открывает блок с
вероятностью V[n+1][k+1]/V[n][k] и присоединяется к блоку j с
вероятностью (n_j - α)·V[n+1][k]/V[n][k].
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from gibbs_weights.models import Composition
from gibbs_weights.table import predict_probs
from stable_core.errors import DomainError, TableRangeError

logger = logging.getLogger(__name__)


@dataclass
class PartitionState:
    """
    Разбиение [n] с точностью до меток: размеры блоков в порядке появления

    Example:
        >>> PartitionState(5, [3, 1, 1]).k
        3
    """

    n: int
    block_sizes: list = field(default_factory=list)

    def __post_init__(self):
        self.block_sizes = [int(b) for b in self.block_sizes]
        if any(b < 1 for b in self.block_sizes):
            raise DomainError("размеры блоков должны быть >= 1", {"block_sizes": self.block_sizes})
        if sum(self.block_sizes) != self.n:
            raise DomainError(
                "сумма размеров блоков не равна n",
                {"n": self.n, "sum": sum(self.block_sizes)},
            )

    @property
    def k(self):
        return len(self.block_sizes)

    def add(self, block):
        """Добавить элемент в блок с номером block (block == k: новый блок)"""
        if block == self.k:
            self.block_sizes.append(1)
        else:
            self.block_sizes[block] += 1
        self.n += 1

    def composition(self):
        return Composition(tuple(sorted(self.block_sizes, reverse=True)))

    def to_dict(self):
        return {"n": self.n, "k": self.k, "block_sizes": list(self.block_sizes)}


def _step_probabilities(table, state):
    p_new, per_unit = predict_probs(table, state.n, state.k)
    sizes = np.asarray(state.block_sizes, dtype=float)
    probs = np.append((sizes - table.alpha) * per_unit, p_new)
    return probs


def extend_partition(table, state, steps, rng):
    """Дорастить разбиение на steps элементов; возвращает число новых блоков"""
    gen = rng.generator
    start_k = state.k
    for _ in range(int(steps)):
        probs = _step_probabilities(table, state)
        cumulative = np.cumsum(probs)
        block = int(np.searchsorted(cumulative, gen.random() * cumulative[-1], side="right"))
        state.add(min(block, state.k))
    return state.k - start_k


def grow_partition(table, target_n, rng):
    """
    Разбиение [target_n] по EPPF модели таблицы

    Args:
        table: WeightTable
        target_n: Размер разбиения (<= nmax - 1)
        rng: RandomStream

    Returns:
        PartitionState
    """
    target_n = int(target_n)
    if target_n < 1:
        raise DomainError(f"target_n должен быть >= 1, получено {target_n}", {"target_n": target_n})
    if target_n > table.nmax - 1:
        raise TableRangeError(
            f"разбиение размера {target_n} требует nmax >= {target_n + 1}",
            {"target_n": target_n, "nmax": table.nmax},
        )
    state = PartitionState(1, [1])
    extend_partition(table, state, target_n - 1, rng)
    return state


def grow_partitions(table, target_n, reps, rng):
    """reps независимых разбиений, i-е: на подпотоке i"""
    return [grow_partition(table, target_n, rng.substream(i)) for i in range(int(reps))]


def rejection_new_blocks(table, state, m, reps, rng, max_attempts=None):
    """
    Число новых блоков среди m дополнительных элементов при K_n = k,
    получаемое полным ростом разбиения с отбором по K_n = k

    Медленный эталон для сравнения с цепью по (n, k).

    Returns:
        np.ndarray: reps значений
    """
    n, k, m = state.n, state.k, int(m)
    if n + m > table.nmax - 1:
        raise TableRangeError(
            f"n + m = {n + m} требует nmax >= {n + m + 1}",
            {"n": n, "m": m, "nmax": table.nmax},
        )
    max_attempts = max_attempts or 1000 * int(reps)
    out = np.empty(int(reps), dtype=np.int64)
    filled, attempts = 0, 0
    while filled < reps:
        if attempts >= max_attempts:
            raise TableRangeError(
                "отбор по K_n = k не набрал нужное число повторов",
                {"accepted": filled, "attempts": attempts, "n": n, "k": k},
            )
        stream = rng.substream(attempts)
        attempts += 1
        partition = grow_partition(table, n, stream)
        if partition.k != k:
            continue
        out[filled] = extend_partition(table, partition, m, stream)
        filled += 1
    logger.debug("отбор K_%d=%d: принято %d из %d", n, k, filled, attempts)
    return out
