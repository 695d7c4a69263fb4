# gibbs_weights/table.py

import logging
import math
import os
from decimal import Decimal
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import gammaln

from stable_core.errors import DomainError, TableRangeError, VerificationFailure
from stable_core.parameters import Alpha

from .models import Composition, GeneralizedGamma, PoissonDirichlet
from .weights import log_weight

logger = logging.getLogger(__name__)

_RISING_SHIFT = 1              # (1-α)_{n_j - 1}
CLOSED_TOLERANCE = 1e-10
RECURSION_TOLERANCE = 1e-8
DIRECT_LIMIT = 64              # выше: верхняя строка квадратурой, остальное рекурсией
TABLE_SUM_DIGITS = 10.0        # сумма в таблице должна держать рекурсию до 1e-8
CSV_COLUMNS = ["n", "k", "V", "method"]


class WeightTable:
    """
    Треугольная таблица весов V[n][k], 1 <= k <= n <= nmax

    Для PD значения берутся из замкнутой формы по запросу, поэтому
    таблица с nmax порядка 1e6 ничего не стоит. Для остальных моделей
    хранится плотный массив log V и метка метода для каждой клетки.

    Args:
        model: GibbsModel
        nmax: Максимальный размер выборки
        log_v: Массив (nmax+2, nmax+2) лог-весов (None для PD)
        methods: Метки методов той же формы
    """

    def __init__(self, model, nmax, log_v=None, methods=None):
        nmax = int(nmax)
        if nmax < 1:
            raise DomainError(f"nmax должен быть >= 1, получено {nmax}", {"nmax": nmax})
        self.model = model
        self.nmax = nmax
        self.closed = log_v is None
        if self.closed and not isinstance(model, PoissonDirichlet):
            raise DomainError("таблица без значений допустима только для PD")
        self._log_v = log_v
        self._methods = methods
        if self.closed:
            a, theta = model.a, model.theta
            self._pd = (a, theta, math.log(a), float(gammaln(theta + 1.0) - gammaln(theta / a + 1.0)))

    @property
    def alpha(self):
        return self.model.a

    @property
    def residual_tolerance(self):
        return CLOSED_TOLERANCE if self.closed else RECURSION_TOLERANCE

    def _check(self, n, k):
        if not (1 <= k <= n <= self.nmax):
            raise TableRangeError(
                f"V[{n}][{k}] вне таблицы (nmax={self.nmax})",
                {"n": n, "k": k, "nmax": self.nmax},
            )

    def log_v(self, n, k):
        self._check(n, k)
        if self.closed:
            a, theta, log_a, const = self._pd
            return (k - 1) * log_a + math.lgamma(theta / a + k) - math.lgamma(theta + n) + const
        return float(self._log_v[n, k])

    def v(self, n, k):
        return math.exp(self.log_v(n, k))

    def method(self, n, k):
        self._check(n, k)
        return "closed" if self.closed else self._methods[n][k]

    def recursion_anchor(self):
        """Строка, от которой остальные получены рекурсией; None, если клетки независимы"""
        if self.closed or self.nmax <= DIRECT_LIMIT:
            return None
        return self.nmax

    def residual(self, n, k):
        """|V[n][k] - (n-kα)V[n+1][k] - V[n+1][k+1]| / V[n][k]"""
        base = self.log_v(n, k)
        stay = math.exp(math.log(n - k * self.alpha) + self.log_v(n + 1, k) - base)
        new = math.exp(self.log_v(n + 1, k + 1) - base)
        return abs(1.0 - stay - new)

    def max_residual(self, nmax=None):
        top = min(self.nmax - 1, nmax or self.nmax - 1)
        worst, where = 0.0, None
        for n in range(1, top + 1):
            for k in range(1, n + 1):
                r = self.residual(n, k)
                if r > worst:
                    worst, where = r, (n, k)
        return worst, where

    def check_residuals(self, tolerance=None, nmax=None):
        """Проверка обратной рекурсии по всей таблице"""
        tolerance = self.residual_tolerance if tolerance is None else tolerance
        worst, where = self.max_residual(nmax)
        if worst >= tolerance:
            raise VerificationFailure(
                "невязка обратной рекурсии превышает допуск",
                {"max_residual": worst, "at": list(where), "tolerance": tolerance},
            )
        return worst

    def p_new(self, n, k):
        """V[n+1][k+1] / V[n][k]"""
        if self.closed:
            self._check(n + 1, k + 1)
            _, theta, _, _ = self._pd
            return (theta + k * self.alpha) / (theta + n)
        return math.exp(self.log_v(n + 1, k + 1) - self.log_v(n, k))

    def p_new_array(self, n, k):
        """Векторная версия p_new для массивов состояний"""
        n = np.asarray(n, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        if np.any(n + 1 > self.nmax) or np.any(k < 1) or np.any(k > n):
            raise TableRangeError("состояние цепи вне таблицы", {"nmax": self.nmax, "n_max_seen": int(n.max())})
        if self.closed:
            _, theta, _, _ = self._pd
            return (theta + k * self.alpha) / (theta + n)
        return np.exp(self._log_v[n + 1, k + 1] - self._log_v[n, k])

    def mass_balance_array(self, n, k):
        """
        |p_new + (n-kα)·V[n+1][k]/V[n][k] - 1| для массивов состояний

        Для PD оба отношения в замкнутой форме: (θ+kα)/(θ+n) и 1/(θ+n).
        """
        n = np.asarray(n, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        if np.any(n + 1 > self.nmax) or np.any(k < 1) or np.any(k > n):
            raise TableRangeError("состояние цепи вне таблицы", {"nmax": self.nmax, "n_max_seen": int(n.max())})
        if self.closed:
            _, theta, _, _ = self._pd
            p_new = (theta + k * self.alpha) / (theta + n)
            stay = (n - k * self.alpha) / (theta + n)
            return np.abs(p_new + stay - 1.0)
        base = self._log_v[n, k]
        p_new = np.exp(self._log_v[n + 1, k + 1] - base)
        stay = (n - k * self.alpha) * np.exp(self._log_v[n + 1, k] - base)
        return np.abs(p_new + stay - 1.0)

    # --- ввод/вывод ---

    def to_frame(self, nmax=None):
        top = min(self.nmax, nmax or self.nmax)
        rows = []
        for n in range(1, top + 1):
            for k in range(1, n + 1):
                value = Decimal(repr(self.log_v(n, k))).exp()
                rows.append((n, k, f"{value:.16e}", self.method(n, k)))
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_csv(self, path, nmax=None):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame(nmax).to_csv(path, index=False)
        return path

    @classmethod
    def from_csv(cls, path, model):
        """Читает таблицу n,k,V,method; V хранится с 17 значащими цифрами"""
        frame = pd.read_csv(path, dtype={"V": str, "method": str})
        if list(frame.columns) != CSV_COLUMNS:
            raise DomainError(f"ожидались столбцы {CSV_COLUMNS}", {"columns": list(frame.columns)})
        nmax = int(frame["n"].max())
        log_v = np.full((nmax + 2, nmax + 2), -np.inf)
        methods = [[None] * (nmax + 2) for _ in range(nmax + 2)]
        for n, k, value, method in frame.itertuples(index=False):
            log_v[n, k] = float(Decimal(value).ln())
            methods[n][k] = method
        return cls(model, nmax, log_v, methods)


def build_weight_table(model, nmax, method="auto", n_jobs=1, cache_dir=None):
    """
    Таблица весов для модели

    PD: замкнутая форма. Иначе при nmax <= DIRECT_LIMIT каждая клетка
    считается независимо (метка sum или quadrature); для больших таблиц
    верхняя строка считается квадратурой, остальные строки: обратной
    рекурсией вниз от неё. Такие клетки наследуют метку quadrature
    опорной строки, так что метки остаются в closed | sum | quadrature;
    номер опорной строки даёт recursion_anchor().

    Args:
        model: GibbsModel
        nmax: Размер таблицы
        method: auto | sum | integral | generic
        n_jobs: Воркеры joblib для квадратурных клеток
        cache_dir: Каталог дискового кэша для GG-таблиц
    """
    nmax = int(nmax)
    if isinstance(model, PoissonDirichlet) and method in ("auto", "closed"):
        return WeightTable(model, nmax)

    cache_path = _cache_path(model, nmax, method, cache_dir)
    if cache_path is not None and cache_path.exists():
        logger.info("📥 таблица весов из кэша: %s", cache_path)
        return WeightTable.from_csv(cache_path, model)

    log_v = np.full((nmax + 2, nmax + 2), -np.inf)
    methods = [[None] * (nmax + 2) for _ in range(nmax + 2)]

    if nmax <= DIRECT_LIMIT:
        cells = [(n, k) for n in range(1, nmax + 1) for k in range(1, n + 1)]
    else:
        cells = [(nmax, k) for k in range(1, nmax + 1)]
        if isinstance(model, GeneralizedGamma) and method == "auto":
            method = "integral"

    if n_jobs == 1:
        results = [log_weight(model, n, k, method, TABLE_SUM_DIGITS) for n, k in cells]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(log_weight)(model, n, k, method, TABLE_SUM_DIGITS) for n, k in cells
        )
    for (n, k), (value, tag) in zip(cells, results):
        log_v[n, k] = value
        methods[n][k] = tag

    if nmax > DIRECT_LIMIT:
        alpha = model.a
        for n in range(nmax - 1, 0, -1):
            ks = np.arange(1, n + 1)
            log_v[n, 1:n + 1] = np.logaddexp(
                np.log(n - ks * alpha) + log_v[n + 1, 1:n + 1],
                log_v[n + 1, 2:n + 2],
            )
            for k in ks:
                methods[n][k] = methods[nmax][k]
        logger.info("🔍 строки 1..%d получены рекурсией от строки %d", nmax - 1, nmax)

    table = WeightTable(model, nmax, log_v, methods)
    if cache_path is not None:
        table.to_csv(cache_path)
        logger.info("💾 таблица весов сохранена в кэш: %s", cache_path)
    return table


def _cache_path(model, nmax, method, cache_dir):
    if cache_dir is None or not isinstance(model, GeneralizedGamma):
        return None
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    return cache_dir / f"gg_a{model.a!r}_b{model.beta!r}_n{nmax}_{method}.csv"


def default_cache_dir():
    return os.getenv("GIBBSDIV_CACHE_DIR", "weights_cache")


# --- числа Стирлинга ---

class StirlingTable:
    """
    Обобщённые числа Стирлинга S_α(n, k) в лог-домене

    S_α(n+1, k) = S_α(n, k-1) + (n - kα) S_α(n, k), S_α(1, 1) = 1.
    Все слагаемые положительны, так что знак не нужен.
    """

    def __init__(self, alpha, nmax):
        self.alpha = Alpha.of(alpha)
        nmax = int(nmax)
        if nmax < 1:
            raise DomainError(f"nmax должен быть >= 1, получено {nmax}", {"nmax": nmax})
        self.nmax = nmax
        a = self.alpha.value
        log_s = np.full((nmax + 1, nmax + 2), -np.inf)
        log_s[1, 1] = 0.0
        for n in range(1, nmax):
            ks = np.arange(1, n + 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                grow = np.where(ks <= n, np.log(np.maximum(n - ks * a, 0.0)) + log_s[n, 1:n + 2], -np.inf)
            log_s[n + 1, 1:n + 2] = np.logaddexp(log_s[n, 0:n + 1], grow)
        self._log_s = log_s

    def log_value(self, n, k):
        if not (1 <= k <= n <= self.nmax):
            raise TableRangeError(f"S_α({n},{k}) вне таблицы", {"n": n, "k": k, "nmax": self.nmax})
        return float(self._log_s[n, k])

    def value(self, n, k):
        return math.exp(self.log_value(n, k))

    def row(self, n):
        """log S_α(n, k) для k = 1..n"""
        if not (1 <= n <= self.nmax):
            raise TableRangeError(f"строка {n} вне таблицы", {"n": n, "nmax": self.nmax})
        return self._log_s[n, 1:n + 1].copy()


def stirling_table(alpha, nmax):
    """
    Треугольная таблица обобщённых чисел Стирлинга

    Example:
        >>> round(stirling_table(0.5, 2).value(2, 1), 12)
        0.5
    """
    return StirlingTable(alpha, nmax)


def block_count_distribution(table, n, stirling=None):
    """
    P(K_n = k) = V_{n,k} S_α(n, k), k = 1..n

    Returns:
        np.ndarray: вероятности длины n
    """
    stirling = stirling or StirlingTable(table.alpha, n)
    log_s = stirling.row(n)
    log_v = np.array([table.log_v(n, k) for k in range(1, n + 1)])
    return np.exp(log_v + log_s)


# --- EPPF и правило предсказания ---

def log_eppf(model, comp, table):
    if table.model is not model:
        raise DomainError("таблица весов построена для другой модели")
    if not isinstance(comp, Composition):
        comp = Composition(tuple(comp))
    if comp.n > table.nmax:
        raise TableRangeError(
            f"композиция размера {comp.n} вне таблицы (nmax={table.nmax})",
            {"n": comp.n, "nmax": table.nmax},
        )
    base = 1.0 - table.alpha
    log_product = math.fsum(
        math.lgamma(base + part - _RISING_SHIFT) - math.lgamma(base) for part in comp.parts
    )
    return table.log_v(comp.n, comp.k) + log_product


def eppf(model, comp, table):
    """
    Вероятность конфигурации блоков: V_{n,k} · Π_j (1-α)_{n_j - 1}

    Example:
        >>> pd = PoissonDirichlet(0.5, 0.5)
        >>> round(eppf(pd, Composition((2,)), WeightTable(pd, 2)), 12)
        0.333333333333
    """
    return math.exp(log_eppf(model, comp, table))


def predict_probs(table, n, k):
    """
    Правило предсказания в состоянии (n, k)

    Returns:
        tuple: (p_new, p_existing_per_unit), где вероятность присоединиться
        к блоку размера n_j равна (n_j - α)·p_existing_per_unit
    """
    if n + 1 > table.nmax:
        raise TableRangeError(
            f"правило предсказания из n={n} требует nmax >= {n + 1}",
            {"n": n, "k": k, "nmax": table.nmax},
        )
    base = table.log_v(n, k)
    p_new = math.exp(table.log_v(n + 1, k + 1) - base)
    per_unit = math.exp(table.log_v(n + 1, k) - base)
    return p_new, per_unit


def mass_balance(table, n, k):
    """|p_new + (n-kα)·p_existing_per_unit - 1|"""
    p_new, per_unit = predict_probs(table, n, k)
    return abs(p_new + (n - k * table.alpha) * per_unit - 1.0)


def iter_set_partitions(n):
    """
    Все разбиения множества [n] как списки блоков (строки ограниченного роста)

    Число разбиений равно числу Белла: 1, 2, 5, 15, 52, 203, 877, 4140, ...
    """
    if n < 1:
        return
    labels = [0] * n
    maxima = [0] * n

    while True:
        blocks = {}
        for item, label in enumerate(labels):
            blocks.setdefault(label, []).append(item + 1)
        yield [blocks[label] for label in sorted(blocks)]

        i = n - 1
        while i > 0 and labels[i] == maxima[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        maxima[i] = max(maxima[i - 1], labels[i])
        for j in range(i + 1, n):
            labels[j] = 0
            maxima[j] = maxima[i]


def eppf_total(model, table, n):
    """Σ eppf по всем разбиениям множества [n]"""
    return math.fsum(
        eppf(model, Composition(tuple(len(b) for b in blocks)), table)
        for blocks in iter_set_partitions(n)
    )
