# stable_core/density_grid.py

"""
Табулированная плотность на положительной логарифмической сетке

Интегрирование ведётся в переменной v = log s: ∫ p(s) ds = ∫ s·p(s) dv.
Для плотностей, затухающих на обоих концах оболочки, трапеция в v
сходится экспоненциально быстро.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, TableRangeError, VerificationFailure

logger = logging.getLogger(__name__)

DEFAULT_STEP = 0.04          # шаг по log s
TAIL_MASS = 1e-11            # масса, отсекаемая с каждой стороны оболочки
EDGE_RATIO = 1e-13           # s·p(s) на краю относительно максимума
CURVATURE_TOL = 0.02         # порог второй разности log(s·p) для уточнения
REFINE_MASS_RATIO = 1e-10
MAX_EXTENSIONS = 6
MASS_TOLERANCE = 1e-6
CSV_FORMAT = "%.17g"


def evaluate_points(pdf, points, n_jobs=1, vectorized=False):
    """
    Значения плотности в точках с сохранением порядка сетки

    При n_jobs > 1 точки раздаются воркерам joblib кусками; сборка
    идёт в порядке точек, поэтому результат не зависит от числа воркеров.
    """
    points = np.asarray(points, dtype=float)
    if vectorized:
        return np.asarray(pdf(points), dtype=float)
    if n_jobs == 1 or len(points) < 64:
        return np.array([pdf(float(p)) for p in points], dtype=float)

    chunks = np.array_split(points, max(1, min(len(points) // 16, 8 * abs(n_jobs))))

    def _chunk(values):
        return [pdf(float(p)) for p in values]

    parts = Parallel(n_jobs=n_jobs)(delayed(_chunk)(chunk) for chunk in chunks)
    return np.array([value for part in parts for value in part], dtype=float)


def moment_hull(log_moment, mean, lower_exponent, tail=TAIL_MASS, max_order=24):
    """
    Оболочка [lo, hi], вне которой масса меньше tail с каждой стороны

    Верх: неравенство Маркова по лучшему из моментов r = 1..max_order,
    низ: степенное поведение P(S < x) ~ (x/mean)^lower_exponent у нуля.

    Args:
        log_moment: r -> log E[S^r]
        mean: E[S]
        lower_exponent: показатель e в P(S < x) ~ C x^e
    """
    log_tail = math.log(tail)
    hi = min(math.exp((log_moment(r) - log_tail) / r) for r in range(1, max_order + 1))
    exponent = max(float(lower_exponent), 0.25)
    lo = mean * math.exp(log_tail / exponent)
    return lo, max(hi, 4.0 * mean)


@dataclass
class DensityGrid:
    """
    Плотность на сетке вместе с функцией распределения

    Args:
        grid: Строго возрастающие положительные точки
        pdf: Значения плотности (>= 0)
        cdf: Кумулятивная трапеция s·pdf по log s
        total_mass: cdf[-1]
        metadata: Параметры модели, нормировка, диагностика
    """

    grid: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    total_mass: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.pdf = np.asarray(self.pdf, dtype=float)
        self.cdf = np.asarray(self.cdf, dtype=float)
        if self.grid.ndim != 1 or len(self.grid) < 3:
            raise DomainError("сетка должна содержать не меньше 3 точек", {"points": int(self.grid.size)})
        if np.any(self.grid <= 0.0) or np.any(np.diff(self.grid) <= 0.0):
            raise DomainError("сетка должна быть положительной и строго возрастающей")
        if not np.all(np.isfinite(self.pdf)) or np.any(self.pdf < 0.0):
            raise DomainError("значения плотности должны быть конечными и неотрицательными")

    # --- построение ---

    @classmethod
    def from_values(cls, grid, pdf, metadata=None):
        grid = np.asarray(grid, dtype=float)
        pdf = np.asarray(pdf, dtype=float)
        cdf = cumulative_trapezoid(grid * pdf, np.log(grid), initial=0.0)
        return cls(grid, pdf, cdf, float(cdf[-1]), dict(metadata or {}))

    @classmethod
    def tabulate(cls, pdf, lo, hi, step=DEFAULT_STEP, refine=True, n_jobs=1,
                 vectorized=False, metadata=None):
        """
        Табулирует плотность на [lo, hi] с логарифмическим шагом

        Края расширяются, пока s·p(s) на них не станет пренебрежимо малым;
        если вторая разность log(s·p) велика там, где масса заметна, шаг
        один раз делится пополам по всей сетке. Сетка остаётся равномерной
        по log s, и трапеция по ней сходится экспоненциально.

        Args:
            pdf: Плотность (скалярная, либо векторная при vectorized=True)
            lo, hi: Начальная оболочка
            step: Шаг по log s
            refine: Выполнить проход уточнения
            n_jobs: Число воркеров joblib для поточечных вычислений

        Returns:
            DensityGrid
        """
        if not (0.0 < lo < hi) or not math.isfinite(hi):
            raise DomainError("оболочка сетки должна удовлетворять 0 < lo < hi", {"lo": lo, "hi": hi})

        log_lo, log_hi = math.log(lo), math.log(hi)
        points = int(math.ceil((log_hi - log_lo) / step)) + 1
        v = np.linspace(log_lo, log_hi, max(points, 3))
        h = float(v[1] - v[0])
        values = evaluate_points(pdf, np.exp(v), n_jobs, vectorized)

        for _ in range(MAX_EXTENSIONS):
            mass = np.exp(v) * values
            peak = mass.max()
            if peak <= 0.0:
                raise VerificationFailure("плотность равна нулю на всей оболочке", {"lo": lo, "hi": hi})
            grow_left = mass[0] > EDGE_RATIO * peak
            grow_right = mass[-1] > EDGE_RATIO * peak
            if not (grow_left or grow_right):
                break
            count = int(math.ceil(max(2.0, 0.5 * (v[-1] - v[0])) / h))
            offsets = h * np.arange(1, count + 1)
            if grow_left:
                extra = v[0] - offsets[::-1]
                v = np.concatenate([extra, v])
                values = np.concatenate([evaluate_points(pdf, np.exp(extra), n_jobs, vectorized), values])
            if grow_right:
                extra = v[-1] + offsets
                v = np.concatenate([v, extra])
                values = np.concatenate([values, evaluate_points(pdf, np.exp(extra), n_jobs, vectorized)])
            logger.debug("оболочка расширена до [%.3g, %.3g]", math.exp(v[0]), math.exp(v[-1]))

        if refine:
            v, values = cls._refine(pdf, v, values, n_jobs, vectorized)

        return cls.from_values(np.exp(v), values, metadata)

    @staticmethod
    def _refine(pdf, v, values, n_jobs, vectorized):
        # шаг по log s остаётся равномерным: середины вставляются везде
        mass = np.exp(v) * values
        with np.errstate(divide="ignore"):
            log_mass = np.log(mass)
        finite = np.isfinite(log_mass)
        second = np.zeros_like(v)
        inner = finite[:-2] & finite[1:-1] & finite[2:]
        second[1:-1] = np.where(inner, np.abs(log_mass[:-2] - 2.0 * log_mass[1:-1] + log_mass[2:]), 0.0)
        relevant = mass > REFINE_MASS_RATIO * mass.max()
        if not np.any((second > CURVATURE_TOL) & relevant):
            return v, values

        mids = 0.5 * (v[:-1] + v[1:])
        new_values = evaluate_points(pdf, np.exp(mids), n_jobs, vectorized)
        merged_v = np.empty(v.size + mids.size)
        merged_values = np.empty_like(merged_v)
        merged_v[0::2], merged_v[1::2] = v, mids
        merged_values[0::2], merged_values[1::2] = values, new_values
        logger.debug("уточнение сетки: шаг %.4g, %d точек", float(v[1] - v[0]) / 2.0, merged_v.size)
        return merged_v, merged_values

    # --- проверки ---

    def check_mass(self, tolerance=MASS_TOLERANCE):
        """Полная масса отличается от 1 меньше чем на tolerance"""
        gap = abs(self.total_mass - 1.0)
        if gap >= tolerance:
            raise VerificationFailure(
                "масса сетки не равна 1",
                {"total_mass": self.total_mass, "gap": gap, "tolerance": tolerance},
            )
        return gap

    def trapezoid_residual(self):
        """Расхождение сохранённой cdf с повторной трапецией"""
        recomputed = cumulative_trapezoid(self.grid * self.pdf, np.log(self.grid), initial=0.0)
        return float(np.max(np.abs(recomputed - self.cdf)))

    def is_monotone(self):
        return bool(np.all(np.diff(self.cdf) >= 0.0))

    # --- вычисления ---

    def cdf_at(self, s):
        """F(s) с монотонной интерполяцией по log s; 0 и total_mass вне сетки"""
        s = np.asarray(s, dtype=float)
        interp = PchipInterpolator(np.log(self.grid), self.cdf, extrapolate=False)
        with np.errstate(divide="ignore"):
            out = interp(np.log(np.where(s > 0.0, s, self.grid[0])))
        out = np.where(s <= self.grid[0], 0.0, out)
        out = np.where(s >= self.grid[-1], self.total_mass, out)
        return out

    def outside_mass(self, values):
        """Доля значений вне [grid[0], grid[-1]]"""
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return 0.0
        outside = (values < self.grid[0]) | (values > self.grid[-1])
        return float(outside.mean())

    def require_coverage(self, values, tolerance=1e-4):
        mass = self.outside_mass(values)
        if mass > tolerance:
            raise TableRangeError(
                "сетка не покрывает выборку",
                {"uncovered_mass": mass, "tolerance": tolerance,
                 "grid_lo": float(self.grid[0]), "grid_hi": float(self.grid[-1])},
            )
        return mass

    def quantile(self, u):
        """Обратная функция распределения (линейно по log s)"""
        keep = np.concatenate([[True], np.diff(self.cdf) > 0.0])
        levels = self.cdf[keep] / self.total_mass
        log_s = np.log(self.grid[keep])
        return np.exp(np.interp(u, levels, log_s))

    def sample(self, rng, size):
        """Выборка методом обратной функции распределения"""
        return self.quantile(rng.generator.random(size))

    def moment(self, r):
        """∫ s^r p(s) ds той же трапецией, нормированный на total_mass"""
        integrand = self.grid ** (r + 1.0) * self.pdf
        return float(np.trapz(integrand, np.log(self.grid)) / self.total_mass)

    # --- ввод/вывод ---

    def to_frame(self):
        return pd.DataFrame({"s": self.grid, "pdf": self.pdf, "cdf": self.cdf})

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FORMAT)
        return path

    def write_sidecar(self, path, extra=None):
        """JSON рядом с CSV: параметры модели, нормировка, диагностика"""
        path = Path(path)
        payload = dict(self.metadata)
        payload.update(extra or {})
        payload.update({
            "total_mass": self.total_mass,
            "points": int(self.grid.size),
            "grid_lo": float(self.grid[0]),
            "grid_hi": float(self.grid[-1]),
        })
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, ensure_ascii=False, default=float)
        return path

    @classmethod
    def from_csv(cls, path, metadata=None):
        frame = pd.read_csv(path)
        missing = {"s", "pdf", "cdf"} - set(frame.columns)
        if missing:
            raise DomainError(f"в CSV нет столбцов {sorted(missing)}", {"path": str(path)})
        cdf = frame["cdf"].to_numpy()
        return cls(frame["s"].to_numpy(), frame["pdf"].to_numpy(), cdf, float(cdf[-1]), dict(metadata or {}))
