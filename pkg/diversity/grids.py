# diversity/grids.py

"""
Сетки DensityGrid для плотностей разнообразия

Оболочка берётся из замкнутых моментов (неравенство Маркова сверху,
степенное поведение у нуля снизу) с массой 1e-11 на каждый хвост; для
моделей без замкнутых моментов используется оболочка g̃, а края
расширяются самой сеткой, пока плотность на них не станет пренебрежимой.
"""

import logging
import math

import numpy as np

from gibbs_weights.models import GeneralizedGamma, PoissonDirichlet
from stable_core.densities import log_ml_moment
from stable_core.density_grid import DEFAULT_STEP, DensityGrid, evaluate_points, moment_hull

from .conditional import (
    ConditionalDensity,
    GGConditionalDensity,
    gtilde_pdf,
    log_pd_conditional_pdf,
    unconditional_pdf,
)
from .moments import log_pd_conditional_moment

logger = logging.getLogger(__name__)


def pd_hull(alpha, theta, state):
    return moment_hull(
        lambda r: log_pd_conditional_moment(alpha, theta, state, r),
        mean=math.exp(log_pd_conditional_moment(alpha, theta, state, 1)),
        lower_exponent=theta / alpha + state.k,
    )


def gtilde_hull(alpha, state):
    return pd_hull(alpha, 0.0, state)


def unconditional_hull(model):
    alpha = model.a
    order = model.theta / alpha if isinstance(model, PoissonDirichlet) else 0.0
    return moment_hull(
        lambda r: log_ml_moment(alpha, order, r),
        mean=math.exp(log_ml_moment(alpha, order, 1)),
        lower_exponent=order + 1.0,
    )


def grid_diagnostics(grid):
    return {
        "mass_gap": abs(grid.total_mass - 1.0),
        "trapezoid_residual": grid.trapezoid_residual(),
        "monotone_cdf": grid.is_monotone(),
    }


def _tabulate(pdf, hull, points, step, n_jobs, metadata):
    if points is not None:
        points = np.asarray(points, dtype=float)
        values = evaluate_points(pdf, points, n_jobs)
        grid = DensityGrid.from_values(points, values, metadata)
    else:
        lo, hi = hull
        grid = DensityGrid.tabulate(pdf, lo, hi, step=step, n_jobs=n_jobs, metadata=metadata)
    grid.metadata["diagnostics"] = grid_diagnostics(grid)
    logger.info("📊 сетка %s: %d точек, масса %.12f", metadata.get("density"), grid.grid.size, grid.total_mass)
    return grid


def tabulate_gtilde(alpha, state, points=None, step=DEFAULT_STEP, n_jobs=1):
    """Сетка g̃ для (α, n, k)"""
    metadata = {
        "density": "gtilde",
        "model": {"kind": "gtilde", "alpha": float(alpha)},
        "state": state.as_dict(),
        "normalizer": 1.0,
        "normalizer_method": "closed",
    }
    return _tabulate(
        lambda s: gtilde_pdf(alpha, state, s), gtilde_hull(alpha, state), points, step, n_jobs, metadata
    )


def tabulate_pd_conditional(alpha, theta, state, points=None, step=DEFAULT_STEP, n_jobs=1):
    """Сетка условной плотности PD по собственному интегралу"""
    density = ConditionalDensity(PoissonDirichlet(alpha, theta), state)
    metadata = {"density": "pd_conditional", **density.metadata()}

    def pdf(z):
        value = log_pd_conditional_pdf(alpha, theta, state, z)
        return math.exp(value) if value > -math.inf else 0.0

    return _tabulate(pdf, pd_hull(alpha, theta, state), points, step, n_jobs, metadata)


def tabulate_gg_conditional(alpha, beta, state, points=None, step=DEFAULT_STEP, n_jobs=1):
    density = GGConditionalDensity(alpha, beta, state)
    metadata = {"density": "gg_conditional", **density.metadata()}
    return _tabulate(density.pdf, gtilde_hull(alpha, state), points, step, n_jobs, metadata)


def tabulate_conditional(model, state, points=None, step=DEFAULT_STEP, n_jobs=1, method="auto", table=None):
    """Сетка условной плотности для любой модели через общий путь"""
    density = ConditionalDensity(model, state, method=method, table=table)
    metadata = {"density": "conditional", **density.metadata()}
    if isinstance(model, PoissonDirichlet):
        hull = pd_hull(model.a, model.theta, state)
    else:
        hull = gtilde_hull(model.a, state)
    return _tabulate(density.pdf, hull, points, step, n_jobs, metadata)


def tabulate_unconditional(model, points=None, step=DEFAULT_STEP, n_jobs=1):
    """Сетка безусловной плотности h(s^(-1/α)) g_α(s)"""
    metadata = {"density": "unconditional", "model": model.describe(), "normalizer": 1.0,
                "normalizer_method": "closed"}
    return _tabulate(
        lambda s: unconditional_pdf(model, s), unconditional_hull(model), points, step, n_jobs, metadata
    )


def tabulate_for_model(model, state, points=None, step=DEFAULT_STEP, n_jobs=1, method="auto"):
    """
    Сетка условной плотности специализированным путём, если он есть

    PD через собственный интеграл, GenGamma через сумму неполных гамма-функций
    с откатом на интегральную форму, иначе общий путь.
    """
    if isinstance(model, PoissonDirichlet):
        if model.theta == 0.0:
            return tabulate_gtilde(model.a, state, points, step, n_jobs)
        return tabulate_pd_conditional(model.a, model.theta, state, points, step, n_jobs)
    if isinstance(model, GeneralizedGamma) and method == "auto":
        return tabulate_gg_conditional(model.a, model.beta, state, points, step, n_jobs)
    return tabulate_conditional(model, state, points, step, n_jobs, method=method)
