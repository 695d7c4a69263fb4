# cli_app/commands.py

"""
Подкоманды CLI: pdf, weights, simulate, moments, verify

Каждая команда получает проверенный RunConfig и каталог запуска,
пишет файлы только туда и возвращает список записанных путей.
"""

import logging
import math

import pandas as pd

from diversity.checks import beta_mixture_check
from diversity.grids import tabulate_for_model, tabulate_unconditional
from diversity.moments import chf_partial_sum, grid_moments, pd_conditional_moments, pd_expected_new_blocks
from gibbs_weights.models import GeneralizedGamma, PoissonDirichlet
from gibbs_weights.table import CLOSED_TOLERANCE, WeightTable, build_weight_table, default_cache_dir
from gibbs_weights.weights import log_gg_weight_integral, log_gg_weight_sum
from mc_sim.chain import empirical_diversity
from mc_sim.goodness import empirical_moments, ks_statistic, moment_report
from stable_core.errors import DomainError, PrecisionError, VerificationFailure
from stable_core.random_stream import RandomStream

from .output import status, write_density_plot, write_json, write_sample_plot
from .verify import run_suite

logger = logging.getLogger(__name__)

DUAL_FORM_LIMIT = 12
SIMULATION_MOMENT_ORDER = 3


def _density_grid(config, model):
    state = config.state()
    points = config.grid_points()
    if state is None:
        return tabulate_unconditional(model, points=points, n_jobs=config.jobs)
    return tabulate_for_model(model, state, points=points, n_jobs=config.jobs, method=config.method)


def cmd_pdf(config, run_dir):
    """
    Сетка плотности: CSV s,pdf,cdf, JSON-сайдкар и скрипт gnuplot

    С --n/--k строится условная плотность, без них безусловная.
    """
    model = config.build_model()
    grid = _density_grid(config, model)
    if config.grid is None:
        grid.check_mass(config.tol["mass"])
    else:
        gap = abs(grid.total_mass - 1.0)
        if gap > config.tol["mass"]:
            logger.warning("⚠️ явная сетка захватывает массу %.9f", grid.total_mass)

    csv_path = grid.to_csv(run_dir / "density.csv")
    sidecar = grid.write_sidecar(run_dir / "density.json", {"grid_spec": config.grid})
    plot = write_density_plot(run_dir / "density.gp", csv_path.name, grid.metadata.get("density", "density"))
    status(f"✅ сетка из {grid.grid.size} точек, масса {grid.total_mass:.10f}")
    return [csv_path, sidecar, plot]


def _dual_form_frame(model, nmax):
    rows = []
    for n in range(1, nmax + 1):
        for k in range(1, n + 1):
            by_integral = log_gg_weight_integral(model.a, model.beta, n, k)
            try:
                by_sum = log_gg_weight_sum(model.a, model.beta, n, k)
                gap, note = abs(math.expm1(by_sum - by_integral)), ""
            except PrecisionError as e:
                by_sum, gap, note = math.nan, math.nan, f"precision: {e.details.get('estimated_digits', 0.0):.2f} digits"
            rows.append((n, k, math.exp(by_sum), math.exp(by_integral), gap, note))
    return pd.DataFrame(rows, columns=["n", "k", "V_sum", "V_integral", "relative_gap", "note"])


def cmd_weights(config, run_dir):
    """
    Таблица весов: CSV n,k,V,method и отчёт о невязках рекурсии

    Для GenGamma при nmax <= 12 дополнительно пишется сравнение суммы и
    интегральной формы.
    """
    model = config.build_model()
    nmax = int(config.nmax)
    cache_dir = default_cache_dir() if isinstance(model, GeneralizedGamma) else None
    table = build_weight_table(model, nmax + 1, method=config.method, n_jobs=config.jobs, cache_dir=cache_dir)
    outputs = [table.to_csv(run_dir / "weights.csv", nmax)]

    tolerance = CLOSED_TOLERANCE if table.closed else config.tol["residual"]
    worst, where = table.max_residual(nmax)
    report = {
        "model": model.describe(),
        "nmax": nmax,
        "max_residual": worst,
        "at": where,
        "tolerance": tolerance,
        "v11": table.v(1, 1),
        "recursion_anchor": table.recursion_anchor(),
    }

    if isinstance(model, GeneralizedGamma) and nmax <= DUAL_FORM_LIMIT:
        dual = _dual_form_frame(model, nmax)
        outputs.append(run_dir / "weights_dual.csv")
        dual.to_csv(outputs[-1], index=False, float_format="%.17g")
        report["dual_max_gap"] = float(dual["relative_gap"].max(skipna=True)) if dual["relative_gap"].notna().any() else None
        report["precision_refusals"] = int(dual["relative_gap"].isna().sum())
        report["agreement_tolerance"] = config.tol["agreement"]

    outputs.append(write_json(run_dir / "weights.json", report))
    if worst >= tolerance:
        raise VerificationFailure(
            "невязка обратной рекурсии превышает допуск",
            {"max_residual": worst, "at": list(where), "tolerance": tolerance},
        )
    status(f"✅ таблица до n={nmax}, невязка {worst:.3g}")
    return outputs


def _simulation_table(config, model):
    size = int(config.n) + int(config.m) + 1
    if isinstance(model, PoissonDirichlet):
        return WeightTable(model, size)
    cache_dir = default_cache_dir() if isinstance(model, GeneralizedGamma) else None
    return build_weight_table(model, size, method=config.method, n_jobs=config.jobs, cache_dir=cache_dir)


def _reference_moments(model, state, grid, order):
    if isinstance(model, PoissonDirichlet):
        return pd_conditional_moments(model.a, model.theta, state, order)
    return grid_moments(grid, order)


def cmd_simulate(config, run_dir):
    """
    Ансамбль K_m(new)/m^α: CSV rep,value, JSON метаданных и отчёт KS/моментов
    """
    model = config.build_model()
    state = config.state()
    m = int(config.m)
    table = _simulation_table(config, model)
    sample = empirical_diversity(table, state, m, int(config.reps), RandomStream(config.seed), n_jobs=config.jobs)

    outputs = [sample.to_csv(run_dir / "sample.csv"), sample.write_metadata(run_dir / "sample.json")]
    report = {"mean": sample.mean(), "reps": sample.reps, "m": m}
    grid_name = None

    if m > 0 and sample.reps >= 2:
        grid = _density_grid(config, model)
        outputs.append(grid.to_csv(run_dir / "theory.csv"))
        grid_name = "theory.csv"
        statistic = ks_statistic(sample, grid)
        order = SIMULATION_MOMENT_ORDER
        empirical = empirical_moments(sample, order)
        reference = _reference_moments(model, state, grid, order)
        report.update({
            "ks": statistic,
            "ks_tolerance": config.tol["ks"],
            "ks_passed": statistic < config.tol["ks"],
            "moments": moment_report(empirical, reference),
        })
        if isinstance(model, PoissonDirichlet):
            exact = pd_expected_new_blocks(model.a, model.theta, state.n, state.k, m) / m ** model.a
            report["finite_m_mean"] = exact
            report["limit_mean"] = reference[1]

    outputs.append(write_json(run_dir / "report.json", report))
    outputs.append(write_sample_plot(run_dir / "sample.gp", "sample.csv", grid_name, f"n={state.n}, k={state.k}, m={m}"))
    status(f"✅ {sample.reps} повторов, среднее {sample.mean():.6f}")
    return outputs


def cmd_moments(config, run_dir):
    """
    Моменты условного разнообразия и частичная сумма характеристической функции

    Для PD (и g̃): замкнутые формы и проверка двух представлений; для
    прочих моделей: моменты сетки.
    """
    model = config.build_model()
    state = config.state()
    order = int(config.order)
    report = {"model": model.describe(), "state": state.as_dict(), "order": order}

    if isinstance(model, PoissonDirichlet):
        moments = pd_conditional_moments(model.a, model.theta, state, order)
        chf = chf_partial_sum(model.a, model.theta, state, config.t, order)
        report["source"] = "closed"
        report["chf"] = {"t": float(config.t), **chf.to_dict()}
        try:
            report["mixture_gap"] = beta_mixture_check(model.a, model.theta, state, min(order, 10))
        except DomainError as e:
            report["mixture_gap"] = None
            report["mixture_error"] = e.to_dict()
    else:
        grid = tabulate_for_model(model, state, n_jobs=config.jobs, method=config.method)
        moments = grid_moments(grid, order)
        report["source"] = "grid"

    report["moments"] = moments.to_dict()
    report["log_convexity_gap"] = moments.log_convexity_gap()
    path = write_json(run_dir / "moments.json", report)
    status(f"✅ моменты до порядка {order}")
    return [path]


def cmd_verify(config, run_dir):
    """Набор проверок; VerificationFailure, если хоть одна не прошла"""
    report = run_suite(config.suite, config)
    path = write_json(run_dir / "verify.json", report)
    if not report["passed"]:
        raise VerificationFailure(
            f"не пройдено проверок: {len(report['failed'])}",
            {"failed": report["failed"], "report": str(path)},
        )
    status(f"✅ набор {config.suite}: все {len(report['checks'])} проверок пройдены")
    return [path]


COMMANDS = {
    "pdf": cmd_pdf,
    "weights": cmd_weights,
    "simulate": cmd_simulate,
    "moments": cmd_moments,
    "verify": cmd_verify,
}
