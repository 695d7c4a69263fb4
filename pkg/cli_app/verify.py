# cli_app/verify.py

"""
Наборы проверок инвариантов: stable, weights, diversity, mc

Каждая проверка возвращает {name, target, achieved, passed}; исключение
внутри проверки превращается в проваленную проверку с описанием ошибки,
набор при этом продолжается.
"""

import itertools
import logging
import math
import time

import numpy as np
from scipy.stats import kstest

from diversity.checks import beta_mixture_check, ratio_law_check, sample_conditional
from diversity.conditional import (
    ConditionalDensity,
    ConditioningState,
    conditional_mass,
    conditional_pdf,
    gg_conditional_pdf,
    gtilde_pdf,
    normalizer_by_quadrature,
    pd_conditional_pdf,
    unconditional_pdf,
)
from diversity.grids import tabulate_pd_conditional, tabulate_unconditional
from diversity.moments import grid_moments, pd_conditional_moment, pd_conditional_moments
from gibbs_weights.models import GeneralizedGamma, PoissonDirichlet
from gibbs_weights.table import (
    CLOSED_TOLERANCE,
    WeightTable,
    block_count_distribution,
    build_weight_table,
    eppf_total,
)
from gibbs_weights.weights import log_gg_weight_integral, log_gg_weight_sum
from mc_sim.chain import (
    empirical_diversity,
    empirical_unconditional_diversity,
    enumerate_new_block_paths,
    new_block_counts,
    new_block_distribution,
)
from mc_sim.goodness import block_count_goodness, chain_vs_rejection, ks_statistic
from stable_core.densities import ml_moment, ml_pdf, stable_pdf, tilted_ml_pdf, tilted_stable_pdf
from stable_core.errors import GibbsDivError, PrecisionError
from stable_core.quadrature import integrate_log_scale
from stable_core.random_stream import RandomStream
from stable_core.sampling import sample_stable, sample_tilted_ml, tilted_ml_grid

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-8
CLOSED_FORM_TOLERANCE = 1e-8
SAMPLER_KS = 0.01
RATIO_LAW_KS = 0.01
WEIGHT_NORMALIZER_TOLERANCE = 1e-5
GG_NORMALIZATION_TOLERANCE = 1e-5
PD_PATH_AGREEMENT = 1e-8
LIMIT_MEAN_TOLERANCE = 0.02
CHI_SQUARE_P = 0.001
EPPF_TOLERANCE = 1e-8

SAMPLER_DRAWS = 1_000_000
RATIO_LAW_DRAWS = 1_000_000
PARTITION_REPS = 100_000
LIMIT_M = 10_000
LIMIT_REPS = 10_000


def result(name, target, achieved, passed, **extra):
    payload = {"name": name, "target": target, "achieved": achieved, "passed": bool(passed)}
    payload.update(extra)
    return payload


def run_check(name, target, check):
    """Выполнить проверку; ошибка библиотеки: провал с диагностикой"""
    started = time.perf_counter()
    try:
        outcome = check()
    except (GibbsDivError, ArithmeticError, ValueError) as e:
        details = e.to_dict() if isinstance(e, GibbsDivError) else {"error": str(e), "type": type(e).__name__}
        logger.warning("❌ %s: %s", name, details["error"])
        return result(name, target, None, False, error=details, wall_time=time.perf_counter() - started)
    outcome.setdefault("wall_time", time.perf_counter() - started)
    mark = "✅" if outcome["passed"] else "❌"
    logger.info("%s %s: %s (цель %s)", mark, name, outcome["achieved"], target)
    return outcome


def _max_relative(pairs):
    return max(abs(a / b - 1.0) for a, b in pairs)


# --- stable ---

def check_half_closed_forms(points=100):
    t = np.geomspace(1e-3, 1e3, points)
    s = np.geomspace(1e-2, 10.0, points)
    stable_exact = t ** -1.5 * np.exp(-1.0 / (4.0 * t)) / (2.0 * math.sqrt(math.pi))
    ml_exact = np.exp(-s ** 2 / 4.0) / math.sqrt(math.pi)
    gap = max(
        _max_relative((stable_pdf(0.5, ti), e) for ti, e in zip(t, stable_exact)),
        _max_relative((ml_pdf(0.5, si), e) for si, e in zip(s, ml_exact)),
    )
    return result("stable.closed_form_half", CLOSED_FORM_TOLERANCE, gap, gap < CLOSED_FORM_TOLERANCE)


def check_normalizations(tolerance=NORMALIZATION_TOLERANCE):
    gaps = {}
    for alpha in (0.2, 0.5, 0.8):
        mass, _ = integrate_log_scale(lambda s: ml_pdf(alpha, s), epsabs=1e-12, epsrel=1e-10)
        gaps[f"ml[{alpha}]"] = abs(mass - 1.0)
    for alpha, k in itertools.product((0.5, 0.7), (1, 3, 10)):
        mass, _ = integrate_log_scale(
            lambda y: tilted_ml_pdf(alpha, k, y), split=math.log(ml_moment(alpha, k, 1)),
            epsabs=1e-12, epsrel=1e-10,
        )
        gaps[f"tilted_ml[{alpha},{k}]"] = abs(mass - 1.0)
    mass, _ = integrate_log_scale(lambda t: tilted_stable_pdf(0.5, 2, t), epsabs=1e-12, epsrel=1e-10)
    gaps["tilted_stable[0.5,2]"] = abs(mass - 1.0)
    worst = max(gaps.values())
    return result("stable.normalization", tolerance, worst, worst < tolerance, cases=gaps)


def check_ml_moments(tolerance=1e-6):
    gaps = {}
    for alpha, k, r in itertools.product((0.3, 0.5, 0.7), (0, 1, 3), (1.0, 2.0)):
        numeric, _ = integrate_log_scale(
            lambda y: y ** r * tilted_ml_pdf(alpha, k, y), split=math.log(ml_moment(alpha, k, 1)),
            epsabs=1e-12, epsrel=1e-10,
        )
        gaps[f"{alpha},{k},{r}"] = abs(numeric / ml_moment(alpha, k, r) - 1.0)
    worst = max(gaps.values())
    return result("stable.ml_moments", tolerance, worst, worst < tolerance, cases=gaps)


def check_stable_sampler(draws=SAMPLER_DRAWS, seed=2024, alpha=0.5):
    rng = RandomStream(seed)
    values = sample_stable(alpha, rng, size=draws) ** (-alpha)
    grid = tilted_ml_grid(alpha, 0)
    statistic = float(kstest(values, lambda x: grid.cdf_at(x) / grid.total_mass).statistic)
    return result("stable.sampler_ks", SAMPLER_KS, statistic, statistic < SAMPLER_KS)


def check_tilted_sampler(draws=SAMPLER_DRAWS, seed=2024, alpha=0.5, k=1):
    values = sample_tilted_ml(alpha, k, RandomStream(seed), size=draws)
    z_scores = []
    for r in (1, 2):
        powered = values ** r
        se = powered.std(ddof=1) / math.sqrt(draws)
        z_scores.append(abs(powered.mean() - ml_moment(alpha, k, r)) / se)
    worst = max(z_scores)
    return result("stable.tilted_sampler_moments", 3.0, worst, worst < 3.0)


def stable_suite(config):
    return [
        run_check("stable.closed_form_half", CLOSED_FORM_TOLERANCE, check_half_closed_forms),
        run_check("stable.normalization", NORMALIZATION_TOLERANCE, check_normalizations),
        run_check("stable.ml_moments", 1e-6, check_ml_moments),
        run_check("stable.sampler_ks", SAMPLER_KS, lambda: check_stable_sampler(seed=config.seed)),
        run_check("stable.tilted_sampler_moments", 3.0, lambda: check_tilted_sampler(seed=config.seed)),
    ]


# --- weights ---

def check_eppf_additivity(nmax=8, tolerance=EPPF_TOLERANCE):
    gaps = {}
    for model in (PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)):
        table = build_weight_table(model, nmax + 1, method="integral")
        for n in range(1, nmax + 1):
            gaps[f"{model.kind}[n={n}]"] = abs(eppf_total(model, table, n) - 1.0)
    worst = max(gaps.values())
    return result("weights.eppf_additivity", tolerance, worst, worst < tolerance)


def check_pd_recursion(nmax=50, tolerance=CLOSED_TOLERANCE):
    table = WeightTable(PoissonDirichlet(0.5, 1.0), nmax + 1)
    worst, where = table.max_residual(nmax)
    return result("weights.pd_recursion", tolerance, worst, worst < tolerance, at=where)


def check_gg_recursion(nmax=12, tolerance=1e-8):
    table = build_weight_table(GeneralizedGamma(0.5, 1.0), nmax + 1, method="integral")
    worst, where = table.max_residual(nmax)
    return result("weights.gg_recursion", tolerance, worst, worst < tolerance, at=where)


def check_gg_dual_form(nmax=12, tolerance=1e-6):
    worst, refused, compared = 0.0, 0, 0
    for alpha, beta in itertools.product((0.3, 0.5, 0.8), (0.5, 1.0, 2.0)):
        for n in range(1, nmax + 1):
            for k in range(1, n + 1):
                try:
                    by_sum = log_gg_weight_sum(alpha, beta, n, k)
                except PrecisionError:
                    refused += 1
                    continue
                by_integral = log_gg_weight_integral(alpha, beta, n, k)
                worst = max(worst, abs(math.expm1(by_sum - by_integral)))
                compared += 1
    return result(
        "weights.gg_dual_form", tolerance, worst, worst < tolerance,
        compared=compared, precision_refusals=refused,
    )


def check_unit_corner_and_law(n=12):
    corners, sums = [], []
    for model in (PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)):
        table = build_weight_table(model, n + 1, method="integral")
        corners.append(abs(table.v(1, 1) - 1.0))
        sums.append(abs(block_count_distribution(table, n).sum() - 1.0))
    worst = max(corners + sums)
    return result("weights.v11_and_block_law", 1e-8, worst, worst < 1e-8)


def weights_suite(config):
    tol = config.tol
    return [
        run_check("weights.eppf_additivity", EPPF_TOLERANCE, check_eppf_additivity),
        run_check("weights.pd_recursion", CLOSED_TOLERANCE, check_pd_recursion),
        run_check("weights.gg_recursion", tol["residual"], lambda: check_gg_recursion(tolerance=tol["residual"])),
        run_check("weights.gg_dual_form", tol["agreement"], lambda: check_gg_dual_form(tolerance=tol["agreement"])),
        run_check("weights.v11_and_block_law", 1e-8, check_unit_corner_and_law),
    ]


# --- diversity ---

def check_gtilde_normalization(tolerance):
    gaps = {}
    for alpha, n, k in ((0.5, 10, 3), (0.7, 12, 5)):
        density = ConditionalDensity(PoissonDirichlet(alpha, 0.0), ConditioningState(n, k))
        gaps[f"{alpha},{n},{k}"] = abs(conditional_mass(density) - 1.0)
    worst = max(gaps.values())
    return result("diversity.gtilde_normalization", tolerance, worst, worst < tolerance)


def check_conditional_normalization(tolerance):
    pd_gap = abs(conditional_mass(ConditionalDensity(PoissonDirichlet(0.5, 1.0), ConditioningState(10, 3))) - 1.0)
    gg_gap = abs(conditional_mass(ConditionalDensity(GeneralizedGamma(0.5, 1.0), ConditioningState(6, 2))) - 1.0)
    passed = pd_gap < tolerance and gg_gap < max(tolerance, GG_NORMALIZATION_TOLERANCE)
    return result(
        "diversity.conditional_normalization", tolerance, max(pd_gap, gg_gap), passed,
        cases={"pd": pd_gap, "gg": gg_gap},
    )


def check_unconditional_normalization(tolerance):
    gaps = {}
    for model in (PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)):
        mass, _ = integrate_log_scale(lambda s: unconditional_pdf(model, s), epsabs=1e-13, epsrel=1e-9)
        gaps[model.kind] = abs(mass - 1.0)
    worst = max(gaps.values())
    return result("diversity.unconditional_normalization", tolerance, worst, worst < tolerance, cases=gaps)


def check_weight_normalizer(tolerance=WEIGHT_NORMALIZER_TOLERANCE):
    gaps = {}
    cases = (
        (PoissonDirichlet(0.5, 1.0), ConditioningState(10, 3)),
        (PoissonDirichlet(0.3, 2.0), ConditioningState(8, 4)),
        (GeneralizedGamma(0.5, 1.0), ConditioningState(6, 2)),
        (GeneralizedGamma(0.7, 2.0), ConditioningState(9, 3)),
    )
    for model, state in cases:
        density = ConditionalDensity(model, state)
        gaps[f"{model!r}@{state.n},{state.k}"] = abs(normalizer_by_quadrature(model, state) / density.normalizer - 1.0)
    worst = max(gaps.values())
    return result("diversity.weight_normalizer", tolerance, worst, worst < tolerance, cases=gaps)


def check_path_agreement(points=50):
    state = ConditioningState(10, 3)
    s = np.geomspace(0.2, 6.0, points)
    pd_model = PoissonDirichlet(0.5, 1.0)
    pd_gap = max(
        abs(pd_conditional_pdf(0.5, 1.0, state, x) / conditional_pdf(pd_model, state, x) - 1.0) for x in s
    )
    tilt_gap = max(
        abs(conditional_pdf(PoissonDirichlet(0.5, 0.0), state, x) / gtilde_pdf(0.5, state, x) - 1.0) for x in s
    )
    gg_state = ConditioningState(6, 2)
    gg_model = GeneralizedGamma(0.5, 1.0)
    generic = ConditionalDensity(gg_model, gg_state, method="generic")
    gg_gap = max(
        abs(gg_conditional_pdf(0.5, 1.0, gg_state, x) / generic.pdf(x) - 1.0) for x in s
    )
    passed = pd_gap < PD_PATH_AGREEMENT and tilt_gap < 1e-9 and gg_gap < 1e-6
    return result(
        "diversity.path_agreement", {"pd": PD_PATH_AGREEMENT, "gtilde": 1e-9, "gg": 1e-6},
        max(pd_gap, tilt_gap, gg_gap), passed,
        cases={"pd": pd_gap, "gtilde": tilt_gap, "gg": gg_gap},
    )


def check_grid_moments(tolerance):
    gaps = {}
    for alpha, theta in itertools.product((0.3, 0.5, 0.7), (0.0, 1.0)):
        state = ConditioningState(10, 3)
        grid = tabulate_pd_conditional(alpha, theta, state)
        moments = grid_moments(grid, 3)
        for r in (1, 2, 3):
            gaps[f"{alpha},{theta},r={r}"] = abs(moments[r] / pd_conditional_moment(alpha, theta, state, r) - 1.0)
    worst = max(gaps.values())
    return result("diversity.grid_moments", tolerance, worst, worst < tolerance, cases=gaps)


def check_beta_mixture(tolerance):
    gaps = {}
    for alpha, theta in itertools.product((0.3, 0.5, 0.7), (0.0, 1.0)):
        gaps[f"{alpha},{theta}"] = beta_mixture_check(alpha, theta, ConditioningState(10, 3), 5)
    worst = max(gaps.values())
    return result("diversity.beta_mixture", tolerance, worst, worst < tolerance, cases=gaps)


def check_log_convexity(tolerance=1e-9):
    worst = -math.inf
    for alpha, theta in itertools.product((0.3, 0.5, 0.7), (0.0, 1.0)):
        sequence = pd_conditional_moments(alpha, theta, ConditioningState(10, 3), 10)
        worst = max(worst, sequence.log_convexity_gap())
    return result("diversity.log_convexity", tolerance, worst, worst <= tolerance)


def check_ratio_law(draws=RATIO_LAW_DRAWS, seed=2024):
    cases = {}
    for index, (alpha, n, k) in enumerate(((0.5, 10, 3), (0.5, 5, 5))):
        cases[f"{alpha},{n},{k}"] = ratio_law_check(alpha, ConditioningState(n, k), draws, RandomStream(seed, index))
    worst = max(cases.values())
    return result("diversity.ratio_law", RATIO_LAW_KS, worst, worst < RATIO_LAW_KS, cases=cases)


def check_product_sampler(draws=RATIO_LAW_DRAWS, seed=2024):
    state = ConditioningState(10, 3)
    grid = tabulate_pd_conditional(0.5, 1.0, state)
    values = sample_conditional(PoissonDirichlet(0.5, 1.0), state, draws, RandomStream(seed))
    statistic = ks_statistic(values, grid)
    return result("diversity.product_sampler_ks", SAMPLER_KS, statistic, statistic < SAMPLER_KS)


def diversity_suite(config):
    tol = config.tol
    return [
        run_check("diversity.gtilde_normalization", tol["mass"], lambda: check_gtilde_normalization(tol["mass"])),
        run_check("diversity.conditional_normalization", tol["mass"],
                  lambda: check_conditional_normalization(tol["mass"])),
        run_check("diversity.unconditional_normalization", tol["mass"],
                  lambda: check_unconditional_normalization(tol["mass"])),
        run_check("diversity.weight_normalizer", WEIGHT_NORMALIZER_TOLERANCE, check_weight_normalizer),
        run_check("diversity.path_agreement", PD_PATH_AGREEMENT, check_path_agreement),
        run_check("diversity.grid_moments", tol["moment"], lambda: check_grid_moments(tol["moment"])),
        run_check("diversity.beta_mixture", tol["gap"], lambda: check_beta_mixture(tol["gap"])),
        run_check("diversity.log_convexity", 1e-9, check_log_convexity),
        run_check("diversity.ratio_law", RATIO_LAW_KS, lambda: check_ratio_law(seed=config.seed)),
        run_check("diversity.product_sampler_ks", SAMPLER_KS, lambda: check_product_sampler(seed=config.seed)),
    ]


# --- mc ---

def check_block_count_law(reps=PARTITION_REPS, seed=2024):
    outcome = block_count_goodness(WeightTable(PoissonDirichlet(0.5, 1.0), 7), 6, reps, RandomStream(seed))
    p_value = outcome["p_value"]
    return result("mc.block_count_law", CHI_SQUARE_P, p_value, p_value > CHI_SQUARE_P)


def check_chain_vs_rejection(reps=PARTITION_REPS, seed=2024):
    table = WeightTable(PoissonDirichlet(0.5, 1.0), 13)
    outcome = chain_vs_rejection(table, ConditioningState(6, 2), 5, reps, RandomStream(seed))
    p_value = outcome["p_value"]
    return result("mc.chain_vs_rejection", CHI_SQUARE_P, p_value, p_value > CHI_SQUARE_P)


def check_chain_enumeration(reps=PARTITION_REPS, seed=2024):
    table = WeightTable(PoissonDirichlet(0.5, 1.0), 20)
    state = ConditioningState(10, 3)
    exact = enumerate_new_block_paths(table, state, 5)
    dp_gap = float(np.max(np.abs(exact - new_block_distribution(table, state, 5))))
    counts = new_block_counts(table, state, 5, reps, RandomStream(seed))
    frequencies = np.bincount(counts, minlength=6) / reps
    se = np.sqrt(exact * (1.0 - exact) / reps)
    z = float(np.max(np.abs(frequencies - exact) / np.where(se > 0.0, se, 1.0)))
    return result("mc.chain_enumeration", 3.0, z, z < 3.0 and dp_gap < 1e-12, dp_gap=dp_gap)


def check_conditional_limit(ks_tolerance, m=LIMIT_M, reps=LIMIT_REPS, seed=2024, n_jobs=1):
    model = PoissonDirichlet(0.5, 1.0)
    state = ConditioningState(10, 3)
    table = WeightTable(model, state.n + m + 1)
    sample = empirical_diversity(table, state, m, reps, RandomStream(seed), n_jobs=n_jobs)
    grid = tabulate_pd_conditional(0.5, 1.0, state)
    statistic = ks_statistic(sample, grid)
    mean_gap = abs(sample.mean() / pd_conditional_moment(0.5, 1.0, state, 1) - 1.0)
    passed = statistic < ks_tolerance and mean_gap < LIMIT_MEAN_TOLERANCE
    return result(
        "mc.conditional_limit", {"ks": ks_tolerance, "mean": LIMIT_MEAN_TOLERANCE},
        {"ks": statistic, "mean_gap": mean_gap}, passed,
    )


def check_unconditional_limit(ks_tolerance, n=LIMIT_M, reps=LIMIT_REPS, seed=2024, n_jobs=1):
    model = PoissonDirichlet(0.5, 1.0)
    sample = empirical_unconditional_diversity(WeightTable(model, n + 1), n, reps, RandomStream(seed), n_jobs=n_jobs)
    statistic = ks_statistic(sample, tabulate_unconditional(model))
    return result("mc.unconditional_limit", ks_tolerance, statistic, statistic < ks_tolerance)


def check_worker_invariance(seed=2024):
    table = WeightTable(PoissonDirichlet(0.5, 1.0), 200)
    state = ConditioningState(10, 3)
    one = empirical_diversity(table, state, 100, 3000, RandomStream(seed), n_jobs=1).values
    two = empirical_diversity(table, state, 100, 3000, RandomStream(seed), n_jobs=2).values
    identical = bool(np.array_equal(one, two))
    return result("mc.worker_invariance", True, identical, identical)


def mc_suite(config):
    tol = config.tol
    jobs = config.jobs
    return [
        run_check("mc.block_count_law", CHI_SQUARE_P, lambda: check_block_count_law(seed=config.seed)),
        run_check("mc.chain_vs_rejection", CHI_SQUARE_P, lambda: check_chain_vs_rejection(seed=config.seed)),
        run_check("mc.chain_enumeration", 3.0, lambda: check_chain_enumeration(seed=config.seed)),
        run_check("mc.conditional_limit", tol["ks"],
                  lambda: check_conditional_limit(tol["ks"], seed=config.seed, n_jobs=jobs)),
        run_check("mc.unconditional_limit", tol["ks"],
                  lambda: check_unconditional_limit(tol["ks"], seed=config.seed, n_jobs=jobs)),
        run_check("mc.worker_invariance", True, lambda: check_worker_invariance(seed=config.seed)),
    ]


SUITES = {
    "stable": stable_suite,
    "weights": weights_suite,
    "diversity": diversity_suite,
    "mc": mc_suite,
}


def run_suite(name, config):
    """
    Прогон набора (или всех наборов) проверок

    Returns:
        dict: suite, checks, passed, failed
    """
    names = list(SUITES) if name == "all" else [name]
    checks = []
    for suite in names:
        logger.info("🔍 набор %s", suite)
        checks.extend(SUITES[suite](config))
    failed = [c["name"] for c in checks if not c["passed"]]
    return {
        "suite": name,
        "tolerances": dict(config.tol),
        "checks": checks,
        "passed": not failed,
        "failed": failed,
    }
