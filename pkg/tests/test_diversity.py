# tests/test_diversity.py

import math

import numpy as np
import pytest

from diversity import (
    ConditionalDensity,
    ConditioningState,
    GGConditionalDensity,
    MomentSequence,
    beta_mixture_check,
    chf_partial_sum,
    conditional_mass,
    conditional_pdf,
    empirical_chf,
    gg_conditional_pdf,
    grid_moments,
    gtilde_moment,
    gtilde_pdf,
    normalizer_by_quadrature,
    pd_conditional_moment,
    pd_conditional_moments,
    pd_conditional_pdf,
    ratio_law_check,
    sample_conditional,
    tabulate_for_model,
    tabulate_gtilde,
    tabulate_pd_conditional,
    tabulate_unconditional,
    unconditional_pdf,
)
from gibbs_weights import GeneralizedGamma, PoissonDirichlet
from stable_core import DomainError, RandomStream, VerificationFailure, ml_moment

STATE = ConditioningState(10, 3)


@pytest.fixture(scope="module")
def pd_grid():
    return tabulate_pd_conditional(0.5, 1.0, STATE)


class TestConditioningState:
    def test_free_mass(self):
        assert STATE.free_mass(0.5) == pytest.approx(8.5)

    @pytest.mark.parametrize("n,k", [(3, 4), (3, 0), (2.5, 1)])
    def test_rejects_bad_state(self, n, k):
        with pytest.raises(DomainError):
            ConditioningState(n, k)


class TestDensities:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_gtilde_normalized(self, alpha):
        density = ConditionalDensity(PoissonDirichlet(alpha, 0.0), STATE)
        assert density.normalizer == pytest.approx(1.0, abs=1e-10)
        assert conditional_mass(density) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("s", [0.3, 1.0, 2.5])
    def test_theta_zero_is_gtilde(self, s):
        assert conditional_pdf(PoissonDirichlet(0.5, 0.0), STATE, s) == pytest.approx(
            gtilde_pdf(0.5, STATE, s), rel=1e-12
        )

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)])
    def test_weight_normalizer_matches_quadrature(self, model):
        density = ConditionalDensity(model, STATE, method="integral")
        assert normalizer_by_quadrature(model, STATE) == pytest.approx(density.normalizer, rel=1e-6)

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.3, 2.0)])
    def test_conditional_normalized(self, model):
        assert conditional_mass(ConditionalDensity(model, STATE, method="integral")) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("z", [0.4, 1.0, 1.8, 3.0])
    def test_pd_paths_agree(self, z):
        general = ConditionalDensity(PoissonDirichlet(0.5, 1.0), STATE).pdf(z)
        assert pd_conditional_pdf(0.5, 1.0, STATE, z) == pytest.approx(general, rel=1e-6)

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_gg_paths_agree(self, s):
        general = ConditionalDensity(GeneralizedGamma(0.5, 1.0), STATE, method="integral").pdf(s)
        assert GGConditionalDensity(0.5, 1.0, STATE).pdf(s) == pytest.approx(general, rel=1e-5)

    @pytest.mark.parametrize("s", [0.4, 1.3, 3.0])
    def test_untilting_recovers_gtilde(self, s):
        model = GeneralizedGamma(0.5, 1.0)
        density = ConditionalDensity(model, STATE, method="integral")
        untilted = density.pdf(s) * density.normalizer / math.exp(model.log_tilt_at_diversity(s))
        assert untilted == pytest.approx(gtilde_pdf(0.5, STATE, s), rel=1e-9)

    @pytest.mark.parametrize("s", [0.5, 1.5])
    def test_gg_function_matches_density(self, s):
        expected = ConditionalDensity(GeneralizedGamma(0.5, 1.0), STATE, method="integral").pdf(s)
        assert gg_conditional_pdf(0.5, 1.0, STATE, s) == pytest.approx(expected, rel=1e-5)

    @pytest.mark.parametrize("s", [0.2, 1.0, 3.0])
    def test_unconditional_closed_form(self, s):
        ml = math.exp(-s * s / 4.0) / math.sqrt(math.pi)
        assert unconditional_pdf(PoissonDirichlet(0.5, 0.0), s) == pytest.approx(ml, rel=1e-6)
        assert unconditional_pdf(PoissonDirichlet(0.5, 1.0), s) == pytest.approx(s * s * ml / 2.0, rel=1e-6)

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_gg_small_beta_approaches_gtilde(self, s):
        assert gg_conditional_pdf(0.5, 1e-4, STATE, s) == pytest.approx(gtilde_pdf(0.5, STATE, s), rel=1e-3)

    def test_gg_sidecar_reports_normalizer(self):
        meta = GGConditionalDensity(0.5, 1.0, STATE).metadata()
        assert meta["normalizer_method"] in ("sum", "integral-fallback")
        assert meta["state"] == {"n": 10, "k": 3}

    def test_rejects_nonpositive_point(self):
        with pytest.raises(DomainError):
            gtilde_pdf(0.5, STATE, 0.0)


class TestMoments:
    def test_known_value(self):
        assert pd_conditional_moment(0.5, 1.0, ConditioningState(2, 1), 1) == pytest.approx(1.805411, rel=1e-6)

    def test_gtilde_is_theta_zero(self):
        assert gtilde_moment(0.4, STATE, 2) == pytest.approx(pd_conditional_moment(0.4, 0.0, STATE, 2))

    def test_log_convex(self):
        assert pd_conditional_moments(0.5, 1.0, STATE, 6).check_invariants() <= 1e-9

    def test_non_log_convex_sequence_fails(self):
        with pytest.raises(VerificationFailure):
            MomentSequence([1.0, 2.0, 3.0]).check_invariants()

    def test_zero_order_must_be_one(self):
        with pytest.raises(DomainError):
            MomentSequence([2.0, 1.0])

    def test_theta_range(self):
        with pytest.raises(DomainError):
            pd_conditional_moment(0.5, -0.5, STATE, 1)

    def test_chf_at_zero(self):
        result = chf_partial_sum(0.5, 1.0, STATE, 0.0, 10)
        assert result.value == complex(1.0, 0.0)
        assert result.truncation_bound == 0.0

    def test_chf_converges(self):
        result = chf_partial_sum(0.5, 1.0, STATE, 0.5, 40)
        assert not result.diverging
        assert result.truncation_bound < 1e-12
        assert abs(result.value) <= 1.0 + 1e-12


class TestGrids:
    def test_pd_grid_mass(self, pd_grid):
        assert pd_grid.check_mass(1e-6) < 1e-6
        assert pd_grid.is_monotone()
        assert pd_grid.metadata["normalizer_method"] == "closed"

    def test_pd_grid_moments(self, pd_grid):
        numeric = grid_moments(pd_grid, 3)
        closed = pd_conditional_moments(0.5, 1.0, STATE, 3)
        for r in range(1, 4):
            assert numeric[r] == pytest.approx(closed[r], rel=1e-4)

    def test_gtilde_grid_mean(self):
        grid = tabulate_gtilde(0.5, STATE)
        assert grid.moment(1) == pytest.approx(gtilde_moment(0.5, STATE, 1), rel=1e-4)

    def test_unconditional_grid(self):
        grid = tabulate_unconditional(PoissonDirichlet(0.5, 1.0))
        assert grid.check_mass(1e-6) < 1e-6
        assert grid.moment(1) == pytest.approx(ml_moment(0.5, 2.0, 1), rel=1e-4)

    def test_gg_grid_mass(self):
        grid = tabulate_for_model(GeneralizedGamma(0.5, 1.0), STATE)
        assert grid.check_mass(1e-6) < 1e-6
        assert grid.metadata["density"] == "gg_conditional"

    def test_explicit_points(self):
        points = np.geomspace(0.05, 20.0, 200)
        grid = tabulate_gtilde(0.5, STATE, points=points)
        assert np.array_equal(grid.grid, points)


class TestRepresentations:
    def test_beta_mixture(self):
        assert beta_mixture_check(0.5, 1.0, STATE, 5) < 1e-10

    @pytest.mark.parametrize("alpha,theta,n,k", [(0.3, 0.0, 5, 2), (0.8, 2.0, 20, 7)])
    def test_beta_mixture_other_parameters(self, alpha, theta, n, k):
        assert beta_mixture_check(alpha, theta, ConditioningState(n, k), 8) < 1e-10

    def test_beta_mixture_order_range(self):
        with pytest.raises(DomainError):
            beta_mixture_check(0.5, 1.0, STATE, 11)

    def test_ratio_law(self):
        assert ratio_law_check(0.5, STATE, 10_000, RandomStream(2024)) < 0.035

    def test_ratio_law_requires_draws(self):
        with pytest.raises(DomainError):
            ratio_law_check(0.5, STATE, 100, RandomStream(1))


class TestSampling:
    def test_pd_exact_sampler_mean(self):
        values = sample_conditional(PoissonDirichlet(0.5, 1.0), STATE, 100_000, RandomStream(17))
        se = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean() - pd_conditional_moment(0.5, 1.0, STATE, 1)) < 4.0 * se

    def test_grid_sampler_mean(self, pd_grid):
        values = sample_conditional(PoissonDirichlet(0.5, 1.0), STATE, 100_000, RandomStream(5), grid=pd_grid)
        se = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean() - pd_grid.moment(1)) < 4.0 * se

    def test_empirical_chf_matches_series(self):
        values = sample_conditional(PoissonDirichlet(0.5, 1.0), STATE, 100_000, RandomStream(8))
        estimate, se = empirical_chf(values, 0.5)
        series = chf_partial_sum(0.5, 1.0, STATE, 0.5, 40).value
        assert abs(estimate - series) < 5.0 * se

    def test_rejects_empty_sample(self):
        with pytest.raises(DomainError):
            sample_conditional(PoissonDirichlet(0.5, 1.0), STATE, 0, RandomStream(1))
