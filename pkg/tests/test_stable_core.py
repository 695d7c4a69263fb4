# tests/test_stable_core.py

import math

import numpy as np
import pytest
from scipy.special import erfc, gamma

from stable_core import (
    Alpha,
    DensityGrid,
    DomainError,
    RandomStream,
    StableConvention,
    VerificationFailure,
    ml_moment,
    ml_pdf,
    sample_stable,
    sample_tilted_ml,
    sample_tilted_stable,
    stable_cdf,
    stable_pdf,
    stable_table,
    tilted_ml_pdf,
    tilted_stable_pdf,
)
from stable_core.kernels import beta_kernel
from stable_core.quadrature import integrate_log_scale


def levy_pdf(t):
    return t ** -1.5 * math.exp(-1.0 / (4.0 * t)) / (2.0 * math.sqrt(math.pi))


class TestParameters:
    @pytest.mark.parametrize("value", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_alpha_rejects_outside_open_interval(self, value):
        with pytest.raises(DomainError):
            Alpha(value)

    def test_alpha_of_passes_through(self):
        a = Alpha(0.3)
        assert Alpha.of(a) is a
        assert Alpha.of(0.3).value == 0.3

    def test_convention_rate(self):
        assert StableConvention().gg_rate(0.5, 2.0) == pytest.approx(4.0)
        assert StableConvention(2.0).gg_rate(0.5, 2.0) == pytest.approx(2.0)
        assert StableConvention(2.0).standard_rate(0.5, 2.0) == pytest.approx(4.0)

    def test_convention_rejects_bad_scale(self):
        with pytest.raises(DomainError):
            StableConvention(0.0)


class TestStableDensity:
    @pytest.mark.parametrize("t", [1e-3, 0.05, 0.3, 1.0, 7.0, 150.0, 1e3])
    def test_half_matches_levy(self, t):
        assert stable_pdf(0.5, t) == pytest.approx(levy_pdf(t), rel=1e-8)

    @pytest.mark.parametrize("s", [0.01, 0.5, 1.0, 3.0, 8.0])
    def test_ml_half_is_half_normal(self, s):
        assert ml_pdf(0.5, s) == pytest.approx(math.exp(-s * s / 4.0) / math.sqrt(math.pi), rel=1e-8)

    def test_scaled_convention(self):
        assert stable_pdf(0.5, 2.0, StableConvention(2.0)) == pytest.approx(levy_pdf(1.0) / 2.0, rel=1e-10)

    def test_far_tail_first_order(self):
        alpha, t = 0.3, 1e6
        first = alpha / gamma(1.0 - alpha) * t ** (-1.0 - alpha)
        assert stable_pdf(alpha, t) == pytest.approx(first, rel=0.02)

    def test_moderate_tail_two_terms(self):
        alpha, t = 0.3, 100.0
        two_terms = (
            gamma(1.0 + alpha) * math.sin(math.pi * alpha) * t ** (-1.0 - alpha)
            - gamma(1.0 + 2.0 * alpha) / 2.0 * math.sin(2.0 * math.pi * alpha) * t ** (-1.0 - 2.0 * alpha)
        ) / math.pi
        assert stable_pdf(alpha, t) == pytest.approx(two_terms, rel=0.02)

    @pytest.mark.parametrize("t", [0.05, 0.5, 2.0, 40.0])
    def test_cdf_half(self, t):
        assert stable_cdf(0.5, t) == pytest.approx(erfc(0.5 / math.sqrt(t)), abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    def test_table_agrees_with_direct(self, alpha):
        table = stable_table(alpha)
        for t in np.geomspace(table.t_lo * 10.0, table.t_hi * 10.0, 25):
            direct = stable_pdf(alpha, float(t))
            if direct > 1e-250:
                assert table.pdf_scalar(float(t)) == pytest.approx(direct, rel=1e-6)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf])
    def test_rejects_nonpositive_point(self, bad):
        with pytest.raises(DomainError):
            stable_pdf(0.5, bad)


class TestNormalization:
    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    def test_ml_integrates_to_one(self, alpha):
        mass, _ = integrate_log_scale(lambda s: ml_pdf(alpha, s), epsabs=1e-12, epsrel=1e-10)
        assert mass == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("k", [1, 2.5, 6])
    def test_tilted_ml_integrates_to_one(self, k):
        mass, _ = integrate_log_scale(
            lambda y: tilted_ml_pdf(0.6, k, y), split=math.log(ml_moment(0.6, k, 1)),
            epsabs=1e-12, epsrel=1e-10,
        )
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_tilted_stable_integrates_to_one(self):
        mass, _ = integrate_log_scale(lambda t: tilted_stable_pdf(0.5, 3, t), epsabs=1e-12, epsrel=1e-10)
        assert mass == pytest.approx(1.0, abs=1e-8)


class TestMoments:
    def test_known_value(self):
        assert ml_moment(0.5, 1, 2) == pytest.approx(4.0, rel=1e-12)

    def test_zero_order_moment_is_one(self):
        assert ml_moment(0.4, 3.7, 0) == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha,k,r", [(0.3, 0, 1.0), (0.5, 3, 2.0), (0.7, 1.5, 1.5)])
    def test_against_quadrature(self, alpha, k, r):
        numeric, _ = integrate_log_scale(
            lambda y: y ** r * tilted_ml_pdf(alpha, k, y), split=math.log(ml_moment(alpha, k, 1)),
            epsabs=1e-12, epsrel=1e-10,
        )
        assert numeric == pytest.approx(ml_moment(alpha, k, r), rel=1e-6)

    def test_negative_order_rejected(self):
        with pytest.raises(DomainError):
            ml_moment(0.5, 1, -1)


class TestKernel:
    def test_tends_to_one(self):
        assert beta_kernel(0.5, 2.0, 1e8) == pytest.approx(1.0, abs=1e-3)

    def test_zero_exponent_is_cdf(self):
        assert beta_kernel(0.5, 0.0, 3.0) == pytest.approx(stable_cdf(0.5, 3.0), rel=1e-7)

    def test_rejects_exponent_below_minus_one(self):
        with pytest.raises(DomainError):
            beta_kernel(0.5, -1.0, 1.0)


class TestRandomStream:
    def test_reproducible(self):
        a = RandomStream(42).generator.random(5)
        b = RandomStream(42).generator.random(5)
        assert np.array_equal(a, b)

    def test_substreams_are_distinct(self):
        root = RandomStream(42)
        assert not np.array_equal(root.substream(0).generator.random(5), root.substream(1).generator.random(5))

    def test_metadata(self):
        assert RandomStream(7, 2).substream(3).metadata() == {"seed": 7, "stream_id": 2, "path": [3]}

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(DomainError):
            RandomStream(seed)


class TestSamplers:
    def test_stable_sampler_mean_of_ml(self):
        draws = 200_000
        values = sample_stable(0.5, RandomStream(11), size=draws) ** -0.5
        se = values.std(ddof=1) / math.sqrt(draws)
        assert abs(values.mean() - ml_moment(0.5, 0, 1)) < 4.0 * se

    def test_stable_sampler_scalar(self):
        assert isinstance(sample_stable(0.5, RandomStream(1)), float)

    @pytest.mark.parametrize("k", [1, 3])
    def test_tilted_stable_matches_ml_moment(self, k):
        draws = 200_000
        values = sample_tilted_stable(0.5, k, RandomStream(5), size=draws) ** -0.5
        se = values.std(ddof=1) / math.sqrt(draws)
        assert abs(values.mean() - ml_moment(0.5, k, 1)) < 4.0 * se

    def test_tilted_ml_moments(self):
        draws = 200_000
        values = sample_tilted_ml(0.5, 2, RandomStream(9), size=draws)
        se = values.std(ddof=1) / math.sqrt(draws)
        assert abs(values.mean() - ml_moment(0.5, 2, 1)) < 4.0 * se

    def test_tilted_stable_rejects_negative_order(self):
        with pytest.raises(DomainError):
            sample_tilted_stable(0.5, -1, RandomStream(1), size=3)


class TestDensityGrid:
    @pytest.fixture
    def half_normal(self):
        return DensityGrid.tabulate(lambda s: math.exp(-s * s / 4.0) / math.sqrt(math.pi), 1e-3, 20.0)

    def test_mass_and_monotone(self, half_normal):
        assert half_normal.check_mass(1e-6) < 1e-6
        assert half_normal.is_monotone()
        assert half_normal.trapezoid_residual() < 1e-12

    def test_median(self, half_normal):
        assert float(half_normal.quantile(0.5)) == pytest.approx(math.sqrt(2.0) * 0.6744897501960817, rel=1e-3)

    def test_moment(self, half_normal):
        assert half_normal.moment(2) == pytest.approx(2.0, rel=1e-5)

    def test_cdf_outside_grid(self, half_normal):
        assert float(half_normal.cdf_at(half_normal.grid[0] / 2.0)) == 0.0
        assert float(half_normal.cdf_at(half_normal.grid[-1] * 2.0)) == half_normal.total_mass

    def test_mass_failure(self):
        grid = DensityGrid.from_values([1.0, 2.0, 3.0], [0.1, 0.1, 0.1])
        with pytest.raises(VerificationFailure):
            grid.check_mass(1e-6)

    def test_rejects_unsorted_grid(self):
        with pytest.raises(DomainError):
            DensityGrid.from_values([1.0, 3.0, 2.0], [0.1, 0.1, 0.1])

    def test_csv_round_trip(self, tmp_path, half_normal):
        path = half_normal.to_csv(tmp_path / "grid.csv")
        loaded = DensityGrid.from_csv(path)
        assert np.allclose(loaded.grid, half_normal.grid, rtol=1e-15)
        assert np.allclose(loaded.cdf, half_normal.cdf, rtol=1e-15, atol=0.0)
