# tests/test_gibbs_weights.py

import math

import numpy as np
import pytest

import gibbs_weights.models as models_module
import gibbs_weights.table as table_module
from gibbs_weights import (
    Composition,
    GeneralizedGamma,
    PoissonDirichlet,
    TabulatedTilt,
    WeightTable,
    block_count_distribution,
    build_weight_table,
    eppf,
    eppf_total,
    generic_weight,
    gg_weight_integral,
    gg_weight_sum,
    incomplete_gamma_upper,
    iter_set_partitions,
    log_weight,
    mass_balance,
    pd_weight,
    predict_probs,
    stirling_table,
    tilt_mass,
)
from stable_core import DomainError, NumericError, PrecisionError, RandomStream, TableRangeError, VerificationFailure


class TestModels:
    def test_pd_domain(self):
        with pytest.raises(DomainError):
            PoissonDirichlet(0.5, -0.5)

    def test_pd_tilt_value(self):
        assert PoissonDirichlet(0.5, 1.0).tilt(1.0) == pytest.approx(0.5)

    def test_gg_domain(self):
        with pytest.raises(DomainError):
            GeneralizedGamma(0.5, 0.0)

    def test_gg_tilt_in_diversity_coordinates(self):
        model = GeneralizedGamma(0.5, 2.0)
        s = 0.7
        assert model.log_tilt_at_diversity(s) == pytest.approx(2.0 - (2.0 / s) ** 2)
        assert model.log_tilt_at_diversity(s) == pytest.approx(model.log_tilt(s ** -2.0))

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0), GeneralizedGamma(0.3, 2.0)])
    def test_mixing_density_is_normalized(self, model):
        assert tilt_mass(model) == pytest.approx(1.0, abs=1e-7)

    def test_composition(self):
        comp = Composition((2, 1))
        assert (comp.n, comp.k) == (3, 2)
        with pytest.raises(DomainError):
            Composition((2, 0))


class TestTabulatedTilt:
    def test_from_model_reproduces_gg(self):
        gg = GeneralizedGamma(0.5, 1.0)
        t = np.geomspace(1e-3, 60.0, 4000)
        tabulated = TabulatedTilt.from_model(gg, t, lower_tail="constant", upper_tail="zero")
        assert tabulated.normalization == pytest.approx(1.0, abs=1e-6)
        assert tabulated.tilt(0.5) == pytest.approx(gg.tilt(0.5), rel=1e-5)

    def test_from_csv(self, tmp_path):
        gg = GeneralizedGamma(0.5, 1.0)
        t = np.geomspace(1e-3, 60.0, 4000)
        path = tmp_path / "tilt.csv"
        path.write_text("t,h\n" + "\n".join(f"{x!r},{gg.tilt(float(x))!r}" for x in t))
        model = TabulatedTilt.from_csv(path, 0.5)
        assert model.describe()["points"] == 4000

    def test_unnormalized_table_rejected(self):
        t = np.geomspace(1e-3, 60.0, 50)
        with pytest.raises(DomainError):
            TabulatedTilt(0.5, t, np.full(t.size, 2.0), upper_tail="constant")

    def test_bad_policy_rejected(self):
        t = np.geomspace(1e-3, 60.0, 50)
        with pytest.raises(DomainError):
            TabulatedTilt(0.5, t, np.ones(t.size), upper_tail="linear", check=False)


class TestSpecialFunctions:
    def test_negative_order(self):
        assert incomplete_gamma_upper(0, 1) == pytest.approx(0.219383934, rel=1e-8)
        assert incomplete_gamma_upper(-1, 1) == pytest.approx(0.148495507, rel=1e-8)

    def test_positive_order(self):
        assert incomplete_gamma_upper(1, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)


class TestWeights:
    def test_pd_closed_form(self):
        assert pd_weight(0.5, 0.5, 2, 1) == pytest.approx(2.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)])
    def test_unit_corner(self, model):
        value, _ = log_weight(model, 1, 1)
        assert math.exp(value) == pytest.approx(1.0, abs=1e-9)

    def test_gg_known_value(self):
        assert gg_weight_integral(0.5, 1.0, 2, 1) == pytest.approx(0.59635, abs=1e-5)

    @pytest.mark.parametrize("alpha,beta", [(0.5, 1.0), (0.3, 2.0), (0.8, 0.5)])
    def test_gg_sum_matches_integral(self, alpha, beta):
        for n in range(1, 9):
            for k in range(1, n + 1):
                try:
                    by_sum = gg_weight_sum(alpha, beta, n, k)
                except PrecisionError:
                    continue
                assert by_sum == pytest.approx(gg_weight_integral(alpha, beta, n, k), rel=1e-6)

    @pytest.mark.parametrize("n", [10, 25, 40])
    def test_auto_falls_back_consistently(self, n):
        model = GeneralizedGamma(0.5, 0.1)
        for k in (1, 2, 3):
            value, tag = log_weight(model, n, k)
            assert tag in ("sum", "quadrature")
            assert math.exp(value) == pytest.approx(gg_weight_integral(0.5, 0.1, n, k), rel=1e-5)

    def test_generic_matches_closed_form(self):
        model = PoissonDirichlet(0.5, 1.0)
        value, tag = log_weight(model, 6, 2, method="generic")
        assert tag == "quadrature"
        assert math.exp(value) == pytest.approx(pd_weight(0.5, 1.0, 6, 2), rel=1e-6)

    def test_generic_weight_for_generalized_gamma(self):
        assert generic_weight(GeneralizedGamma(0.5, 1.0), 5, 2) == pytest.approx(
            gg_weight_integral(0.5, 1.0, 5, 2), rel=1e-5
        )

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            log_weight(PoissonDirichlet(0.5, 1.0), 2, 1, method="magic")


class TestWeightTable:
    def test_pd_residuals(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 51)
        worst, _ = table.max_residual(50)
        assert worst < 1e-10

    def test_gg_residuals(self):
        table = build_weight_table(GeneralizedGamma(0.5, 1.0), 13, method="integral")
        assert table.check_residuals(1e-8) < 1e-8
        assert table.v(1, 1) == pytest.approx(1.0, abs=1e-9)

    def test_method_tags(self):
        table = build_weight_table(GeneralizedGamma(0.5, 1.0), 6)
        assert {table.method(n, k) for n in range(1, 7) for k in range(1, n + 1)} <= {"sum", "quadrature"}
        assert WeightTable(PoissonDirichlet(0.5, 1.0), 5).method(3, 2) == "closed"

    def test_pd_mass_balance_at_large_n(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 300_001)
        imbalance = table.mass_balance_array([200_000, 250_000, 299_000], [500, 400, 700])
        assert imbalance.max() < 1e-14

    def test_out_of_range(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 5)
        with pytest.raises(TableRangeError):
            table.v(6, 1)
        with pytest.raises(TableRangeError):
            predict_probs(table, 5, 2)

    def test_closed_table_requires_pd(self):
        with pytest.raises(DomainError):
            WeightTable(GeneralizedGamma(0.5, 1.0), 5)

    def test_residual_failure_is_reported(self):
        model = GeneralizedGamma(0.5, 1.0)
        good = build_weight_table(model, 6)
        log_v = np.array(good._log_v)
        log_v[3, 2] += 1e-3
        broken = WeightTable(model, 6, log_v, good._methods)
        with pytest.raises(VerificationFailure):
            broken.check_residuals(1e-8)

    def test_csv_round_trip(self, tmp_path):
        model = GeneralizedGamma(0.5, 1.0)
        table = build_weight_table(model, 8)
        path = table.to_csv(tmp_path / "weights.csv")
        loaded = WeightTable.from_csv(path, model)
        assert loaded.v(7, 3) == pytest.approx(table.v(7, 3), rel=1e-15)
        assert loaded.method(7, 3) == table.method(7, 3)

    def test_disk_cache(self, tmp_path):
        model = GeneralizedGamma(0.5, 1.0)
        first = build_weight_table(model, 6, cache_dir=tmp_path)
        assert list(tmp_path.glob("*.csv"))
        second = build_weight_table(model, 6, cache_dir=tmp_path)
        assert second.v(5, 2) == pytest.approx(first.v(5, 2), rel=1e-15)

    def test_large_gg_table_uses_recursion(self):
        table = build_weight_table(GeneralizedGamma(0.5, 1.0), 70)
        assert table.recursion_anchor() == 70
        assert table.method(10, 3) == "quadrature"
        assert set(table.to_frame()["method"]) <= {"closed", "sum", "quadrature"}
        assert table.v(1, 1) == pytest.approx(1.0, abs=1e-8)

    def test_small_tables_have_no_anchor(self):
        assert build_weight_table(GeneralizedGamma(0.5, 1.0), 6).recursion_anchor() is None
        assert WeightTable(PoissonDirichlet(0.5, 1.0), 500).recursion_anchor() is None


class TestPartitionStructure:
    def test_stirling_small(self):
        assert stirling_table(0.5, 2).value(2, 1) == pytest.approx(0.5)
        assert stirling_table(0.5, 3).value(3, 3) == pytest.approx(1.0)

    def test_bell_numbers(self):
        assert [sum(1 for _ in iter_set_partitions(n)) for n in range(1, 9)] == [1, 2, 5, 15, 52, 203, 877, 4140]

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), PoissonDirichlet(0.3, 0.0), GeneralizedGamma(0.5, 1.0)])
    def test_block_count_law_sums_to_one(self, model):
        table = build_weight_table(model, 13, method="integral")
        assert block_count_distribution(table, 12).sum() == pytest.approx(1.0, abs=1e-9)

    def test_eppf_known_value(self):
        model = PoissonDirichlet(0.5, 0.5)
        assert eppf(model, Composition((2,)), WeightTable(model, 2)) == pytest.approx(1.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)])
    def test_eppf_additivity(self, model):
        table = build_weight_table(model, 9, method="integral")
        for n in range(1, 9):
            assert eppf_total(model, table, n) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)])
    def test_eppf_permutation_invariance(self, model):
        table = build_weight_table(model, 12, method="integral")
        gen = RandomStream(3).generator
        for _ in range(20):
            parts = gen.integers(1, 4, size=int(gen.integers(1, 5)))
            value = eppf(model, Composition(tuple(parts)), table)
            shuffled = Composition(tuple(gen.permutation(parts)))
            assert eppf(model, shuffled, table) == pytest.approx(value, rel=1e-12)

    def test_eppf_requires_matching_table(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 5)
        with pytest.raises(DomainError):
            eppf(PoissonDirichlet(0.5, 1.0), Composition((2, 1)), table)

    @pytest.mark.parametrize("model", [PoissonDirichlet(0.5, 1.0), GeneralizedGamma(0.5, 1.0)])
    def test_prediction_rule_mass_balance(self, model):
        table = build_weight_table(model, 13, method="integral")
        for n in range(1, 12):
            for k in range(1, n + 1):
                assert mass_balance(table, n, k) < 1e-8


class TestMutationSensitivity:
    def test_shifted_rising_factorial_breaks_additivity(self, monkeypatch):
        model = PoissonDirichlet(0.5, 1.0)
        table = WeightTable(model, 7)
        monkeypatch.setattr(table_module, "_RISING_SHIFT", 0)
        assert abs(eppf_total(model, table, 6) - 1.0) > 1e-3

    def test_flipped_tilt_sign_breaks_normalization(self, monkeypatch):
        monkeypatch.setattr(models_module, "_TILT_SIGN", 1.0)
        try:
            gap = abs(tilt_mass(GeneralizedGamma(0.5, 1.0)) - 1.0)
        except NumericError:
            gap = math.inf
        assert not gap < 1e-3
