# tests/test_mc_sim.py

import math

import numpy as np
import pytest

from diversity import ConditioningState, pd_expected_new_blocks, sample_conditional, tabulate_pd_conditional
from gibbs_weights import GeneralizedGamma, PoissonDirichlet, WeightTable, build_weight_table
from mc_sim import (
    DiversitySample,
    PartitionState,
    block_count_goodness,
    chain_vs_rejection,
    chi_square_equivalence,
    conditional_block_chain,
    empirical_diversity,
    empirical_moments,
    empirical_unconditional_diversity,
    enumerate_new_block_paths,
    finite_m_mean,
    grow_partition,
    ks_statistic,
    new_block_counts,
    new_block_distribution,
)
from stable_core import DomainError, RandomStream, TableRangeError, VerificationFailure

STATE = ConditioningState(10, 3)


@pytest.fixture(scope="module")
def pd_table():
    return WeightTable(PoissonDirichlet(0.5, 1.0), 200)


@pytest.fixture(scope="module")
def gg_table():
    return build_weight_table(GeneralizedGamma(0.5, 1.0), 24, method="integral")


class TestChain:
    def test_zero_extra_elements(self, pd_table):
        sample = empirical_diversity(pd_table, STATE, 0, 5, RandomStream(1))
        assert np.array_equal(sample.values, np.zeros(5))

    def test_same_seed_same_values(self, pd_table):
        first = empirical_diversity(pd_table, STATE, 50, 300, RandomStream(3))
        second = empirical_diversity(pd_table, STATE, 50, 300, RandomStream(3))
        assert np.array_equal(first.values, second.values)

    def test_different_seed_differs(self, pd_table):
        first = new_block_counts(pd_table, STATE, 50, 300, RandomStream(3))
        second = new_block_counts(pd_table, STATE, 50, 300, RandomStream(4))
        assert not np.array_equal(first, second)

    def test_worker_count_invariance(self, pd_table):
        serial = new_block_counts(pd_table, STATE, 40, 450, RandomStream(9), n_jobs=1, block=100)
        parallel = new_block_counts(pd_table, STATE, 40, 450, RandomStream(9), n_jobs=2, block=100)
        assert np.array_equal(serial, parallel)

    def test_counts_in_range(self, pd_table):
        counts = new_block_counts(pd_table, STATE, 30, 200, RandomStream(2))
        assert counts.min() >= 0 and counts.max() <= 30

    def test_single_chain(self, pd_table):
        value = conditional_block_chain(pd_table, STATE, 20, RandomStream(6))
        assert isinstance(value, int) and 0 <= value <= 20

    def test_long_pd_chain(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 100_011)
        counts = new_block_counts(table, STATE, 100_000, 2, RandomStream(5))
        assert counts.min() > 0 and counts.max() <= 100_000

    def test_corrupted_table_stops_chain(self, gg_table, tmp_path):
        frame = gg_table.to_frame()
        cell = (frame["n"] == 12) & (frame["k"] == 4)
        frame.loc[cell, "V"] = f"{float(frame.loc[cell, 'V'].iloc[0]) * 1.001:.16e}"
        frame.to_csv(tmp_path / "broken.csv", index=False)
        broken = WeightTable.from_csv(tmp_path / "broken.csv", gg_table.model)
        with pytest.raises(VerificationFailure):
            new_block_counts(broken, ConditioningState(10, 3), 10, 5, RandomStream(1))

    def test_table_too_small(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 20)
        with pytest.raises(TableRangeError):
            new_block_counts(table, STATE, 15, 10, RandomStream(1))

    def test_negative_m(self, pd_table):
        with pytest.raises(DomainError):
            new_block_counts(pd_table, STATE, -1, 10, RandomStream(1))

    def test_reps_must_be_positive(self, pd_table):
        with pytest.raises(DomainError):
            new_block_counts(pd_table, STATE, 5, 0, RandomStream(1))


class TestExactLaw:
    @pytest.mark.parametrize("table_name", ["pd_table", "gg_table"])
    def test_dynamic_program_matches_enumeration(self, table_name, request):
        table = request.getfixturevalue(table_name)
        state = ConditioningState(5, 2)
        dp = new_block_distribution(table, state, 10)
        assert dp.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(dp, enumerate_new_block_paths(table, state, 10), rtol=0.0, atol=1e-12)

    @pytest.mark.parametrize("m", [1, 10, 150])
    def test_finite_mean_matches_closed_form(self, pd_table, m):
        expected = pd_expected_new_blocks(0.5, 1.0, STATE.n, STATE.k, m) / m ** 0.5
        assert finite_m_mean(pd_table, STATE, m) == pytest.approx(expected, rel=1e-9)

    def test_enumeration_limit(self, pd_table):
        with pytest.raises(DomainError):
            enumerate_new_block_paths(pd_table, STATE, 17)

    def test_chain_mean_matches_exact(self, gg_table):
        state = ConditioningState(6, 2)
        counts = new_block_counts(gg_table, state, 15, 20_000, RandomStream(12))
        law = new_block_distribution(gg_table, state, 15)
        mean = float(np.dot(np.arange(16), law))
        se = counts.std(ddof=1) / math.sqrt(counts.size)
        assert abs(counts.mean() - mean) < 4.0 * se


class TestPartitions:
    def test_state_validation(self):
        with pytest.raises(DomainError):
            PartitionState(4, [2, 1])
        with pytest.raises(DomainError):
            PartitionState(2, [2, 0])

    def test_add(self):
        state = PartitionState(3, [2, 1])
        state.add(2)
        state.add(0)
        assert state.to_dict() == {"n": 5, "k": 3, "block_sizes": [3, 1, 1]}
        assert state.composition().parts == (3, 1, 1)

    def test_grow_partition(self, pd_table):
        partition = grow_partition(pd_table, 30, RandomStream(4))
        assert partition.n == 30
        assert sum(partition.block_sizes) == 30

    def test_grow_partition_range(self):
        with pytest.raises(TableRangeError):
            grow_partition(WeightTable(PoissonDirichlet(0.5, 1.0), 10), 10, RandomStream(1))

    def test_block_count_law(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 9)
        result = block_count_goodness(table, 8, 3000, RandomStream(31))
        assert result["p_value"] > 1e-3
        assert sum(result["expected"]) == pytest.approx(1.0, abs=1e-10)

    def test_chain_matches_rejection(self):
        table = WeightTable(PoissonDirichlet(0.5, 1.0), 12)
        result = chain_vs_rejection(table, ConditioningState(4, 2), 5, 2000, RandomStream(77))
        assert result["p_value"] > 1e-3


class TestGoodness:
    def test_chi_square_identical(self):
        result = chi_square_equivalence([0, 1, 1, 2, 2, 2], [0, 1, 1, 2, 2, 2])
        assert result["statistic"] == pytest.approx(0.0)
        assert result["p_value"] == pytest.approx(1.0)

    def test_chi_square_single_value(self):
        assert chi_square_equivalence([3, 3], [3, 3, 3])["dof"] == 0

    def test_empirical_moments(self):
        moments = empirical_moments(np.array([1.0, 2.0, 3.0]), 2)
        assert moments[1] == pytest.approx(2.0)
        assert moments[2] == pytest.approx(14.0 / 3.0)
        assert moments.standard_errors[1] == pytest.approx(1.0 / math.sqrt(3.0))

    def test_empirical_moment_order(self):
        with pytest.raises(DomainError):
            empirical_moments(np.ones(5), 7)

    def test_ks_against_grid(self):
        grid = tabulate_pd_conditional(0.5, 1.0, STATE)
        values = sample_conditional(PoissonDirichlet(0.5, 1.0), STATE, 20_000, RandomStream(41))
        assert ks_statistic(values, grid) < 0.02

    def test_ks_detects_wrong_theta(self):
        grid = tabulate_pd_conditional(0.5, 1.0, STATE)
        values = sample_conditional(PoissonDirichlet(0.5, 3.0), STATE, 5000, RandomStream(43))
        assert ks_statistic(values, grid) > 0.1

    def test_ks_requires_coverage(self):
        grid = tabulate_pd_conditional(0.5, 1.0, STATE)
        with pytest.raises(TableRangeError):
            ks_statistic(np.full(10, grid.grid[-1] * 10.0), grid)


class TestDiversitySample:
    def test_unconditional_single_element(self, pd_table):
        sample = empirical_unconditional_diversity(pd_table, 1, 4, RandomStream(1))
        assert np.array_equal(sample.values, np.ones(4))
        assert sample.statistic == "total_blocks"

    def test_outputs(self, pd_table, tmp_path):
        sample = empirical_diversity(pd_table, STATE, 10, 20, RandomStream(8))
        csv_path = sample.to_csv(tmp_path / "sample.csv")
        json_path = sample.write_metadata(tmp_path / "sample.json")
        assert csv_path.read_text().splitlines()[0] == "rep,value"
        meta = sample.metadata()
        assert meta["seed"] == {"seed": 8, "stream_id": 0, "path": []}
        assert (meta["n"], meta["k"], meta["m"], meta["reps"]) == (10, 3, 10, 20)
        assert json_path.exists()

    def test_rejects_negative_values(self):
        with pytest.raises(DomainError):
            DiversitySample({}, 1, 1, 1, np.array([-1.0]), {})
