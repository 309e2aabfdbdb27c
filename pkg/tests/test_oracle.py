import numpy as np
import pytest

from moran_wave.experiments.oracle import (
    absorption_probabilities,
    enumerate_states,
    generator_matrix,
    small_instance_oracle,
    transient_distribution,
)


class TestGenerator:
    def test_state_space(self):
        assert enumerate_states(2) == [(0, 2), (1, 1), (2, 0)]
        assert len(enumerate_states(3)) == 10

    def test_rows_sum_to_zero(self):
        Q, _ = generator_matrix(3, 0.5)
        assert np.allclose(Q.sum(axis=1), 0.0)

    def test_two_individual_rates(self):
        Q, states = generator_matrix(2, 1.0)
        i = states.index((1, 1))
        assert Q[i, states.index((0, 2))] == pytest.approx(1.0)
        assert Q[i, states.index((2, 0))] == pytest.approx(0.5)

    def test_absorption(self):
        Q, states = generator_matrix(2, 1.0)
        probs = absorption_probabilities(Q, states, (1, 1))
        assert probs[1] == pytest.approx(2.0 / 3.0)
        assert probs[0] == pytest.approx(1.0 / 3.0)

    def test_transient_distribution(self):
        Q, states = generator_matrix(3, 0.5)
        p0 = np.zeros(len(states))
        p0[states.index((1, 1, 1))] = 1.0
        assert np.array_equal(transient_distribution(Q, p0, 0.0), p0)
        p = transient_distribution(Q, p0, 2.0)
        assert p.sum() == pytest.approx(1.0)
        assert np.all(p >= -1e-15)


class TestOracle:
    def test_two_individuals(self):
        report = small_instance_oracle(2, t=1.0, replicates=20_000, s=1.0, seed=1)
        assert report.tv_distance <= 0.03
        assert sum(report.exact) == pytest.approx(1.0)

    def test_fixation_probability(self):
        report = small_instance_oracle(2, t=50.0, replicates=20_000, s=1.0, seed=2)
        p_hat = report.absorption["empirical_fixed_top_by_t"]
        se = report.absorption["empirical_fixed_top_stderr"]
        assert abs(p_hat - 2.0 / 3.0) <= 4 * se
        assert report.absorption["exact_fix_top"] == pytest.approx(2.0 / 3.0)

    @pytest.mark.slow
    def test_three_individuals(self):
        report = small_instance_oracle(3, t=2.0, replicates=50_000, s=0.5, seed=3)
        assert report.tv_distance <= 0.02

    def test_unsupported_size(self):
        with pytest.raises(ValueError):
            small_instance_oracle(4, t=1.0, replicates=10)
