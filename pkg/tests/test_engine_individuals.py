import math

import numpy as np
import pytest
from scipy import stats

from moran_wave.engine import kernels
from moran_wave.engine.classes import ClassLevelEngine
from moran_wave.engine.individuals import (
    IndividualLevelEngine,
    run_coupled,
    simulate_coupled,
    simulate_individuals,
)
from moran_wave.engine.rng import make_generator
from moran_wave.errors import ConfigError
from moran_wave.population import IndividualState, Population
from tests.conftest import sim_config


def coupled_start(pop_size: int) -> IndividualState:
    return IndividualState.from_population(Population.point_mass(pop_size), coupled=True)


class TestIndividualLevelEngine:
    def test_runs_and_conserves_size(self):
        cfg = sim_config(pop_size=50, mu=0.05, q=0.3, s=0.05, horizon=30.0, mode="individual_level")
        records = simulate_individuals(cfg, IndividualState.from_population(Population.point_mass(50)))
        assert len(records) == 31
        selected, neutral, final = IndividualLevelEngine(cfg).run(
            IndividualState.from_population(Population.point_mass(50))
        )
        assert neutral is None
        assert final.pop_size == 50
        assert selected.final.total == 50

    def test_deterministic(self):
        cfg = sim_config(pop_size=30, horizon=20.0, mode="individual_level", seed=9)
        start = IndividualState.from_population(Population.point_mass(30))
        a, _, _ = IndividualLevelEngine(cfg).run(start)
        b, _, _ = IndividualLevelEngine(cfg).run(start)
        assert np.array_equal(a.table, b.table, equal_nan=True)

    def test_mean_drift_matches_class_engine_without_selection(self):
        # s = 0: E[m(t)] = mu (2q - 1) t for both engines
        replicates = 400
        horizon = 10.0
        expected = 0.1 * horizon
        for mode in ("class_level", "individual_level"):
            cfg = sim_config(pop_size=10, mu=0.1, q=1.0, s=0.0, horizon=horizon, mode=mode)
            rng = make_generator(123, replicate=0 if mode == "class_level" else 1)
            finals = []
            for _ in range(replicates):
                if mode == "class_level":
                    run = ClassLevelEngine(cfg).run(Population.point_mass(10), rng=rng)
                else:
                    run, _, _ = IndividualLevelEngine(cfg).run(
                        IndividualState.from_population(Population.point_mass(10)), rng=rng
                    )
                finals.append(run.records[-1].mean_fitness)
            finals = np.array(finals)
            se = finals.std(ddof=1) / math.sqrt(replicates)
            assert abs(finals.mean() - expected) <= 4 * se

    def test_two_individuals_coalesce_at_rate_one(self):
        # ordered pairs (1, 2) and (2, 1) each fire at rate 1/N = 1/2
        dt, horizon, replicates = 2.0**-7, 8.0, 4000
        cfg = sim_config(pop_size=2, mu=0.0, q=0.5, s=0.0, horizon=horizon, record_interval=dt, mode="individual_level")
        rng = make_generator(31)
        engine = IndividualLevelEngine(cfg)
        times = []
        for _ in range(replicates):
            run, _, _ = engine.run(IndividualState(x=np.array([0, 1])), rng=rng)
            merged = np.flatnonzero(run.table[:, kernels.COL_KW] == 0)
            times.append(run.table[merged[0], kernels.COL_TIME] - dt / 2 if merged.size else horizon)
        times = np.array(times)
        se = times.std(ddof=1) / math.sqrt(replicates)
        assert abs(times.mean() - 1.0) <= 3 * se

    @pytest.mark.slow
    def test_mean_fitness_law_matches_class_engine_with_selection(self):
        replicates = 4000
        finals = {}
        for offset, mode in enumerate(("class_level", "individual_level")):
            cfg = sim_config(pop_size=50, mu=0.01, q=0.5, s=0.01, horizon=50.0, record_interval=50.0, mode=mode)
            rng = make_generator(77, replicate=offset)
            values = []
            for _ in range(replicates):
                if mode == "class_level":
                    run = ClassLevelEngine(cfg).run(Population.point_mass(50), rng=rng)
                else:
                    run, _, _ = IndividualLevelEngine(cfg).run(
                        IndividualState.from_population(Population.point_mass(50)), rng=rng
                    )
                values.append(run.records[-1].mean_fitness)
            finals[mode] = np.array(values)
        result = stats.ks_2samp(finals["class_level"], finals["individual_level"])
        assert result.pvalue > 0.01

    def test_wrong_mode_rejected(self):
        with pytest.raises(ConfigError):
            IndividualLevelEngine(sim_config(mode="class_level"))


class TestCoupledNeutral:
    @pytest.mark.parametrize("seed", range(5))
    def test_shadow_never_exceeds_selected(self, seed):
        cfg = sim_config(pop_size=100, mu=0.01, q=0.5, s=0.05, horizon=200.0, seed=seed, mode="coupled_neutral")
        run = run_coupled(cfg, coupled_start(100))
        assert np.all(run.final_state.y <= run.final_state.x)
        for x_rec, y_rec in run.record_pairs:
            assert y_rec.mean_fitness <= x_rec.mean_fitness + 1e-12
            assert y_rec.max_class <= x_rec.max_class

    def test_zero_selection_keeps_processes_identical(self):
        cfg = sim_config(pop_size=60, mu=0.05, q=0.5, s=0.0, horizon=50.0, mode="coupled_neutral")
        run = run_coupled(cfg, coupled_start(60))
        assert np.array_equal(run.final_state.x, run.final_state.y)
        assert np.array_equal(run.selected.table, run.neutral.table, equal_nan=True)

    def test_shadow_drifts_at_neutral_rate(self):
        pop_size, mu, q, horizon, replicates = 50, 0.1, 0.8, 50.0, 300
        cfg = sim_config(pop_size=pop_size, mu=mu, q=q, s=0.05, horizon=horizon, record_interval=horizon, mode="coupled_neutral")
        rng = make_generator(5)
        finals = np.array(
            [run_coupled(cfg, coupled_start(pop_size), rng=rng).neutral.records[-1].mean_fitness for _ in range(replicates)]
        )
        se = finals.std(ddof=1) / math.sqrt(replicates)
        assert abs(finals.mean() - mu * (2 * q - 1) * horizon) <= 3 * se

    def test_record_pairs(self):
        cfg = sim_config(pop_size=20, horizon=5.0, mode="coupled_neutral")
        pairs = simulate_coupled(cfg, coupled_start(20))
        assert len(pairs) == 6
        assert all(x.time == y.time for x, y in pairs)

    def test_must_start_from_equal_vectors(self):
        cfg = sim_config(pop_size=3, horizon=5.0, mode="coupled_neutral")
        start = IndividualState(x=np.array([1, 1, 1]), y=np.array([0, 1, 1]))
        with pytest.raises(ConfigError):
            run_coupled(cfg, start)

    def test_requires_coupled_mode(self):
        with pytest.raises(ConfigError):
            run_coupled(sim_config(mode="individual_level"), coupled_start(100))
