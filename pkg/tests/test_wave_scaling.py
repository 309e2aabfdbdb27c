"""
Long runs at the scale of the published sweeps; all marked slow
"""

import math
import os

import pytest

from moran_wave.engine.classes import ClassLevelEngine
from moran_wave.experiments.estimation import log_growth_fit, post_burn_in, stationarity_diagnostics
from moran_wave.experiments.sweep import run_sweep
from moran_wave.models import Params, SweepConfig
from moran_wave.population import Population
from tests.conftest import sim_config

pytestmark = pytest.mark.slow

WORKERS = max(1, min(4, os.cpu_count() or 1))


def sweep(q: float, pop_sizes, master_seed: int) -> SweepConfig:
    return SweepConfig(
        grid=[Params(pop_size=n, mu=0.01, q=q, s=0.01) for n in pop_sizes],
        replicates=8,
        horizon=2000.0,
        record_interval=1.0,
        burn_in_fraction=0.2,
        master_seed=master_seed,
    )


def test_rate_grows_with_log_population_size():
    result = run_sweep(sweep(0.02, [300, 1000, 3000, 10000], master_seed=2024), workers=WORKERS)
    assert not result.failed_rows()
    (fit,) = log_growth_fit(result)
    assert fit.q == 0.02
    assert fit.pop_sizes == [300, 1000, 3000, 10000]
    assert fit.increasing
    assert fit.r_squared >= 0.8
    assert fit.slope > 0


def test_small_population_with_rare_beneficial_mutations_loses_fitness():
    result = run_sweep(sweep(0.002, [300], master_seed=7), workers=WORKERS)
    (cell,) = result.cells
    assert cell.completed == 8
    se = cell.rate_sd / math.sqrt(cell.completed)
    assert cell.mean_rate < 0
    assert cell.mean_rate + 2 * se < 0


def test_large_population_bulk_is_near_gaussian():
    cfg = sim_config(pop_size=10_000, mu=0.01, q=0.02, s=0.01, horizon=2000.0, seed=10)
    records = ClassLevelEngine(cfg).run(Population.point_mass(10_000)).records
    report = stationarity_diagnostics(post_burn_in(records, 0.2))
    assert report.excluded_records == 0
    assert abs(report.skewness) <= 0.5
    assert 2.0 <= report.kurtosis <= 4.0
