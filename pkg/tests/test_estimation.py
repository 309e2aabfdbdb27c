import numpy as np
import pytest

from moran_wave.errors import InsufficientDataError
from moran_wave.experiments.estimation import (
    batch_means,
    drift_identity_check,
    estimate_adaptation_rate,
    front_speed_check,
    log_growth_fit,
    mean_c2,
    pool_drift_reports,
    post_burn_in,
    ratchet_check,
    stationarity_diagnostics,
)
from moran_wave.models import CellSummary, Params, SweepResult
from tests.conftest import make_records


def grid(n=101, step=1.0):
    return np.arange(n) * step


class TestAdaptationRate:
    def test_exact_line(self):
        t = grid()
        rate, stderr = estimate_adaptation_rate(make_records(t, 0.3 * t), 0.0)
        assert rate == pytest.approx(0.3)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        t = grid()
        rate, _ = estimate_adaptation_rate(make_records(t, np.full(t.size, 2.0)), 0.2)
        assert rate == pytest.approx(0.0, abs=1e-15)

    def test_noisy_line(self):
        rng = np.random.default_rng(17)
        t = np.linspace(0.0, 1000.0, 1000)
        m = 0.1 * t + rng.standard_normal(t.size)
        rate, stderr = estimate_adaptation_rate(make_records(t, m), 0.0)
        assert stderr > 0
        assert abs(rate - 0.1) <= 4 * stderr

    def test_burn_in_drops_early_records(self):
        t = grid(11, 10.0)
        kept = post_burn_in(make_records(t, t), 0.5)
        assert [r.time for r in kept] == [50.0, 60.0, 70.0, 80.0, 90.0, 100.0]

    def test_too_few_records(self):
        t = grid(5)
        with pytest.raises(InsufficientDataError) as info:
            estimate_adaptation_rate(make_records(t, t), 0.0)
        assert isinstance(info.value, ValueError)

    def test_mean_c2(self):
        t = grid(20)
        assert mean_c2(make_records(t, t, c2=2.5), 0.2) == pytest.approx(2.5)


class TestDriftIdentity:
    def test_exact_identity_has_no_discrepancy(self):
        p = Params(pop_size=1000, mu=0.01, q=0.02, s=0.01)
        t = grid()
        slope = 0.01 * (2 * 0.02 - 1) + 0.01 * 2.0
        report = drift_identity_check(make_records(t, slope * t, c2=2.0), p)
        assert report.predicted == pytest.approx(0.0104)
        assert report.discrepancy == pytest.approx(0.0, abs=1e-12)
        assert report.z == 0.0
        assert report.passed

    def test_wrong_slope_fails(self):
        p = Params(pop_size=1000, mu=0.01, q=0.5, s=0.01)
        rng = np.random.default_rng(1)
        t = grid(1001)
        m = 0.5 * t + np.cumsum(rng.normal(0.0, 0.1, t.size))
        report = drift_identity_check(make_records(t, m, c2=1.0), p)
        assert not report.passed
        assert report.combined_stderr > 0

    def test_pooling(self):
        p = Params(pop_size=1000, mu=0.01, q=0.5, s=0.01)
        t = grid()
        reports = [drift_identity_check(make_records(t, 0.01 * t, c2=1.0), p) for _ in range(3)]
        pooled = pool_drift_reports(reports)
        assert pooled.replicates == 3
        assert pooled.passed
        with pytest.raises(InsufficientDataError):
            pool_drift_reports([])


class TestFrontSpeed:
    def test_rigid_translation(self):
        p = Params(pop_size=1000, mu=0.01, q=0.02, s=0.01)
        t = grid()
        kc = [int(x) + 5 for x in t]
        report = front_speed_check(make_records(t, t, kc=kc), p)
        assert report.front_slope == pytest.approx(1.0)
        assert report.mean_slope == pytest.approx(1.0)
        assert report.discrepancy == pytest.approx(0.0, abs=1e-12)
        assert report.passed

    def test_absent_front(self):
        p = Params(pop_size=2, mu=0.01, q=0.02, s=0.01)
        t = grid(20)
        kc = [0] * 10 + [None] * 10
        with pytest.raises(InsufficientDataError, match="k_c is absent"):
            front_speed_check(make_records(t, t, kc=kc), p)


class TestDiagnostics:
    def test_gaussian_shape(self):
        t = grid(50)
        report = stationarity_diagnostics(make_records(t, t, c2=4.0))
        assert report.skewness == 0.0
        assert report.kurtosis == pytest.approx(3.0)
        assert report.skewness_stderr == 0.0

    def test_point_mass_has_no_shape(self):
        t = grid(50)
        report = stationarity_diagnostics(make_records(t, np.zeros(t.size), c2=0.0))
        assert report.skewness is None
        assert report.kurtosis is None
        assert report.n_records == 0
        assert report.excluded_records == 50

    def test_degenerate_records_are_counted(self):
        t = grid(40)
        records = make_records(t[:10], t[:10], c2=0.0) + make_records(t[10:], t[10:], c2=4.0)
        report = stationarity_diagnostics(records)
        assert report.n_records == 30
        assert report.excluded_records == 10
        assert report.kurtosis == pytest.approx(3.0)

    def test_ratchet(self):
        rng = np.random.default_rng(3)
        t = grid(1001)
        m = -0.05 * t + np.cumsum(rng.normal(0.0, 0.05, t.size))
        report = ratchet_check(make_records(t, m), Params(pop_size=100, mu=0.1, q=0.0, s=0.0))
        assert report.rate < 0
        assert report.passed

    def test_batch_means_constant(self):
        mean, se = batch_means(np.full(100, 1.5))
        assert (mean, se) == (1.5, 0.0)


class TestLogGrowth:
    def test_fit_per_q(self):
        cells = []
        for i, (q, n, rate) in enumerate(
            [(0.02, 100, 0.01), (0.02, 1000, 0.02), (0.02, 10000, 0.03), (0.002, 100, -0.01), (0.002, 1000, 0.0)]
        ):
            cells.append(
                CellSummary(
                    grid_index=i,
                    params=Params(pop_size=n, mu=0.01, q=q, s=0.01),
                    completed=2,
                    mean_rate=rate,
                )
            )
        fits = log_growth_fit(SweepResult(rows=[], cells=cells))
        assert [f.q for f in fits] == [0.02, 0.002]
        assert fits[0].slope == pytest.approx(0.01 / np.log(10))
        assert fits[0].r_squared == pytest.approx(1.0)
        assert fits[0].increasing
        assert fits[1].pop_sizes == [100, 1000]
