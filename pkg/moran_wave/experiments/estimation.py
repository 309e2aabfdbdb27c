"""
Estimators and identity checks on recorded trajectories
"""

import math
import warnings
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
import structlog
from scipy import stats

from moran_wave.errors import InsufficientDataError
from moran_wave.models import (
    DriftReport,
    FrontSpeedReport,
    LogGrowthFit,
    Params,
    PooledDriftReport,
    RatchetReport,
    StationarityReport,
    SweepResult,
)
from moran_wave.population import TrajectoryRecord
from moran_wave.theory import drift_rate

logger = structlog.get_logger()

MIN_RECORDS = 10
N_BATCHES = 10
Z_LIMIT = 3.0


class RateEstimate(NamedTuple):
    rate: float
    stderr: float


def post_burn_in(
    traj: Sequence[TrajectoryRecord], burn_in_fraction: float
) -> List[TrajectoryRecord]:
    """Records at or after burn_in_fraction of the last record time"""
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError(f"burn_in_fraction must lie in [0, 1), got {burn_in_fraction}")
    if not traj:
        return []
    cut = burn_in_fraction * traj[-1].time
    return [r for r in traj if r.time >= cut]


def _require(records: Sequence[TrajectoryRecord], what: str) -> None:
    if len(records) < MIN_RECORDS:
        raise InsufficientDataError(
            f"{what} needs at least {MIN_RECORDS} records, got {len(records)}",
            n_records=len(records),
        )


def _ols(t: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """(slope, OLS slope stderr); exact fits give stderr 0"""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = stats.linregress(t, y)
    stderr = float(fit.stderr)
    if not math.isfinite(stderr):
        stderr = 0.0
    return float(fit.slope), stderr


def batch_means(values: np.ndarray, n_batches: int = N_BATCHES) -> Tuple[float, float]:
    """(mean, stderr of the mean) from contiguous batch means"""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n == 0:
        raise InsufficientDataError("no values to average")
    mean = float(values.mean())
    b = min(n_batches, n)
    if b < 2:
        return mean, 0.0
    size = n // b
    means = values[: size * b].reshape(b, size).mean(axis=1)
    return mean, float(means.std(ddof=1) / math.sqrt(b))


def long_run_variance(values: np.ndarray, n_batches: int = N_BATCHES) -> float:
    """Per-sample long-run variance: batch length times variance of batch means"""
    values = np.asarray(values, dtype=np.float64)
    b = min(n_batches, values.size)
    if b < 2:
        return 0.0
    size = values.size // b
    means = values[: size * b].reshape(b, size).mean(axis=1)
    return float(size * means.var(ddof=1))


def random_walk_slope_stderr(t: np.ndarray, y: np.ndarray, slope: float) -> float:
    """
    Stderr of an OLS slope when y is drift plus a random walk

    Var(slope) = 6 sigma^2 / (5 T) with sigma^2 the per-unit-time increment
    variance around the fitted drift.
    """
    dt = np.diff(t)
    span = float(t[-1] - t[0])
    if span <= 0:
        return 0.0
    resid = np.diff(y) - slope * dt
    sigma2 = float(np.sum(resid**2) / dt.sum())
    return math.sqrt(6.0 * sigma2 / (5.0 * span))


def _z(discrepancy: float, stderr: float, scale: float) -> float:
    if abs(discrepancy) <= 1e-12 * max(1.0, abs(scale)):
        return 0.0
    if stderr <= 0:
        return math.inf
    return discrepancy / stderr


def estimate_adaptation_rate(
    traj: Sequence[TrajectoryRecord], burn_in_fraction: float
) -> RateEstimate:
    """OLS slope of mean fitness over the post-burn-in records"""
    records = post_burn_in(traj, burn_in_fraction)
    _require(records, "rate estimation")
    t = np.array([r.time for r in records])
    m = np.array([r.mean_fitness for r in records])
    slope, stderr = _ols(t, m)
    return RateEstimate(slope, stderr)


def mean_c2(traj: Sequence[TrajectoryRecord], burn_in_fraction: float) -> float:
    records = post_burn_in(traj, burn_in_fraction)
    if not records:
        raise InsufficientDataError("no records after burn-in")
    return float(np.mean([r.c2 for r in records]))


def drift_identity_check(
    traj: Sequence[TrajectoryRecord], params: Params, burn_in_fraction: float = 0.0
) -> DriftReport:
    """OLS rate against mu(2q-1) + s * time-averaged c2, in combined standard errors"""
    records = post_burn_in(traj, burn_in_fraction)
    _require(records, "drift identity check")
    t = np.array([r.time for r in records])
    m = np.array([r.mean_fitness for r in records])
    c2 = np.array([r.c2 for r in records])

    rate, ols_se = _ols(t, m)
    avg_c2, c2_se = batch_means(c2)
    predicted = drift_rate(params, avg_c2)
    rw_se = random_walk_slope_stderr(t, m, rate)
    combined = math.sqrt(rw_se**2 + (params.s * c2_se) ** 2)
    discrepancy = rate - predicted
    z = _z(discrepancy, combined, predicted)
    return DriftReport(
        rate=rate,
        rate_stderr=ols_se,
        predicted=predicted,
        mean_c2=avg_c2,
        c2_stderr=c2_se,
        random_walk_stderr=rw_se,
        combined_stderr=combined,
        discrepancy=discrepancy,
        z=z,
        passed=abs(z) <= Z_LIMIT,
        n_records=len(records),
    )


def pool_drift_reports(reports: Sequence[DriftReport]) -> PooledDriftReport:
    """Across-replicate mean discrepancy with its empirical standard error"""
    if not reports:
        raise InsufficientDataError("no drift reports to pool")
    d = np.array([r.discrepancy for r in reports])
    mean = float(d.mean())
    if d.size >= 2:
        stderr = float(d.std(ddof=1) / math.sqrt(d.size))
    else:
        stderr = reports[0].combined_stderr
    z = _z(mean, stderr, max(abs(r.predicted) for r in reports))
    return PooledDriftReport(
        replicates=len(reports),
        mean_discrepancy=mean,
        stderr=stderr,
        z=z,
        passed=abs(z) <= Z_LIMIT,
        reports=list(reports),
    )


def front_speed_check(
    traj: Sequence[TrajectoryRecord], params: Params, burn_in_fraction: float = 0.0
) -> FrontSpeedReport:
    """
    Slope of k_c(t) against slope of m(t) over the same window

    The stderr treats the lag d = k_c - m as a stationary series and uses its
    batch-means long-run variance.
    """
    records = post_burn_in(traj, burn_in_fraction)
    _require(records, "front speed check")
    missing = [r.time for r in records if r.k_c is None]
    if missing:
        raise InsufficientDataError(
            f"k_c is absent in {len(missing)} records (first at t={missing[0]:.6g}); "
            f"N={params.pop_size} is too small for the front statistic",
            first_missing_time=missing[0],
        )
    t = np.array([r.time for r in records])
    m = np.array([r.mean_fitness for r in records])
    kc = np.array([float(r.k_c) for r in records])  # type: ignore[arg-type]

    front_slope, _ = _ols(t, kc)
    mean_slope, _ = _ols(t, m)
    lag = kc - m
    discrepancy, _ = _ols(t, lag)
    sxx = float(np.sum((t - t.mean()) ** 2))
    stderr = math.sqrt(long_run_variance(lag) / sxx) if sxx > 0 else 0.0
    z = _z(discrepancy, stderr, max(abs(front_slope), abs(mean_slope)))
    return FrontSpeedReport(
        front_slope=front_slope,
        mean_slope=mean_slope,
        discrepancy=discrepancy,
        stderr=stderr,
        z=z,
        passed=abs(z) <= Z_LIMIT,
        n_records=len(records),
    )


def stationarity_diagnostics(traj: Sequence[TrajectoryRecord]) -> StationarityReport:
    """Time-averaged skewness c3/c2^1.5 and kurtosis c4/c2^2 with batch-means stderrs"""
    shaped = [r for r in traj if r.c2 > 0]
    excluded = len(traj) - len(shaped)
    if not shaped:
        return StationarityReport(n_records=0, excluded_records=excluded)
    c2 = np.array([r.c2 for r in shaped])
    skew = np.array([r.c3 for r in shaped]) / c2**1.5
    kurt = np.array([r.c4 for r in shaped]) / c2**2
    skew_mean, skew_se = batch_means(skew)
    kurt_mean, kurt_se = batch_means(kurt)
    return StationarityReport(
        skewness=skew_mean,
        skewness_stderr=skew_se,
        kurtosis=kurt_mean,
        kurtosis_stderr=kurt_se,
        n_records=len(shaped),
        excluded_records=excluded,
    )


def ratchet_check(
    traj: Sequence[TrajectoryRecord], params: Params, burn_in_fraction: float = 0.0
) -> RatchetReport:
    """Muller's ratchet sign test: rate below zero by more than 3 random-walk stderrs"""
    records = post_burn_in(traj, burn_in_fraction)
    _require(records, "ratchet check")
    t = np.array([r.time for r in records])
    m = np.array([r.mean_fitness for r in records])
    rate, _ = _ols(t, m)
    stderr = random_walk_slope_stderr(t, m, rate)
    z = rate / stderr if stderr > 0 else (-math.inf if rate < 0 else 0.0)
    if params.q > 0:
        logger.info("Ratchet check on a run with beneficial mutations", q=params.q)
    return RatchetReport(rate=rate, stderr=stderr, z=z, passed=z < -Z_LIMIT)


def log_growth_fit(result: SweepResult) -> List[LogGrowthFit]:
    """One fit per q value over cells with at least one completed replicate"""
    by_q: dict = {}
    for cell in result.cells:
        if cell.mean_rate is None:
            continue
        by_q.setdefault(cell.params.q, []).append(cell)
    fits: List[LogGrowthFit] = []
    for q, cells in sorted(by_q.items(), reverse=True):
        cells = sorted(cells, key=lambda c: c.params.pop_size)
        if len({c.params.pop_size for c in cells}) < 2:
            continue
        sizes = [c.params.pop_size for c in cells]
        rates = [float(c.mean_rate) for c in cells]  # type: ignore[arg-type]
        fit = stats.linregress(np.log(sizes), rates)
        fits.append(
            LogGrowthFit(
                q=q,
                pop_sizes=sizes,
                mean_rates=rates,
                slope=float(fit.slope),
                intercept=float(fit.intercept),
                r_squared=float(fit.rvalue**2),
                increasing=all(b > a for a, b in zip(rates, rates[1:])),
            )
        )
    return fits
