"""
Experiment drivers: rate estimation, sweeps, identity checks and the exact oracle
"""

from moran_wave.experiments.estimation import (
    RateEstimate,
    drift_identity_check,
    estimate_adaptation_rate,
    front_speed_check,
    log_growth_fit,
    pool_drift_reports,
    ratchet_check,
    stationarity_diagnostics,
)
from moran_wave.experiments.oracle import small_instance_oracle
from moran_wave.experiments.sweep import run_sweep

__all__ = [
    "RateEstimate",
    "drift_identity_check",
    "estimate_adaptation_rate",
    "front_speed_check",
    "log_growth_fit",
    "pool_drift_reports",
    "ratchet_check",
    "run_sweep",
    "small_instance_oracle",
    "stationarity_diagnostics",
]
