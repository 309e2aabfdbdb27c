"""
Pydantic models for run configuration, results and reports
"""

from datetime import datetime
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

MAX_SEED = 2**64 - 1

SimMode = Literal["class_level", "individual_level", "coupled_neutral"]


class Params(BaseModel):
    """The model quadruple (N, mu, q, s)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pop_size: int = Field(ge=1, description="Population size N")
    mu: float = Field(ge=0.0, description="Mutation events per individual per generation")
    q: float = Field(ge=0.0, le=1.0, description="Probability a mutation is beneficial")
    s: float = Field(ge=0.0, description="Selection coefficient per unit fitness")


class SimConfig(BaseModel):
    """One simulation run"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    params: Params
    horizon: float = Field(gt=0.0, description="Generations to simulate")
    record_interval: float = Field(gt=0.0, description="Spacing of emitted records")
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    mode: SimMode = "class_level"
    event_budget: Optional[int] = Field(
        default=None, ge=1, description="Falls back to settings.EVENT_BUDGET"
    )
    kd_beta: float = Field(default=0.5, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _interval_within_horizon(self) -> "SimConfig":
        if self.record_interval > self.horizon:
            raise ValueError("record_interval must not exceed horizon")
        return self

    @property
    def n_records(self) -> int:
        return int(self.horizon / self.record_interval + 1e-9) + 1


class BirthDeathConfig(BaseModel):
    """Linear birth-death chain: up at rate a*Z, down at rate b*Z"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a: float = Field(ge=0.0)
    b: float = Field(ge=0.0)
    z0: int = Field(ge=1)
    horizon: float = Field(gt=0.0)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)


class SweepConfig(BaseModel):
    """Grid of parameter points, each simulated `replicates` times"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid: List[Params] = Field(min_length=1)
    replicates: int = Field(ge=1)
    horizon: float = Field(gt=0.0)
    burn_in_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    record_interval: float = Field(gt=0.0)
    master_seed: int = Field(default=0, ge=0, le=MAX_SEED)
    kd_beta: float = Field(default=0.5, gt=0.0, lt=1.0)
    event_budget: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _interval_within_horizon(self) -> "SweepConfig":
        if self.record_interval > self.horizon:
            raise ValueError("record_interval must not exceed horizon")
        return self


class SweepRow(BaseModel):
    """One (grid point, replicate) cell of a sweep"""

    grid_index: int
    replicate: int
    params: Params
    seed: int
    adaptation_rate: Optional[float] = None
    rate_stderr: Optional[float] = Field(default=None, ge=0.0)
    rate_sd: Optional[float] = Field(default=None, ge=0.0)
    mean_c2: Optional[float] = Field(default=None, ge=0.0)
    failed: bool = False
    error: Optional[Dict[str, Any]] = None


class CellSummary(BaseModel):
    """Across-replicate summary of one grid point"""

    grid_index: int
    params: Params
    completed: int
    mean_rate: Optional[float] = None
    rate_sd: Optional[float] = None
    mean_c2: Optional[float] = None


class SweepResult(BaseModel):
    rows: List[SweepRow]
    cells: List[CellSummary]

    def failed_rows(self) -> List[SweepRow]:
        return [r for r in self.rows if r.failed]


class WavePrediction(BaseModel):
    """Predicted front lead K, width b and speed of the fitness wave"""

    pop_size: float
    mu: float
    q: float
    s: float
    K: float = Field(gt=0.0)
    b: float = Field(gt=0.0)
    speed: float
    front_speed: Optional[float] = None
    residual: float
    lambert_K: float
    asymptotic_K: Optional[float] = None
    consistency_K: Optional[float] = None


class CheckResult(BaseModel):
    """One pass/fail check with its measured statistics"""

    suite: str
    name: str
    passed: bool
    statistic: Optional[float] = None
    threshold: Optional[float] = None
    details: Dict[str, Any] = Field(default_factory=dict)


class ValidationReport(BaseModel):
    checks: List[CheckResult] = Field(default_factory=list)
    suites: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class RunManifest(BaseModel):
    """Written next to every output; enough to rerun bit-for-bit on this build"""

    subcommand: str
    tool_version: str
    master_seed: Optional[int] = None
    config: Dict[str, Any]
    settings: Dict[str, Any]
    started_at: datetime
    finished_at: Optional[datetime] = None
    phases: List[Dict[str, Any]] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    package_versions: Dict[str, str] = Field(default_factory=dict)


class DriftReport(BaseModel):
    """OLS adaptation rate against mu(2q-1) + s * mean(c2)"""

    rate: float
    rate_stderr: float
    predicted: float
    mean_c2: float
    c2_stderr: float
    random_walk_stderr: float
    combined_stderr: float
    discrepancy: float
    z: float
    passed: bool
    n_records: int


class PooledDriftReport(BaseModel):
    replicates: int
    mean_discrepancy: float
    stderr: float
    z: float
    passed: bool
    reports: List[DriftReport] = Field(default_factory=list)


class FrontSpeedReport(BaseModel):
    """Slope of the front k_c against slope of the mean over one window"""

    front_slope: float
    mean_slope: float
    discrepancy: float
    stderr: float
    z: float
    passed: bool
    n_records: int


class StationarityReport(BaseModel):
    """
    Time-averaged shape of the wave over the records with c2 > 0

    Records with c2 = 0 have no shape and are counted in `excluded_records`;
    the shape fields are None when every record is excluded.
    """

    skewness: Optional[float] = None
    skewness_stderr: Optional[float] = None
    kurtosis: Optional[float] = None
    kurtosis_stderr: Optional[float] = None
    n_records: int = 0
    excluded_records: int = 0


class RatchetReport(BaseModel):
    rate: float
    stderr: float
    z: float
    passed: bool


class LogGrowthFit(BaseModel):
    """Least squares of grid-mean rate against ln N for one q"""

    q: float
    pop_sizes: List[int]
    mean_rates: List[float]
    slope: float
    intercept: float
    r_squared: float
    increasing: bool


class OracleReport(BaseModel):
    """Exact CTMC law at time t against empirical engine frequencies"""

    pop_size: int
    s: float
    t: float
    replicates: int
    states: List[List[int]]
    exact: List[float]
    empirical: List[float]
    tv_distance: float
    absorption: Dict[str, float] = Field(default_factory=dict)
