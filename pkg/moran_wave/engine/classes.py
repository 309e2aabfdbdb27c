"""
Class-level exact simulation
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import structlog

from moran_wave.config import settings
from moran_wave.engine import kernels
from moran_wave.engine.rng import make_generator
from moran_wave.errors import BudgetExceededError, ConfigError
from moran_wave.models import SimConfig
from moran_wave.population import (
    Population,
    TrajectoryRecord,
    kc_threshold,
    kd_threshold,
)

logger = structlog.get_logger()

TALLY_NAMES = (
    "mutation_up",
    "mutation_down",
    "selection",
    "resampling",
    "resampling_noop",
    "selection_proposals",
)


def tallies_to_dict(tallies: np.ndarray) -> Dict[str, int]:
    return {name: int(v) for name, v in zip(TALLY_NAMES, tallies)}


def record_thresholds(pop_size: int, beta: float) -> tuple:
    """(k_c threshold, k_d threshold) for the record kernels; k_d is off below N=3"""
    kd = kd_threshold(pop_size, beta) if pop_size >= 3 else np.inf
    return kc_threshold(pop_size), kd


def event_budget(cfg_budget: Optional[int]) -> int:
    return int(cfg_budget if cfg_budget is not None else settings.EVENT_BUDGET)


@dataclass
class EngineRun:
    """Output of one engine invocation"""

    table: np.ndarray
    final: Population
    events: int
    time_reached: float
    tallies: Dict[str, int] = field(default_factory=dict)
    wall_time_s: float = 0.0

    @property
    def records(self) -> List[TrajectoryRecord]:
        return [TrajectoryRecord.from_row(row) for row in self.table]


class ClassLevelEngine:
    """SSA over the fitness-class histogram; cost per event is linear in the support width"""

    def __init__(self, cfg: SimConfig) -> None:
        if cfg.mode != "class_level":
            raise ConfigError(f"class-level engine cannot run mode {cfg.mode!r}", path="mode")
        self.cfg = cfg
        self.budget = event_budget(cfg.event_budget)

    def run(
        self, initial: Population, rng: Optional[np.random.Generator] = None
    ) -> EngineRun:
        cfg = self.cfg
        p = cfg.params
        if initial.total != p.pop_size:
            raise ConfigError(
                f"initial population has {initial.total} individuals, expected {p.pop_size}",
                path="params.pop_size",
            )
        rng = rng if rng is not None else make_generator(cfg.seed)
        classes, occ = initial.arrays()
        kc_thr, kd_thr = record_thresholds(p.pop_size, cfg.kd_beta)
        table = np.full((cfg.n_records, kernels.N_COLUMNS), np.nan)
        tallies = np.zeros(kernels.N_TALLIES, dtype=np.int64)

        started = time.perf_counter()
        status, events, t, out_classes, out_occ = kernels.run_class_level(
            rng,
            classes,
            occ,
            p.pop_size,
            p.mu,
            p.q,
            p.s,
            cfg.record_interval,
            cfg.n_records,
            self.budget,
            kc_thr,
            kd_thr,
            table,
            tallies,
        )
        wall = time.perf_counter() - started

        if status == kernels.STATUS_BUDGET:
            logger.warning(
                "Event budget exhausted", events=int(events), time_reached=float(t), horizon=cfg.horizon
            )
            raise BudgetExceededError(int(events), float(t), cfg.horizon)

        final = Population.from_counts(dict(zip(out_classes.tolist(), out_occ.tolist())))
        run = EngineRun(
            table=table,
            final=final,
            events=int(events),
            time_reached=float(t),
            tallies=tallies_to_dict(tallies),
            wall_time_s=wall,
        )
        logger.debug(
            "Class-level run finished",
            pop_size=p.pop_size,
            events=run.events,
            wall_time_s=round(wall, 4),
            **run.tallies,
        )
        return run


def simulate_classes(cfg: SimConfig, initial: Population) -> List[TrajectoryRecord]:
    return ClassLevelEngine(cfg).run(initial).records
