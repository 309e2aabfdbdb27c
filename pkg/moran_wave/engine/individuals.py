"""
Individual-level simulation, optionally coupled to a neutral shadow process
"""

import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import structlog

from moran_wave.engine import kernels
from moran_wave.engine.classes import (
    EngineRun,
    event_budget,
    record_thresholds,
    tallies_to_dict,
)
from moran_wave.engine.rng import make_generator
from moran_wave.errors import BudgetExceededError, ConfigError, CouplingViolationError
from moran_wave.models import SimConfig
from moran_wave.population import IndividualState, TrajectoryRecord

logger = structlog.get_logger()


@dataclass
class CoupledRun:
    selected: EngineRun
    neutral: EngineRun
    final_state: IndividualState

    @property
    def record_pairs(self) -> List[Tuple[TrajectoryRecord, TrajectoryRecord]]:
        return list(zip(self.selected.records, self.neutral.records))


class IndividualLevelEngine:
    """
    Per-individual engine for validation-scale populations

    In `coupled_neutral` mode a shadow vector Y shares every mutation and
    resampling event with X but never sees selection.
    """

    def __init__(self, cfg: SimConfig) -> None:
        if cfg.mode not in ("individual_level", "coupled_neutral"):
            raise ConfigError(
                f"individual-level engine cannot run mode {cfg.mode!r}", path="mode"
            )
        self.cfg = cfg
        self.coupled = cfg.mode == "coupled_neutral"
        self.budget = event_budget(cfg.event_budget)

    def _check_initial(self, initial: IndividualState) -> None:
        p = self.cfg.params
        if initial.pop_size != p.pop_size:
            raise ConfigError(
                f"initial state has {initial.pop_size} individuals, expected {p.pop_size}",
                path="params.pop_size",
            )
        if self.coupled:
            if initial.y is None or not np.array_equal(initial.x, initial.y):
                raise ConfigError("coupled runs start from y = x", path="initial.y")

    def run(
        self, initial: IndividualState, rng: Optional[np.random.Generator] = None
    ) -> Tuple[EngineRun, Optional[EngineRun], IndividualState]:
        cfg = self.cfg
        p = cfg.params
        self._check_initial(initial)
        rng = rng if rng is not None else make_generator(cfg.seed)

        x = initial.x.copy()
        y = initial.y.copy() if self.coupled and initial.y is not None else x.copy()
        kc_thr, kd_thr = record_thresholds(p.pop_size, cfg.kd_beta)
        table_x = np.full((cfg.n_records, kernels.N_COLUMNS), np.nan)
        table_y = np.full(
            (cfg.n_records if self.coupled else 1, kernels.N_COLUMNS), np.nan
        )
        tallies = np.zeros(kernels.N_TALLIES, dtype=np.int64)

        started = time.perf_counter()
        status, events, t, bad = kernels.run_individual_level(
            rng,
            x,
            y,
            self.coupled,
            p.mu,
            p.q,
            p.s,
            cfg.record_interval,
            cfg.n_records,
            self.budget,
            kc_thr,
            kd_thr,
            table_x,
            table_y,
            tallies,
        )
        wall = time.perf_counter() - started

        if status == kernels.STATUS_BUDGET:
            logger.warning(
                "Event budget exhausted", events=int(events), time_reached=float(t), horizon=cfg.horizon
            )
            raise BudgetExceededError(int(events), float(t), cfg.horizon)
        if status == kernels.STATUS_DOMINATION:
            logger.error(
                "Coupling domination broken",
                index=int(bad),
                x_value=int(x[bad]),
                y_value=int(y[bad]),
                time=float(t),
            )
            raise CouplingViolationError(int(bad), int(x[bad]), int(y[bad]), float(t))

        final_state = IndividualState(x=x, y=y if self.coupled else None)
        tally_dict = tallies_to_dict(tallies)
        selected = EngineRun(
            table=table_x,
            final=final_state.population(),
            events=int(events),
            time_reached=float(t),
            tallies=tally_dict,
            wall_time_s=wall,
        )
        neutral = None
        if self.coupled:
            neutral_final = final_state.neutral_population()
            assert neutral_final is not None
            neutral = EngineRun(
                table=table_y,
                final=neutral_final,
                events=int(events),
                time_reached=float(t),
                tallies=tally_dict,
                wall_time_s=wall,
            )
        logger.debug(
            "Individual-level run finished",
            pop_size=p.pop_size,
            coupled=self.coupled,
            events=int(events),
            wall_time_s=round(wall, 4),
            **tally_dict,
        )
        return selected, neutral, final_state


def simulate_individuals(cfg: SimConfig, initial: IndividualState) -> List[TrajectoryRecord]:
    if cfg.mode != "individual_level":
        raise ConfigError(f"simulate_individuals needs mode individual_level, got {cfg.mode!r}", path="mode")
    selected, _, _ = IndividualLevelEngine(cfg).run(initial)
    return selected.records


def run_coupled(
    cfg: SimConfig, initial: IndividualState, rng: Optional[np.random.Generator] = None
) -> CoupledRun:
    if cfg.mode != "coupled_neutral":
        raise ConfigError(f"coupled run needs mode coupled_neutral, got {cfg.mode!r}", path="mode")
    selected, neutral, final_state = IndividualLevelEngine(cfg).run(initial, rng)
    assert neutral is not None
    return CoupledRun(selected=selected, neutral=neutral, final_state=final_state)


def simulate_coupled(
    cfg: SimConfig, initial: IndividualState
) -> List[Tuple[TrajectoryRecord, TrajectoryRecord]]:
    """Record pairs (X, Y); raises CouplingViolationError if Y_i > X_i ever occurs"""
    return run_coupled(cfg, initial).record_pairs
