"""
Linear birth-death chain: Z -> Z+1 at rate a Z, Z -> Z-1 at rate b Z, absorbing at 0
"""

import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple

import numpy as np
import structlog

from moran_wave.config import settings
from moran_wave.engine import kernels
from moran_wave.engine.rng import make_generator
from moran_wave.errors import BudgetExceededError
from moran_wave.models import BirthDeathConfig

logger = structlog.get_logger()

BirthDeathEvent = Tuple[float, Literal["birth", "death"], int]


@dataclass
class BirthDeathRun:
    terminal: int
    events: List[BirthDeathEvent] = field(default_factory=list)

    @property
    def extinct(self) -> bool:
        return self.terminal == 0


def simulate_birth_death(
    cfg: BirthDeathConfig, rng: Optional[np.random.Generator] = None
) -> BirthDeathRun:
    """One exact path up to cfg.horizon with its full event log (time, kind, Z after)"""
    rng = rng if rng is not None else make_generator(cfg.seed)
    z = cfg.z0
    t = 0.0
    log: List[BirthDeathEvent] = []
    budget = settings.EVENT_BUDGET
    while z > 0:
        rate = (cfg.a + cfg.b) * z
        if rate <= 0.0:
            break
        t += -math.log(1.0 - rng.random()) / rate
        if t > cfg.horizon:
            break
        if len(log) >= budget:
            raise BudgetExceededError(len(log), t, cfg.horizon)
        if rng.random() * (cfg.a + cfg.b) < cfg.a:
            z += 1
            log.append((t, "birth", z))
        else:
            z -= 1
            log.append((t, "death", z))
    return BirthDeathRun(terminal=z, events=log)


def birth_death_terminal_sample(
    cfg: BirthDeathConfig, runs: int, rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """Z(horizon) for `runs` independent paths, compiled loop"""
    rng = rng if rng is not None else make_generator(cfg.seed)
    out = np.zeros(int(runs), dtype=np.int64)
    events = kernels.birth_death_terminal_counts(
        rng, cfg.a, cfg.b, cfg.z0, cfg.horizon, out, settings.EVENT_BUDGET
    )
    if events < 0:
        raise BudgetExceededError(settings.EVENT_BUDGET, float("nan"), cfg.horizon)
    logger.debug("Birth-death batch finished", runs=runs, events=int(events), a=cfg.a, b=cfg.b)
    return out
