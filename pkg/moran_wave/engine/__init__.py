"""
Exact continuous-time engines for the Moran model and the birth-death chain
"""

from moran_wave.engine.birth_death import (
    BirthDeathRun,
    birth_death_terminal_sample,
    simulate_birth_death,
)
from moran_wave.engine.classes import ClassLevelEngine, EngineRun, simulate_classes
from moran_wave.engine.individuals import (
    CoupledRun,
    IndividualLevelEngine,
    run_coupled,
    simulate_coupled,
    simulate_individuals,
)
from moran_wave.engine.rng import derive_run_seed, make_generator

__all__ = [
    "BirthDeathRun",
    "ClassLevelEngine",
    "CoupledRun",
    "EngineRun",
    "IndividualLevelEngine",
    "birth_death_terminal_sample",
    "derive_run_seed",
    "make_generator",
    "run_coupled",
    "simulate_birth_death",
    "simulate_classes",
    "simulate_coupled",
    "simulate_individuals",
]
