"""
Shared fixtures: isolated settings and synthetic trajectories
"""

import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence

import pytest

from moran_wave.config import Settings, settings, use_settings
from moran_wave.models import Params, SimConfig
from moran_wave.population import TrajectoryRecord


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path: Path):
    """Every test sees file logging off; the global settings are restored afterwards"""
    snapshot = settings.model_copy()
    use_settings(Settings(LOG_TO_FILE=False, LOG_DIR=tmp_path / "logs"))
    yield settings
    use_settings(snapshot)
    # drop handlers bound to captured streams
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) in (logging.StreamHandler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture
def settings_file(tmp_path: Path) -> Path:
    path = tmp_path / "settings.yaml"
    path.write_text(f"LOG_TO_FILE: false\nLOG_DIR: {tmp_path / 'logs'}\n", encoding="utf-8")
    return path


def make_records(
    times: Sequence[float],
    means: Sequence[float],
    c2: float = 1.0,
    c3: float = 0.0,
    c4: Optional[float] = None,
    kc: Optional[Iterable[Optional[int]]] = None,
) -> list:
    """Synthetic records with the given mean path and constant moments"""
    kcs = list(kc) if kc is not None else [0] * len(times)
    return [
        TrajectoryRecord(
            time=float(t),
            mean_fitness=float(m),
            c2=c2,
            c3=c3,
            c4=3.0 * c2 * c2 if c4 is None else c4,
            k_c=k,
            k_d=k,
            k_w=0,
            min_class=0,
            max_class=0,
        )
        for t, m, k in zip(times, means, kcs)
    ]


def sim_config(
    pop_size: int = 100,
    mu: float = 0.01,
    q: float = 0.02,
    s: float = 0.01,
    horizon: float = 100.0,
    record_interval: float = 1.0,
    seed: int = 0,
    mode: str = "class_level",
    **extra,
) -> SimConfig:
    return SimConfig(
        params=Params(pop_size=pop_size, mu=mu, q=q, s=s),
        horizon=horizon,
        record_interval=record_interval,
        seed=seed,
        mode=mode,
        **extra,
    )
