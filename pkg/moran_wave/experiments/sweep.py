"""
Parameter sweeps: every (grid point, replicate) cell is one class-level run
from the all-at-zero population, summarised by its adaptation rate.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import structlog

from moran_wave.config import Settings, settings, use_settings
from moran_wave.engine.classes import ClassLevelEngine
from moran_wave.engine.rng import derive_run_seed, make_generator
from moran_wave.errors import BudgetExceededError, InsufficientDataError, format_error_response
from moran_wave.experiments.estimation import estimate_adaptation_rate, mean_c2
from moran_wave.logging_setup import configure_logging
from moran_wave.models import CellSummary, SimConfig, SweepConfig, SweepResult, SweepRow
from moran_wave.population import Population

logger = structlog.get_logger()

CellTask = Tuple[Dict[str, Any], int, int]


def _init_worker(settings_snapshot: Dict[str, Any]) -> None:
    """Give each worker the parent's settings; file logging stays in the parent"""
    snapshot = dict(settings_snapshot, LOG_TO_FILE=False)
    use_settings(Settings(**snapshot))
    configure_logging(settings)


def _run_cell(task: CellTask) -> SweepRow:
    cfg_data, grid_index, replicate = task
    cfg = SweepConfig.model_validate(cfg_data)
    params = cfg.grid[grid_index]
    seed = derive_run_seed(cfg.master_seed, grid_index, replicate)
    sim_cfg = SimConfig(
        params=params,
        horizon=cfg.horizon,
        record_interval=cfg.record_interval,
        seed=seed,
        mode="class_level",
        event_budget=cfg.event_budget,
        kd_beta=cfg.kd_beta,
    )
    row = SweepRow(grid_index=grid_index, replicate=replicate, params=params, seed=seed)
    try:
        run = ClassLevelEngine(sim_cfg).run(
            Population.point_mass(params.pop_size), rng=make_generator(seed)
        )
        records = run.records
        rate, stderr = estimate_adaptation_rate(records, cfg.burn_in_fraction)
        return row.model_copy(
            update={
                "adaptation_rate": rate,
                "rate_stderr": stderr,
                "mean_c2": mean_c2(records, cfg.burn_in_fraction),
            }
        )
    except (BudgetExceededError, InsufficientDataError) as e:
        return row.model_copy(update={"failed": True, "error": format_error_response(e)})


def sweep_tasks(cfg: SweepConfig) -> List[CellTask]:
    data = cfg.model_dump(mode="json")
    return [
        (data, g, r) for g in range(len(cfg.grid)) for r in range(cfg.replicates)
    ]


def summarize_cells(cfg: SweepConfig, rows: Iterable[SweepRow]) -> Tuple[List[SweepRow], List[CellSummary]]:
    """Attach the across-replicate SD to every row and build per-cell summaries"""
    rows = list(rows)
    by_cell: Dict[int, List[SweepRow]] = {}
    for row in rows:
        by_cell.setdefault(row.grid_index, []).append(row)

    cells: List[CellSummary] = []
    sd_of: Dict[int, Optional[float]] = {}
    for g, params in enumerate(cfg.grid):
        done = [r for r in by_cell.get(g, []) if not r.failed]
        rates = np.array([r.adaptation_rate for r in done], dtype=np.float64)
        sd = float(rates.std(ddof=1)) if rates.size >= 2 else None
        sd_of[g] = sd
        cells.append(
            CellSummary(
                grid_index=g,
                params=params,
                completed=len(done),
                mean_rate=float(rates.mean()) if rates.size else None,
                rate_sd=sd,
                mean_c2=float(np.mean([r.mean_c2 for r in done])) if done else None,
            )
        )
    rows = [
        r if r.failed else r.model_copy(update={"rate_sd": sd_of[r.grid_index]})
        for r in rows
    ]
    return rows, cells


def run_sweep(cfg: SweepConfig, workers: Optional[int] = None) -> SweepResult:
    """
    Run every cell of the sweep

    Rows come back in (grid index, replicate) order whatever the worker
    count, and each cell's stream depends only on (master_seed, grid index,
    replicate), so the table is identical for any `workers`.
    """
    workers = workers or settings.SWEEP_WORKERS
    if cfg.event_budget is None:
        cfg = cfg.model_copy(update={"event_budget": settings.EVENT_BUDGET})
    tasks = sweep_tasks(cfg)
    logger.info(
        "Starting sweep",
        grid_points=len(cfg.grid),
        replicates=cfg.replicates,
        cells=len(tasks),
        workers=workers,
        master_seed=cfg.master_seed,
    )

    if workers <= 1:
        raw = [_run_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(settings.model_dump(mode="json"),),
        ) as pool:
            raw = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))

    for row in raw:
        if row.failed:
            logger.warning(
                "Sweep cell failed",
                grid_index=row.grid_index,
                replicate=row.replicate,
                error=row.error,
            )
        else:
            logger.info(
                "Sweep cell finished",
                grid_index=row.grid_index,
                replicate=row.replicate,
                pop_size=row.params.pop_size,
                rate=row.adaptation_rate,
            )

    rows, cells = summarize_cells(cfg, raw)
    return SweepResult(rows=rows, cells=cells)
