import pytest

from moran_wave.engine.rng import derive_run_seed
from moran_wave.experiments.sweep import run_sweep, sweep_tasks
from moran_wave.models import Params, SweepConfig
from moran_wave.output.csv_io import read_sweep_csv, write_sweep_csv


def small_sweep(**overrides) -> SweepConfig:
    data = dict(
        grid=[
            Params(pop_size=20, mu=0.05, q=0.1, s=0.05),
            Params(pop_size=50, mu=0.05, q=0.1, s=0.05),
        ],
        replicates=3,
        horizon=30.0,
        record_interval=1.0,
        master_seed=11,
    )
    data.update(overrides)
    return SweepConfig(**data)


class TestSweep:
    def test_rows_in_grid_order(self):
        result = run_sweep(small_sweep())
        assert [(r.grid_index, r.replicate) for r in result.rows] == [
            (g, r) for g in range(2) for r in range(3)
        ]
        assert all(r.seed == derive_run_seed(11, r.grid_index, r.replicate) for r in result.rows)
        assert all(r.adaptation_rate is not None and not r.failed for r in result.rows)

    def test_deterministic(self):
        a = run_sweep(small_sweep())
        b = run_sweep(small_sweep())
        assert a.model_dump() == b.model_dump()

    def test_cell_summaries(self):
        result = run_sweep(small_sweep())
        assert len(result.cells) == 2
        for cell in result.cells:
            assert cell.completed == 3
            rates = [r.adaptation_rate for r in result.rows if r.grid_index == cell.grid_index]
            assert cell.mean_rate == pytest.approx(sum(rates) / 3)
            assert cell.rate_sd is not None
        assert all(r.rate_sd == result.cells[r.grid_index].rate_sd for r in result.rows)

    def test_single_replicate_has_no_sd(self):
        result = run_sweep(small_sweep(replicates=1))
        assert all(r.rate_sd is None for r in result.rows)

    def test_budget_failures_are_rows(self):
        result = run_sweep(small_sweep(event_budget=5))
        assert len(result.failed_rows()) == 6
        row = result.rows[0]
        assert row.adaptation_rate is None
        assert row.error["error"]["type"] == "budget_exceeded"
        assert all(c.mean_rate is None and c.completed == 0 for c in result.cells)

    def test_single_cell_csv(self, tmp_path):
        cfg = small_sweep(grid=[Params(pop_size=20, mu=0.05, q=0.1, s=0.05)], replicates=4)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(run_sweep(cfg).rows, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "N,mu,q,s,replicate,seed,adaptation_rate,rate_sd,mean_c2"
        assert len(lines) == 5
        assert [row["replicate"] for row in read_sweep_csv(path)] == ["0", "1", "2", "3"]

    def test_task_list(self):
        assert len(sweep_tasks(small_sweep())) == 6

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            small_sweep(grid=[])

    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self):
        cfg = small_sweep()
        assert run_sweep(cfg, workers=1).model_dump() == run_sweep(cfg, workers=2).model_dump()
