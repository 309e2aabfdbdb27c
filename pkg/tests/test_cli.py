import csv
import io
import json
import math

import pytest
import yaml

from moran_wave.cli import main


@pytest.fixture
def run_cli(settings_file, capsys):
    """Invoke the CLI with isolated settings; returns (exit code, stdout, stderr)"""

    def _run(*argv: str):
        code = main(["--settings", str(settings_file), *argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


SIM_ARGS = ("simulate", "--pop-size", "100", "--mu", "0.01", "--q", "0.02", "--s", "0.01", "--horizon", "100")


class TestSimulate:
    def test_csv_on_stdout(self, run_cli):
        code, out, _ = run_cli(*SIM_ARGS, "--seed", "5")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 101
        assert rows[0]["time"] == "0"
        assert out.splitlines()[0] == "time,mean_fitness,c2,c3,c4,k_c,k_d,k_w,min_class,max_class"

    def test_byte_identical_reruns(self, run_cli):
        _, first, _ = run_cli(*SIM_ARGS, "--seed", "5")
        _, second, _ = run_cli(*SIM_ARGS, "--seed", "5")
        assert first == second

    def test_only_beneficial_mutations(self, run_cli):
        code, out, _ = run_cli(
            "simulate", "--pop-size", "1", "--mu", "0.01", "--q", "1", "--s", "0", "--horizon", "100"
        )
        assert code == 0
        means = [float(r["mean_fitness"]) for r in csv.DictReader(io.StringIO(out))]
        assert all(b >= a for a, b in zip(means, means[1:]))

    def test_domain_violation_exits_2(self, run_cli):
        code, out, err = run_cli(
            "simulate", "--pop-size", "10", "--mu", "0.01", "--q", "1.5", "--s", "0", "--horizon", "10"
        )
        assert code == 2
        assert out == ""
        assert "params.q" in err

    def test_unknown_flag_exits_2(self, settings_file, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--settings", str(settings_file), *SIM_ARGS, "--bogus"])
        assert info.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_budget_exit_code(self, run_cli):
        code, _, err = run_cli(*SIM_ARGS, "--event-budget", "10")
        assert code == 3
        assert "event budget" in err

    def test_file_output_with_manifest(self, run_cli, tmp_path):
        out = tmp_path / "run.csv"
        code, stdout, _ = run_cli(*SIM_ARGS, "--out", str(out), "--seed", "2")
        assert code == 0
        assert stdout == ""
        assert len(out.read_text(encoding="utf-8").splitlines()) == 102
        manifest = json.loads((tmp_path / "run.manifest.json").read_text(encoding="utf-8"))
        assert manifest["subcommand"] == "simulate"
        assert manifest["master_seed"] == 2
        assert manifest["outputs"] == [str(out)]

    def test_coupled_mode_writes_neutral_trajectory(self, run_cli, tmp_path):
        out = tmp_path / "coupled.csv"
        code, _, _ = run_cli(
            "simulate", "--pop-size", "50", "--mu", "0.01", "--q", "0.5", "--s", "0.05",
            "--horizon", "20", "--mode", "coupled_neutral", "--out", str(out),
        )
        assert code == 0
        neutral = tmp_path / "coupled_neutral.csv"
        assert neutral.exists()
        x = list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"))))
        y = list(csv.DictReader(io.StringIO(neutral.read_text(encoding="utf-8"))))
        assert len(x) == len(y) == 21
        assert all(int(b["max_class"]) <= int(a["max_class"]) for a, b in zip(x, y))

    def test_individual_mode_with_initial_spread(self, run_cli):
        code, out, _ = run_cli(
            "simulate", "--pop-size", "30", "--mu", "0.01", "--q", "0.5", "--s", "0.1",
            "--horizon", "5", "--mode", "individual_level", "--initial-width", "3",
        )
        assert code == 0
        first = next(csv.DictReader(io.StringIO(out)))
        assert first["mean_fitness"] == "1"
        assert first["k_w"] == "2"


def write_sweep(tmp_path, **overrides):
    data = {
        "grid": [{"pop_size": 20, "mu": 0.05, "q": 0.1, "s": 0.05}],
        "replicates": 3,
        "horizon": 30.0,
        "record_interval": 1.0,
        "master_seed": 4,
    }
    data.update(overrides)
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestSweepCommand:
    def test_outputs(self, run_cli, tmp_path):
        out_dir = tmp_path / "out"
        code, _, _ = run_cli("sweep", str(write_sweep(tmp_path)), "--out-dir", str(out_dir))
        assert code == 0
        lines = (out_dir / "sweep.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 4
        svg = (out_dir / "sweep.svg").read_text(encoding="utf-8")
        assert svg.count('class="replicate"') == 3
        manifest = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["master_seed"] == 4
        assert manifest["config"]["sweep"]["burn_in_fraction"] == 0.2

    def test_empty_grid(self, run_cli, tmp_path):
        code, _, err = run_cli("sweep", str(write_sweep(tmp_path, grid=[])), "--out-dir", str(tmp_path))
        assert code == 2
        assert "grid" in err

    def test_bad_field_names_path(self, run_cli, tmp_path):
        bad = [{"pop_size": 20, "mu": 0.05, "q": 2.0, "s": 0.05}]
        code, _, err = run_cli("sweep", str(write_sweep(tmp_path, grid=bad)), "--out-dir", str(tmp_path))
        assert code == 2
        assert "grid.0.q" in err

    def test_malformed_json(self, run_cli, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"grid\": [", encoding="utf-8")
        code, _, err = run_cli("sweep", str(path))
        assert code == 2
        assert "malformed JSON" in err


class TestPredict:
    def test_constructed_inverse(self, run_cli):
        code, out, _ = run_cli("predict", "--pop-size", repr(math.exp(math.e / 2)), "--s", "1", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["K"] == pytest.approx(math.e, abs=1e-9)

    def test_reference_point(self, run_cli):
        code, out, _ = run_cli("predict", "--pop-size", "1e6", "--mu", "0.01", "--q", "0.02", "--s", "0.01")
        assert code == 0
        lines = dict(line.split(": ", 1) for line in out.splitlines())
        assert float(lines["K"]) == pytest.approx(124.8, abs=0.05)
        assert abs(float(lines["residual"])) <= 1e-9

    def test_zero_selection_exits_2(self, run_cli):
        code, _, _ = run_cli("predict", "--pop-size", "1000", "--s", "0")
        assert code == 2

    def test_out_writes_both_renderings(self, run_cli, tmp_path):
        out = tmp_path / "pred"
        code, _, _ = run_cli("predict", "--pop-size", "1e4", "--s", "0.05", "--out", str(out))
        assert code == 0
        text = (tmp_path / "pred.txt").read_text(encoding="utf-8")
        data = json.loads((tmp_path / "pred.json").read_text(encoding="utf-8"))
        assert f"K: {json.dumps(data['K'])}" in text.splitlines()
        manifest = json.loads((tmp_path / "pred.manifest.json").read_text(encoding="utf-8"))
        assert manifest["subcommand"] == "predict"
        assert manifest["config"]["s"] == 0.05
        assert manifest["outputs"] == [str(tmp_path / "pred.txt"), str(tmp_path / "pred.json")]


class TestValidate:
    def test_unknown_suite(self, run_cli):
        code, _, err = run_cli("validate", "--suite", "nope")
        assert code == 2
        assert "unknown suite" in err

    def test_coupling_suite(self, run_cli, tmp_path):
        config = tmp_path / "validation.yaml"
        config.write_text(
            yaml.safe_dump({"suites": {"coupling": {"config": {"seeds": [0, 1, 2], "horizon": 50.0}}}}),
            encoding="utf-8",
        )
        code, out, _ = run_cli("validate", "--suite", "coupling", "--config", str(config), "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True
        assert payload["checks"][0]["statistic"] == 0.0
