"""
Command-line entry point: moran-wave {simulate,sweep,predict,validate}
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import structlog
from pydantic import ValidationError

from moran_wave import __version__
from moran_wave.config import load_settings, settings, use_settings
from moran_wave.engine.classes import ClassLevelEngine
from moran_wave.engine.individuals import IndividualLevelEngine, run_coupled
from moran_wave.errors import EXIT_FAILURE, EXIT_OK, ConfigError, MoranWaveError
from moran_wave.experiments.estimation import log_growth_fit
from moran_wave.experiments.sweep import run_sweep
from moran_wave.logging_setup import configure_logging
from moran_wave.models import Params, SimConfig, SweepConfig
from moran_wave.output.csv_io import write_sweep_csv, write_trajectory_csv
from moran_wave.output.manifest import build_manifest, manifest_path_for, write_manifest
from moran_wave.output.reports import render_json, render_text
from moran_wave.output.svg import render_sweep_plot
from moran_wave.population import IndividualState, Population
from moran_wave.profiler import RunProfiler
from moran_wave.theory import predict_wave
from moran_wave.validation.runner import SuiteRunner, available_suites

logger = structlog.get_logger()

SIM_MODES = ("class_level", "individual_level", "coupled_neutral")


def _validated(factory: Callable[..., Any], prefix: str = "", **kwargs: Any) -> Any:
    try:
        return factory(**kwargs)
    except ValidationError as e:
        raise ConfigError.from_validation(e, prefix=prefix)


def _emit_report(payload: Any, as_json: bool, out: Optional[Path]) -> None:
    text = render_json(payload) if as_json else render_text(payload)
    sys.stdout.write(text)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.with_suffix(".txt").write_text(render_text(payload), encoding="utf-8")
        out.with_suffix(".json").write_text(render_json(payload), encoding="utf-8")


def cmd_simulate(args: argparse.Namespace) -> int:
    profiler = RunProfiler("simulate")
    params = _validated(Params, "params", pop_size=args.pop_size, mu=args.mu, q=args.q, s=args.s)
    cfg: SimConfig = _validated(
        SimConfig,
        params=params,
        horizon=args.horizon,
        record_interval=args.record_interval,
        seed=args.seed,
        mode=args.mode,
        event_budget=args.event_budget,
        kd_beta=args.kd_beta if args.kd_beta is not None else settings.KD_BETA,
    )
    if args.initial_width < 1:
        raise ConfigError("--initial-width must be >= 1", path="initial_width")
    initial = Population.uniform_spread(params.pop_size, args.initial_width)
    logger.info("Starting simulation", mode=cfg.mode, seed=cfg.seed, **params.model_dump())

    neutral_records = None
    with profiler.time_phase("simulate", mode=cfg.mode):
        if cfg.mode == "class_level":
            run = ClassLevelEngine(cfg).run(initial)
            records = run.records
        elif cfg.mode == "individual_level":
            run, _, _ = IndividualLevelEngine(cfg).run(IndividualState.from_population(initial))
            records = run.records
        else:
            coupled = run_coupled(cfg, IndividualState.from_population(initial, coupled=True))
            run = coupled.selected
            records = run.records
            neutral_records = coupled.neutral.records
    logger.info("Simulation finished", events=run.events, **run.tallies)

    outputs: List[Path] = []
    with profiler.time_phase("write"):
        if args.out is None:
            write_trajectory_csv(records, sys.stdout)
            if neutral_records is not None:
                logger.warning("Neutral trajectory is only written with --out")
        else:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            write_trajectory_csv(records, out)
            outputs.append(out)
            if neutral_records is not None:
                neutral_out = out.with_name(f"{out.stem}_neutral{out.suffix or '.csv'}")
                write_trajectory_csv(neutral_records, neutral_out)
                outputs.append(neutral_out)
    if args.out is not None:
        config = {
            "sim": cfg.model_dump(mode="json"),
            "initial_width": args.initial_width,
            "event_budget": cfg.event_budget or settings.EVENT_BUDGET,
            "events": run.events,
        }
        manifest = build_manifest("simulate", config, profiler, outputs, master_seed=cfg.seed)
        write_manifest(manifest, manifest_path_for(outputs[0]))
    return EXIT_OK


def load_sweep_config(path: Path) -> SweepConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read sweep config: {e}", path=str(path))
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}", path=str(path))
    if not isinstance(data, dict):
        raise ConfigError("sweep config must be a JSON object", path="$")
    data.setdefault("burn_in_fraction", settings.DEFAULT_BURN_IN)
    data.setdefault("kd_beta", settings.KD_BETA)
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError.from_validation(e)


def cmd_sweep(args: argparse.Namespace) -> int:
    profiler = RunProfiler("sweep")
    with profiler.time_phase("load_config"):
        cfg = load_sweep_config(Path(args.config))
    workers = args.workers or settings.SWEEP_WORKERS
    with profiler.time_phase("run", cells=len(cfg.grid) * cfg.replicates, workers=workers):
        result = run_sweep(cfg, workers=workers)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    svg_path = out_dir / "sweep.svg"
    with profiler.time_phase("write"):
        write_sweep_csv(result.rows, csv_path)
        svg_path.write_text(render_sweep_plot(result), encoding="utf-8")

    for fit in log_growth_fit(result):
        logger.info(
            "Rate against ln N",
            q=fit.q,
            slope=fit.slope,
            r_squared=fit.r_squared,
            increasing=fit.increasing,
        )
    failed = result.failed_rows()
    if failed:
        logger.warning("Some sweep cells failed", failed=len(failed), total=len(result.rows))

    manifest = build_manifest(
        "sweep",
        {"sweep": cfg.model_dump(mode="json"), "workers": workers, "config_file": str(args.config)},
        profiler,
        [csv_path, svg_path],
        master_seed=cfg.master_seed,
    )
    write_manifest(manifest, out_dir / "manifest.json")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    profiler = RunProfiler("predict")
    if args.s <= 0:
        raise ConfigError("the wave-speed predictor needs --s > 0", path="s")
    if not math.isfinite(args.pop_size) or args.pop_size < 3:
        raise ConfigError("the wave-speed predictor needs --pop-size >= 3", path="pop_size")
    if args.mu < 0 or not 0.0 <= args.q <= 1.0:
        raise ConfigError("need --mu >= 0 and --q in [0, 1]", path="mu" if args.mu < 0 else "q")
    with profiler.time_phase("predict"):
        prediction = predict_wave(args.pop_size, args.mu, args.q, args.s)
    logger.debug("Prediction computed", K=prediction.K, residual=prediction.residual)
    out = Path(args.out) if args.out else None
    _emit_report(prediction, args.json, out)
    if out is not None:
        manifest = build_manifest(
            "predict",
            {"pop_size": args.pop_size, "mu": args.mu, "q": args.q, "s": args.s},
            profiler,
            [out.with_suffix(".txt"), out.with_suffix(".json")],
        )
        write_manifest(manifest, manifest_path_for(out))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    profiler = RunProfiler("validate")
    runner = SuiteRunner(args.config)
    with profiler.time_phase("validate", suites=args.suite or "all"):
        report = runner.run(args.suite)
    payload: Dict[str, Any] = {
        "passed": report.passed,
        "suites": report.suites,
        "checks": [c.model_dump(mode="python") for c in report.checks],
    }
    out = Path(args.out) if args.out else None
    _emit_report(payload, args.json, out)
    if out is not None:
        manifest = build_manifest(
            "validate",
            {"suites": report.suites, "config_file": str(runner.config_path)},
            profiler,
            [out.with_suffix(".txt"), out.with_suffix(".json")],
        )
        write_manifest(manifest, manifest_path_for(out))
    return EXIT_OK if report.passed else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moran-wave",
        description="Exact simulation and analysis of adaptation in the Moran model",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--settings", type=Path, default=None, help="YAML settings file")
    parser.add_argument("--debug", action="store_true", help="Console logs at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Run one simulation and write its trajectory CSV")
    sim.add_argument("--pop-size", type=int, required=True)
    sim.add_argument("--mu", type=float, required=True)
    sim.add_argument("--q", type=float, required=True)
    sim.add_argument("--s", type=float, required=True)
    sim.add_argument("--horizon", type=float, required=True)
    sim.add_argument("--record-interval", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--mode", choices=SIM_MODES, default="class_level")
    sim.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    sim.add_argument("--initial-width", type=int, default=1, help="Spread the start over classes 0..W-1")
    sim.add_argument("--kd-beta", type=float, default=None)
    sim.add_argument("--event-budget", type=int, default=None)
    sim.set_defaults(handler=cmd_simulate)

    sweep = sub.add_parser("sweep", help="Run a parameter sweep from a JSON config")
    sweep.add_argument("config", help="Sweep config (JSON, see docs/sweep_config.md)")
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--out-dir", default=".")
    sweep.set_defaults(handler=cmd_sweep)

    pred = sub.add_parser("predict", help="Wave-speed prediction")
    pred.add_argument("--pop-size", type=float, required=True)
    pred.add_argument("--mu", type=float, default=0.0)
    pred.add_argument("--q", type=float, default=0.5)
    pred.add_argument("--s", type=float, required=True)
    pred.add_argument("--json", action="store_true")
    pred.add_argument("--out", default=None, help="Write <out>.txt and <out>.json")
    pred.set_defaults(handler=cmd_predict)

    val = sub.add_parser("validate", help="Run validation suites")
    val.add_argument("--suite", action="append", default=None, help="Repeatable; default all enabled suites")
    val.add_argument("--config", type=Path, default=None, help="Validation YAML file")
    val.add_argument("--json", action="store_true")
    val.add_argument("--out", default=None, help="Write <out>.txt and <out>.json")
    val.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        use_settings(load_settings(args.settings, DEBUG=True if args.debug else None))
        configure_logging(settings)
        if args.command == "validate" and args.suite:
            known = available_suites()
            unknown = [s for s in args.suite if s not in known]
            if unknown:
                raise ConfigError(f"unknown suite {unknown[0]!r}; choose from {', '.join(known)}", path="suite")
        return int(args.handler(args))
    except MoranWaveError as e:
        logger.error("Command failed", command=args.command, error_type=e.error_type, path=e.context.get("path"))
        print(f"moran-wave: error: {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
