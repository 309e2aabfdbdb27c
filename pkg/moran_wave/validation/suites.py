"""
Validation suites behind `moran-wave validate`

Each suite takes its `config` mapping from the validation YAML (missing keys
fall back to DEFAULTS) and returns a list of CheckResult. Seeds are fixed, so
a suite gives the same verdict on every run of the same build.
"""

import itertools
import math
from typing import Any, Dict, List

import numpy as np
import structlog
from scipy import stats

from moran_wave.engine.birth_death import birth_death_terminal_sample
from moran_wave.engine.classes import ClassLevelEngine
from moran_wave.engine.individuals import run_coupled
from moran_wave.engine.rng import derive_run_seed, make_generator
from moran_wave.errors import CouplingViolationError
from moran_wave.experiments.estimation import (
    drift_identity_check,
    estimate_adaptation_rate,
    front_speed_check,
    pool_drift_reports,
)
from moran_wave.experiments.oracle import small_instance_oracle
from moran_wave.models import BirthDeathConfig, CheckResult, Params, SimConfig
from moran_wave.population import IndividualState, Population
from moran_wave.theory import (
    binomial_lower_tail_bound,
    binomial_lower_tail_exact,
    birth_death_tail_bound,
    pgf_birth_death,
    poisson_lower_tail_bound,
    poisson_upper_tail_check,
)
from moran_wave.validation.registry import register_suite

logger = structlog.get_logger()

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "pgf": {
        "rates": [[2.0, 1.0], [1.0, 0.5], [0.5, 0.1]],
        "z0": [1, 3],
        "t": [0.5, 1.0, 2.0],
        "x": [0.2, 0.5, 0.8],
        "replicates": 100_000,
        "z_limit": 3.0,
        "seed": 20240101,
    },
    "bounds": {
        "binomial_n": list(range(10, 201, 10)),
        "binomial_gamma": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        "poisson_lambda": [0.5, 1.0, 2.0],
        "poisson_n": list(range(1, 21)),
        "upper_tail_cases": [[10, 0.01], [20, 1.0], [30, 0.1], [50, 0.01]],
        "upper_tail_constant": 10.0,
        "birth_death_cases": [
            {"a": 2.0, "b": 1.0, "z0": 10, "M": 2.0, "k": 3, "t": 2.0},
            {"a": 2.0, "b": 0.25, "z0": 4, "M": 2.0, "k": 0, "t": 2.0},
        ],
        "birth_death_replicates": 100_000,
        "seed": 7,
    },
    "coupling": {
        "pop_size": 100,
        "mu": 0.01,
        "q": 0.5,
        "s": 0.05,
        "horizon": 200.0,
        "record_interval": 1.0,
        "seeds": list(range(20)),
    },
    "oracle": {
        "cases": [
            {"pop_size": 2, "s": 1.0, "t": 1.0},
            {"pop_size": 3, "s": 0.5, "t": 2.0},
        ],
        "absorption": {"pop_size": 2, "s": 1.0, "t": 50.0, "expected": 2.0 / 3.0},
        "replicates": 100_000,
        "tv_limit": 0.02,
        "z_limit": 3.0,
        "seed": 11,
    },
    "drift": {
        "pop_size": 1000,
        "mu": 0.01,
        "s": 0.01,
        "q": [0.0, 0.02, 0.5],
        "front_q": 0.02,
        "replicates": 8,
        "horizon": 2000.0,
        "record_interval": 1.0,
        "burn_in_fraction": 0.2,
        "z_limit": 3.0,
        "seed": 3,
    },
}


def _merged(name: str, config: Dict[str, Any]) -> Dict[str, Any]:
    return {**DEFAULTS[name], **(config or {})}


@register_suite("pgf", priority=10, description="Monte Carlo E[x^Z] against the closed-form generating function")
def pgf_suite(config: Dict[str, Any]) -> List[CheckResult]:
    cfg = _merged("pgf", config)
    checks: List[CheckResult] = []
    cells = itertools.product(cfg["rates"], cfg["z0"], cfg["t"])
    for cell_index, ((a, b), z0, t) in enumerate(cells):
        bd = BirthDeathConfig(a=a, b=b, z0=z0, horizon=t, seed=cfg["seed"])
        sample = birth_death_terminal_sample(
            bd, cfg["replicates"], rng=make_generator(cfg["seed"], replicate=cell_index)
        )
        for x in cfg["x"]:
            values = np.power(float(x), sample.astype(np.float64))
            estimate = float(values.mean())
            se = float(values.std(ddof=1) / math.sqrt(values.size))
            exact = pgf_birth_death(x, t, a, b, z0)
            z = (estimate - exact) / se if se > 0 else 0.0
            checks.append(
                CheckResult(
                    suite="pgf",
                    name=f"a={a:g} b={b:g} z0={z0} t={t:g} x={x:g}",
                    passed=abs(z) <= cfg["z_limit"],
                    statistic=z,
                    threshold=cfg["z_limit"],
                    details={"exact": exact, "estimate": estimate, "stderr": se},
                )
            )
    return checks


@register_suite("bounds", priority=20, description="Tail bounds against exact probabilities")
def bounds_suite(config: Dict[str, Any]) -> List[CheckResult]:
    cfg = _merged("bounds", config)
    checks: List[CheckResult] = []

    worst = -math.inf
    failures = []
    for n, gamma in itertools.product(cfg["binomial_n"], cfg["binomial_gamma"]):
        exact = binomial_lower_tail_exact(n, gamma)
        bound = binomial_lower_tail_bound(n, gamma)
        worst = max(worst, exact - bound)
        if exact > bound:
            failures.append([n, gamma])
    checks.append(
        CheckResult(
            suite="bounds",
            name="binomial lower tail",
            passed=not failures,
            statistic=worst,
            threshold=0.0,
            details={"cells": len(cfg["binomial_n"]) * len(cfg["binomial_gamma"]), "failures": failures},
        )
    )

    worst = -math.inf
    failures = []
    for lam, n in itertools.product(cfg["poisson_lambda"], cfg["poisson_n"]):
        exact = float(stats.poisson.sf(n - 1, lam))
        bound = poisson_lower_tail_bound(lam, n)
        worst = max(worst, bound - exact)
        if bound > exact:
            failures.append([lam, n])
    checks.append(
        CheckResult(
            suite="bounds",
            name="poisson lower tail",
            passed=not failures,
            statistic=worst,
            threshold=0.0,
            details={"cells": len(cfg["poisson_lambda"]) * len(cfg["poisson_n"]), "failures": failures},
        )
    )

    for pop_size, mu in cfg["upper_tail_cases"]:
        result = poisson_upper_tail_check(int(pop_size), float(mu), cfg["upper_tail_constant"])
        checks.append(
            CheckResult(
                suite="bounds",
                name=f"poisson upper tail N={pop_size} mu={mu:g}",
                passed=result.within_bound,
                statistic=result.log_tail,
                threshold=result.log_reference + math.log(cfg["upper_tail_constant"]),
                details={"log_tail": result.log_tail, "log_reference": result.log_reference},
            )
        )

    mus = sorted({float(mu) for _, mu in cfg["upper_tail_cases"]})
    for mu in mus:
        tails = [poisson_upper_tail_check(n, mu).log_tail for n in (5, 10, 20, 40)]
        checks.append(
            CheckResult(
                suite="bounds",
                name=f"poisson upper tail decreasing in N, mu={mu:g}",
                passed=all(b < a for a, b in zip(tails, tails[1:])),
                details={"log_tails": tails},
            )
        )

    for case_index, case in enumerate(cfg["birth_death_cases"]):
        bound = birth_death_tail_bound(case["a"], case["b"], case["M"], case["t"], case["k"], case["z0"])
        bd = BirthDeathConfig(a=case["a"], b=case["b"], z0=case["z0"], horizon=case["t"], seed=cfg["seed"])
        sample = birth_death_terminal_sample(
            bd, cfg["birth_death_replicates"], rng=make_generator(cfg["seed"], replicate=case_index)
        )
        p_hat = float(np.mean(sample <= case["k"]))
        checks.append(
            CheckResult(
                suite="bounds",
                name=f"birth-death tail a={case['a']:g} b={case['b']:g} z0={case['z0']} k={case['k']}",
                passed=p_hat <= bound,
                statistic=p_hat,
                threshold=bound,
                details=dict(case),
            )
        )
    return checks


@register_suite("coupling", priority=30, description="Neutral shadow never exceeds the selected process")
def coupling_suite(config: Dict[str, Any]) -> List[CheckResult]:
    cfg = _merged("coupling", config)
    params = Params(pop_size=cfg["pop_size"], mu=cfg["mu"], q=cfg["q"], s=cfg["s"])
    violations = 0
    events = 0
    first_error = None
    for seed in cfg["seeds"]:
        sim = SimConfig(
            params=params,
            horizon=cfg["horizon"],
            record_interval=cfg["record_interval"],
            seed=seed,
            mode="coupled_neutral",
        )
        initial = IndividualState.from_population(Population.point_mass(params.pop_size), coupled=True)
        try:
            run = run_coupled(sim, initial)
            events += run.selected.events
        except CouplingViolationError as e:
            violations += 1
            first_error = first_error or e.message
    checks = [
        CheckResult(
            suite="coupling",
            name="domination Y_i <= X_i",
            passed=violations == 0,
            statistic=float(violations),
            threshold=0.0,
            details={"runs": len(cfg["seeds"]), "events": events, "first_error": first_error},
        )
    ]

    neutral_params = params.model_copy(update={"s": 0.0})
    sim = SimConfig(
        params=neutral_params,
        horizon=cfg["horizon"],
        record_interval=cfg["record_interval"],
        seed=cfg["seeds"][0] if cfg["seeds"] else 0,
        mode="coupled_neutral",
    )
    initial = IndividualState.from_population(Population.point_mass(params.pop_size), coupled=True)
    run = run_coupled(sim, initial)
    identical = bool(np.array_equal(run.final_state.x, run.final_state.y)) and bool(
        np.array_equal(run.selected.table, run.neutral.table, equal_nan=True)
    )
    checks.append(
        CheckResult(
            suite="coupling",
            name="s=0 keeps X and Y identical",
            passed=identical,
            details={"events": run.selected.events},
        )
    )
    return checks


@register_suite("oracle", priority=40, description="Exact small-N transition law against engine frequencies")
def oracle_suite(config: Dict[str, Any]) -> List[CheckResult]:
    cfg = _merged("oracle", config)
    checks: List[CheckResult] = []
    for i, case in enumerate(cfg["cases"]):
        report = small_instance_oracle(
            case["pop_size"], case["t"], cfg["replicates"], s=case["s"], seed=cfg["seed"] + i
        )
        checks.append(
            CheckResult(
                suite="oracle",
                name=f"TV distance N={case['pop_size']} s={case['s']:g} t={case['t']:g}",
                passed=report.tv_distance <= cfg["tv_limit"],
                statistic=report.tv_distance,
                threshold=cfg["tv_limit"],
                details={"states": len(report.states)},
            )
        )

    ab = cfg["absorption"]
    report = small_instance_oracle(ab["pop_size"], ab["t"], cfg["replicates"], s=ab["s"], seed=cfg["seed"] + 100)
    p_hat = report.absorption["empirical_fixed_top_by_t"]
    se = report.absorption["empirical_fixed_top_stderr"]
    z = (p_hat - ab["expected"]) / se if se > 0 else 0.0
    checks.append(
        CheckResult(
            suite="oracle",
            name=f"fixation on the top class N={ab['pop_size']} s={ab['s']:g}",
            passed=abs(z) <= cfg["z_limit"],
            statistic=z,
            threshold=cfg["z_limit"],
            details={
                "empirical": p_hat,
                "expected": ab["expected"],
                "exact_solve": report.absorption["exact_fix_top"],
            },
        )
    )
    return checks


@register_suite("drift", priority=50, description="Drift identity, front speed and ratchet sign")
def drift_suite(config: Dict[str, Any]) -> List[CheckResult]:
    cfg = _merged("drift", config)
    checks: List[CheckResult] = []
    for grid_index, q in enumerate(cfg["q"]):
        params = Params(pop_size=cfg["pop_size"], mu=cfg["mu"], q=q, s=cfg["s"])
        drift_reports = []
        front_reports = []
        rates = []
        for replicate in range(cfg["replicates"]):
            seed = derive_run_seed(cfg["seed"], grid_index, replicate)
            sim = SimConfig(
                params=params,
                horizon=cfg["horizon"],
                record_interval=cfg["record_interval"],
                seed=seed,
            )
            records = ClassLevelEngine(sim).run(Population.point_mass(params.pop_size)).records
            drift_reports.append(drift_identity_check(records, params, cfg["burn_in_fraction"]))
            rates.append(estimate_adaptation_rate(records, cfg["burn_in_fraction"]).rate)
            if q == cfg["front_q"]:
                front_reports.append(front_speed_check(records, params, cfg["burn_in_fraction"]))

        pooled = pool_drift_reports(drift_reports)
        checks.append(
            CheckResult(
                suite="drift",
                name=f"drift identity q={q:g}",
                passed=abs(pooled.z) <= cfg["z_limit"],
                statistic=pooled.z,
                threshold=cfg["z_limit"],
                details={
                    "mean_discrepancy": pooled.mean_discrepancy,
                    "stderr": pooled.stderr,
                    "mean_rate": float(np.mean([r.rate for r in drift_reports])),
                    "mean_predicted": float(np.mean([r.predicted for r in drift_reports])),
                },
            )
        )

        if front_reports:
            d = np.array([r.discrepancy for r in front_reports])
            se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size >= 2 else front_reports[0].stderr
            z = float(d.mean() / se) if se > 0 else 0.0
            checks.append(
                CheckResult(
                    suite="drift",
                    name=f"front speed equals mean speed q={q:g}",
                    passed=abs(z) <= cfg["z_limit"],
                    statistic=z,
                    threshold=cfg["z_limit"],
                    details={
                        "front_slope": float(np.mean([r.front_slope for r in front_reports])),
                        "mean_slope": float(np.mean([r.mean_slope for r in front_reports])),
                    },
                )
            )

        if q == 0.0:
            r = np.array(rates)
            se = float(r.std(ddof=1) / math.sqrt(r.size)) if r.size >= 2 else 0.0
            z = float(r.mean() / se) if se > 0 else -math.inf
            checks.append(
                CheckResult(
                    suite="drift",
                    name="ratchet: q=0 rate below zero",
                    passed=z < -cfg["z_limit"],
                    statistic=z,
                    threshold=-cfg["z_limit"],
                    details={"mean_rate": float(r.mean()), "stderr": se},
                )
            )
    return checks
