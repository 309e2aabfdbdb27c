"""
Exact small-population oracle

With mu = 0 fitness values can only be copied, so a population of N started
on classes 0..N-1 lives on the finite set of count vectors (n_0..n_{N-1})
summing to N. Its time-t law is computed by uniformization and compared with
class-level engine runs.
"""

import itertools
import math
from typing import Dict, List, Tuple

import numpy as np
import structlog
from scipy import stats

from moran_wave.engine.classes import ClassLevelEngine
from moran_wave.engine.rng import make_generator
from moran_wave.models import OracleReport, Params, SimConfig
from moran_wave.population import Population

logger = structlog.get_logger()

TRUNCATION_MASS = 1e-12
ORACLE_SIZES = (2, 3)

State = Tuple[int, ...]


def enumerate_states(pop_size: int) -> List[State]:
    """All count vectors over classes 0..N-1 that sum to N, in lexicographic order"""
    return [
        c
        for c in itertools.product(range(pop_size + 1), repeat=pop_size)
        if sum(c) == pop_size
    ]


def generator_matrix(pop_size: int, s: float) -> Tuple[np.ndarray, List[State]]:
    """
    Rate matrix Q over enumerate_states(N)

    Class k replaces class l at rate n_k n_l / N, plus s (k - l) n_k n_l / N
    when k > l.
    """
    states = enumerate_states(pop_size)
    index = {st: i for i, st in enumerate(states)}
    Q = np.zeros((len(states), len(states)))
    for i, st in enumerate(states):
        for k, l in itertools.permutations(range(pop_size), 2):
            if st[k] == 0 or st[l] == 0:
                continue
            rate = st[k] * st[l] / pop_size
            if k > l:
                rate += s * (k - l) * st[k] * st[l] / pop_size
            dest = list(st)
            dest[k] += 1
            dest[l] -= 1
            Q[i, index[tuple(dest)]] += rate
        Q[i, i] = -Q[i].sum()
    return Q, states


def transient_distribution(Q: np.ndarray, p0: np.ndarray, t: float) -> np.ndarray:
    """p0 exp(Qt) by uniformization, Poisson terms truncated at mass 1 - 1e-12"""
    rate = float(np.max(-np.diag(Q)))
    if rate == 0.0 or t == 0.0:
        return p0.copy()
    P = np.eye(Q.shape[0]) + Q / rate
    n_terms = int(stats.poisson.ppf(1.0 - TRUNCATION_MASS, rate * t)) + 1
    weights = stats.poisson.pmf(np.arange(n_terms), rate * t)
    term = p0.copy()
    out = np.zeros_like(p0)
    for w in weights:
        out += w * term
        term = term @ P
    return out / out.sum()


def absorption_probabilities(Q: np.ndarray, states: List[State], start: State) -> Dict[int, float]:
    """Probability of fixing on each class, from the first-step linear system"""
    absorbing = [i for i, st in enumerate(states) if max(st) == sum(st)]
    transient = [i for i in range(len(states)) if i not in absorbing]
    idx = states.index(start)
    fixed_class = {i: states[i].index(max(states[i])) for i in absorbing}
    if idx in absorbing:
        return {k: float(k == fixed_class[idx]) for k in range(len(start))}
    A = -Q[np.ix_(transient, transient)]
    B = Q[np.ix_(transient, absorbing)]
    H = np.linalg.solve(A, B)
    row = H[transient.index(idx)]
    return {fixed_class[a]: float(row[j]) for j, a in enumerate(absorbing)}


def small_instance_oracle(
    pop_size: int, t: float, replicates: int, s: float = 0.5, seed: int = 0
) -> OracleReport:
    """
    Exact law at time t versus `replicates` class-level runs

    One generator drives all replicates; each replicate starts from one
    individual on each class 0..N-1.
    """
    if pop_size not in ORACLE_SIZES:
        raise ValueError(f"oracle supports N in {ORACLE_SIZES}, got {pop_size}")
    if s <= 0 or t <= 0 or replicates < 1:
        raise ValueError("oracle needs s > 0, t > 0 and replicates >= 1")

    Q, states = generator_matrix(pop_size, s)
    start: State = tuple([1] * pop_size)
    p0 = np.zeros(len(states))
    p0[states.index(start)] = 1.0
    exact = transient_distribution(Q, p0, t)

    cfg = SimConfig(
        params=Params(pop_size=pop_size, mu=0.0, q=0.5, s=s),
        horizon=t,
        record_interval=t,
        seed=seed,
        mode="class_level",
    )
    engine = ClassLevelEngine(cfg)
    rng = make_generator(seed)
    initial = Population.from_counts({k: 1 for k in range(pop_size)})
    hits = np.zeros(len(states), dtype=np.int64)
    index = {st: i for i, st in enumerate(states)}
    for _ in range(replicates):
        final = engine.run(initial, rng=rng).final
        hits[index[tuple(final.counts.get(k, 0) for k in range(pop_size))]] += 1
    empirical = hits / replicates

    top = pop_size - 1
    top_state = states.index(tuple(pop_size if k == top else 0 for k in range(pop_size)))
    p_top = float(empirical[top_state])
    absorption = {
        "exact_fix_top": absorption_probabilities(Q, states, start)[top],
        "exact_fixed_top_by_t": float(exact[top_state]),
        "empirical_fixed_top_by_t": p_top,
        "empirical_fixed_top_stderr": math.sqrt(p_top * (1.0 - p_top) / replicates),
    }
    tv = 0.5 * float(np.abs(exact - empirical).sum())
    logger.info(
        "Oracle comparison finished", pop_size=pop_size, s=s, t=t, replicates=replicates, tv_distance=tv
    )
    return OracleReport(
        pop_size=pop_size,
        s=s,
        t=t,
        replicates=replicates,
        states=[list(st) for st in states],
        exact=exact.tolist(),
        empirical=empirical.tolist(),
        tv_distance=tv,
        absorption=absorption,
    )
