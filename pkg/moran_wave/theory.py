"""
Semi-analytic wave theory: drift law, moment recursion, wave-speed prediction,
birth-death generating function and tail bounds
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import integrate, optimize, special, stats

from moran_wave.models import Params, WavePrediction
from moran_wave.population import Population

logger = structlog.get_logger()

LAMBERT_TOL = 1e-12
FRONT_K_TOL = 1e-9


def drift_rate(params: Params, c2: float) -> float:
    """Expected rate of change of mean fitness: mu(2q-1) + s c2"""
    if c2 < 0:
        raise ValueError(f"c2 must be nonnegative, got {c2}")
    return params.mu * (2.0 * params.q - 1.0) + params.s * c2


@dataclass(frozen=True)
class MomentVector:
    """Central moments c_2..c_nmax; c_0 = 1 and c_1 = 0 are implicit"""

    c: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.c) < 1:
            raise ValueError("need at least c_2")
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "MomentVector":
        return cls(c=tuple(values))

    @classmethod
    def gaussian(cls, c2: float, n_max: int) -> "MomentVector":
        return cls(c=tuple(gaussian_central_moment(c2, n) for n in range(2, n_max + 1)))

    @property
    def n_max(self) -> int:
        return len(self.c) + 1

    def __getitem__(self, n: int) -> float:
        if n == 0:
            return 1.0
        if n == 1:
            return 0.0
        return self.c[n - 2]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.c, dtype=np.float64)


def gaussian_central_moment(c2: float, n: int) -> float:
    """n-th central moment of a normal law with variance c2: (n-1)!! c2^(n/2) for even n"""
    if n < 2:
        raise ValueError(f"moment order must be >= 2, got {n}")
    if c2 < 0:
        raise ValueError(f"variance must be nonnegative, got {c2}")
    if n % 2:
        return 0.0
    return float(special.factorial2(n - 1, exact=True)) * c2 ** (n // 2)


def moment_ode_rhs(m: MomentVector, s: float) -> MomentVector:
    """
    d c_n / dt = s (c_{n+1} - n c_{n-1} c_2) for n = 2..n_max

    c_{n_max+1} is closed with its Gaussian value.
    """
    n_max = m.n_max
    if n_max < 3:
        raise ValueError("moment recursion needs n_max >= 3")
    c2 = m[2]
    closure = gaussian_central_moment(max(c2, 0.0), n_max + 1)

    def c(n: int) -> float:
        return closure if n == n_max + 1 else m[n]

    return MomentVector(c=tuple(s * (c(n + 1) - n * c(n - 1) * c2) for n in range(2, n_max + 1)))


def lambert_w(z: float) -> float:
    """
    Principal branch of the Lambert W function for z >= 0

    Halley iteration started from ln(1 + z) or ln z - ln ln z, kept inside a
    bisection bracket so every step stays on [0, max(1, ln z)]. Converged when
    the residual w e^w - z is below LAMBERT_TOL relative to z.
    """
    z = float(z)
    if math.isnan(z) or z < 0:
        raise ValueError(f"lambert_w is only defined here for z >= 0, got {z}")
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf

    lo, hi = 0.0, max(1.0, math.log(z))
    if z <= math.e:
        w = math.log1p(z)
    else:
        lz = math.log(z)
        w = lz - math.log(lz)
    w = min(max(w, lo), hi)

    tol = LAMBERT_TOL * z
    for _ in range(200):
        ew = math.exp(w)
        f = w * ew - z
        if abs(f) <= tol * 0.25:
            return w
        if f > 0:
            hi = w
        else:
            lo = w
        w1 = w + 1.0
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        candidate = w - dw
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - w) <= 4.0 * np.finfo(float).eps * abs(w):
            return candidate
        w = candidate
    return w


def _front_residual(K: float, pop_size: float, s: float) -> float:
    return K * math.log(s * K) - 2.0 * math.log(pop_size)


def _check_front_inputs(pop_size: float, s: float) -> None:
    if s <= 0:
        raise ValueError(f"front prediction needs s > 0, got {s}")
    if pop_size <= 1:
        raise ValueError(f"front prediction needs N > 1, got {pop_size}")


def predict_front_K(pop_size: float, s: float) -> float:
    """Root of K ln(sK) = 2 ln N on the branch sK > 1"""
    _check_front_inputs(pop_size, s)
    lo = 1.0 / s
    hi = 2.0 / s
    while _front_residual(hi, pop_size, s) <= 0.0:
        lo, hi = hi, 2.0 * hi
    K = optimize.brentq(
        _front_residual, lo, hi, args=(pop_size, s), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500
    )
    # Newton polish on the smooth branch
    for _ in range(3):
        res = _front_residual(K, pop_size, s)
        if abs(res) <= FRONT_K_TOL * 1e-3:
            break
        K -= res / (math.log(s * K) + 1.0)
    return float(K)


def lambert_front_K(pop_size: float, s: float) -> float:
    """Closed form of the same root: K = 2 ln N / W(2 s ln N)"""
    _check_front_inputs(pop_size, s)
    log_n = math.log(pop_size)
    return 2.0 * log_n / lambert_w(2.0 * s * log_n)


def asymptotic_front_K(pop_size: float, s: float) -> Optional[float]:
    """Two-term expansion using W(z) ~ ln z - ln ln z; None when z = 2 s ln N <= e"""
    _check_front_inputs(pop_size, s)
    log_n = math.log(pop_size)
    z = 2.0 * s * log_n
    if z <= math.e:
        return None
    return 2.0 * log_n / (math.log(z) - math.log(math.log(z)))


def front_speed(s: float, K: float, mu: float) -> Optional[float]:
    """(sK - mu) / ln(sK - mu); None when sK - mu <= 1"""
    growth = s * K - mu
    if growth <= 1.0:
        return None
    return growth / math.log(growth)


def solve_consistency(params: Params) -> Optional[float]:
    """
    K solving (sK - mu)/ln(sK - mu) = mu(2q-1) + s K^2/(2 ln N) with sK - mu > 1

    Returns None when no sign change is found.
    """
    return _solve_consistency(params.pop_size, params.mu, params.q, params.s)


def _solve_consistency(pop_size: float, mu: float, q: float, s: float) -> Optional[float]:
    _check_front_inputs(pop_size, s)
    two_log_n = 2.0 * math.log(pop_size)

    def gap(u: float) -> float:
        K = (u + mu) / s
        return u / math.log(u) - mu * (2.0 * q - 1.0) - s * K * K / two_log_n

    lo = 1.0 + 1e-9
    hi = 2.0
    for _ in range(200):
        if gap(hi) < 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        return None
    if gap(lo) <= 0.0:
        return None
    u = optimize.brentq(gap, lo, hi, xtol=1e-14, maxiter=500)
    return float((u + mu) / s)


def predict_wave(pop_size: float, mu: float, q: float, s: float) -> WavePrediction:
    """Wave prediction for a possibly non-integer N"""
    K = predict_front_K(pop_size, s)
    log_n = math.log(pop_size)
    return WavePrediction(
        pop_size=pop_size,
        mu=mu,
        q=q,
        s=s,
        K=K,
        b=K / math.sqrt(2.0 * log_n),
        speed=mu * (2.0 * q - 1.0) + s * K * K / (2.0 * log_n),
        front_speed=front_speed(s, K, mu),
        residual=_front_residual(K, pop_size, s),
        lambert_K=lambert_front_K(pop_size, s),
        asymptotic_K=asymptotic_front_K(pop_size, s),
        consistency_K=_solve_consistency(pop_size, mu, q, s),
    )


def predict_wave_speed(params: Params) -> WavePrediction:
    if params.pop_size < 3:
        raise ValueError(f"wave prediction needs N >= 3, got {params.pop_size}")
    return predict_wave(params.pop_size, params.mu, params.q, params.s)


def front_growth(s: float, K: float, mu: float, t: float) -> float:
    """Expected size multiplier of the leading class after time t: exp((sK - mu) t)"""
    return math.exp((s * K - mu) * t)


def front_advance_waiting_time(s: float, K: float, mu: float, q: float) -> float:
    """
    Median time to the first beneficial mutation on a freshly founded leading class

    Solves q mu / (sK - mu) (exp((sK - mu) t) - 1) = ln 2.
    """
    rate = s * K - mu
    if rate <= 0:
        raise ValueError("leading class does not grow: sK - mu <= 0")
    if q * mu == 0:
        return math.inf
    return math.log1p(rate * math.log(2.0) / (q * mu)) / rate


def deterministic_wave_rhs(
    t: float, P: np.ndarray, classes: np.ndarray, params: Params, cutoff: bool = True
) -> np.ndarray:
    """
    dP_k = mu (q P_{k-1} - P_k + (1-q) P_{k+1}) + s (k - m) P_k on a finite window

    With `cutoff`, classes below 1/N do not grow by selection.
    """
    mu, q, s = params.mu, params.q, params.s
    mass = P.sum()
    m = float(np.dot(classes, P) / mass) if mass > 0 else 0.0
    from_below = np.concatenate(([0.0], P[:-1]))
    from_above = np.concatenate((P[1:], [0.0]))
    growth = s * (classes - m) * P
    if cutoff:
        growth = np.where(P >= 1.0 / params.pop_size, growth, np.minimum(growth, 0.0))
    return mu * (q * from_below - P + (1.0 - q) * from_above) + growth


@dataclass
class DeterministicWave:
    times: np.ndarray
    mean: np.ndarray
    c2: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    speed: float
    classes: np.ndarray
    final: np.ndarray


def integrate_deterministic_wave(
    params: Params,
    initial: Population,
    horizon: float,
    span: int = 200,
    padding: int = 20,
    n_points: int = 201,
    cutoff: bool = True,
) -> DeterministicWave:
    """Integrate the noise-free wave and measure its speed over the second half"""
    classes = np.arange(initial.min_class - padding, initial.max_class + span + 1, dtype=np.float64)
    P0 = np.zeros(classes.size)
    for k, n in initial:
        P0[int(k - classes[0])] = n / initial.total
    t_eval = np.linspace(0.0, horizon, n_points)
    sol = integrate.solve_ivp(
        deterministic_wave_rhs,
        (0.0, horizon),
        P0,
        t_eval=t_eval,
        args=(classes, params, cutoff),
        method="RK45",
        max_step=0.5,
        rtol=1e-8,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"deterministic wave integration failed: {sol.message}")
    P = np.clip(sol.y, 0.0, None)
    P = P / P.sum(axis=0, keepdims=True)
    mean = classes @ P
    dev = classes[:, None] - mean[None, :]
    c2 = np.einsum("kt,kt->t", dev**2, P)
    c3 = np.einsum("kt,kt->t", dev**3, P)
    c4 = np.einsum("kt,kt->t", dev**4, P)
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = np.where(c2 > 0, c3 / c2**1.5, np.nan)
        kurt = np.where(c2 > 0, c4 / c2**2, np.nan)
    half = sol.t >= horizon / 2
    speed = float(stats.linregress(sol.t[half], mean[half]).slope) if half.sum() >= 2 else math.nan
    logger.debug("Deterministic wave integrated", horizon=horizon, speed=speed, nfev=sol.nfev)
    return DeterministicWave(
        times=sol.t,
        mean=mean,
        c2=c2,
        skewness=skew,
        kurtosis=kurt,
        speed=speed,
        classes=classes,
        final=P[:, -1],
    )


def pgf_birth_death(x: float, t: float, a: float, b: float, z0: int) -> float:
    """E[x^Z(t)] for the linear birth-death chain started at z0 (a != b)"""
    if a == b:
        raise ValueError("generating function formula is singular at a == b")
    if a < 0 or b < 0:
        raise ValueError("rates must be nonnegative")
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if z0 < 1:
        raise ValueError(f"z0 must be positive, got {z0}")
    r = (a - b) * t
    if r >= 0:
        e = math.exp(-r)
        num = b * (x - 1.0) - (a * x - b) * e
        den = a * (x - 1.0) - (a * x - b) * e
    else:
        # divide through by exp(-r), which would overflow
        e = math.exp(r)
        num = b * (x - 1.0) * e - (a * x - b)
        den = a * (x - 1.0) * e - (a * x - b)
    ratio = num / den
    if ratio <= 0.0:
        return 0.0
    return float(min(1.0, math.exp(z0 * math.log(ratio))))


def birth_death_tail_bound(a: float, b: float, M: float, t: float, k: int, z0: int) -> float:
    """Upper bound (1 - 1/M)^(-k) (4b/a)^z0 on P(Z(t) <= k) for a > b > 0, M >= 1"""
    if not a > b:
        raise ValueError("tail bound needs a > b")
    if b <= 0:
        raise ValueError("tail bound needs b > 0")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if k < 0 or z0 < 1:
        raise ValueError("need k >= 0 and z0 >= 1")
    t_min = max(math.log(2.0), math.log(a * M / b)) / (a - b)
    if t < t_min:
        raise ValueError(f"tail bound needs t >= {t_min:.6g}, got {t}")
    base = (4.0 * b / a) ** z0
    if k == 0:
        return base
    if M == 1:
        return math.inf
    return (1.0 - 1.0 / M) ** (-k) * base


def binomial_lower_tail_bound(n: int, gamma: float) -> float:
    """exp(-n gamma^2 / 2), bounding P(Binomial(n, gamma) <= n gamma / 2)"""
    if n < 1 or not 0.0 < gamma <= 1.0:
        raise ValueError("need n >= 1 and gamma in (0, 1]")
    return math.exp(-n * gamma * gamma / 2.0)


def binomial_lower_tail_exact(n: int, gamma: float) -> float:
    """P(Binomial(n, gamma) <= n gamma / 2) by CDF summation"""
    return float(stats.binom.cdf(math.floor(n * gamma / 2.0), n, gamma))


def poisson_lower_tail_bound(lam: float, n: int) -> float:
    """exp(-lam - 1/(2n)) / sqrt(2 pi) (lam / n^2)^n, a lower bound on P(Poisson(lam) >= n)"""
    if lam <= 0 or n < 1:
        raise ValueError("need lam > 0 and n >= 1")
    return math.exp(-lam - 1.0 / (2.0 * n) + n * math.log(lam / (n * n))) / math.sqrt(2.0 * math.pi)


def poisson_upper_tail_log(lam: float, n: int, max_terms: int = 10_000) -> float:
    """log P(Poisson(lam) >= n) for lam < n, summed in log space"""
    if lam <= 0 or n < 1:
        raise ValueError("need lam > 0 and n >= 1")
    log_pmf = -lam + n * math.log(lam) - float(special.gammaln(n + 1))
    log_terms = [0.0]
    acc = 0.0
    for j in range(1, max_terms):
        acc += math.log(lam) - math.log(n + j)
        log_terms.append(acc)
        if acc < -40.0:
            break
    return log_pmf + float(special.logsumexp(log_terms))


@dataclass(frozen=True)
class PoissonTailCheck:
    pop_size: int
    mu: float
    log_tail: float
    tail: float
    log_reference: float
    within_bound: bool


def poisson_upper_tail_check(pop_size: int, mu: float, constant: float = 10.0) -> PoissonTailCheck:
    """Exact log P(Poisson(N mu) >= N^2) against the reference exp(-N ln N) times `constant`"""
    lam = pop_size * mu
    if lam >= pop_size**2:
        raise ValueError("need N mu < N^2")
    log_tail = poisson_upper_tail_log(lam, pop_size**2)
    log_reference = -pop_size * math.log(pop_size)
    return PoissonTailCheck(
        pop_size=pop_size,
        mu=mu,
        log_tail=log_tail,
        tail=math.exp(log_tail),
        log_reference=log_reference,
        within_bound=log_tail <= log_reference + math.log(constant),
    )
