"""
Populations over integer fitness classes and the statistics defined on them
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np

CSV_FIELDS: Tuple[str, ...] = (
    "time",
    "mean_fitness",
    "c2",
    "c3",
    "c4",
    "k_c",
    "k_d",
    "k_w",
    "min_class",
    "max_class",
)


@dataclass(frozen=True)
class Population:
    """
    Occupancy counts over fitness classes

    Only occupied classes are stored; counts always sum to `total` (= N).
    """

    counts: Mapping[int, int]
    total: int

    def __post_init__(self) -> None:
        if not self.counts:
            raise ValueError("population has no occupied classes")
        ordered: Dict[int, int] = {}
        for k in sorted(self.counts):
            n = int(self.counts[k])
            if n < 1:
                raise ValueError(f"class {k} has occupancy {n}; absent classes are omitted")
            ordered[int(k)] = n
        if sum(ordered.values()) != self.total:
            raise ValueError(
                f"occupancies sum to {sum(ordered.values())}, expected {self.total}"
            )
        object.__setattr__(self, "counts", ordered)

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "Population":
        """Build from a class->count mapping; zero entries are dropped"""
        if any(n < 0 for n in counts.values()):
            raise ValueError("negative occupancy")
        kept = {int(k): int(n) for k, n in counts.items() if n > 0}
        return cls(counts=kept, total=sum(kept.values()))

    @classmethod
    def point_mass(cls, pop_size: int, k: int = 0) -> "Population":
        return cls(counts={int(k): int(pop_size)}, total=int(pop_size))

    @classmethod
    def uniform_spread(cls, pop_size: int, width: int) -> "Population":
        """Individuals spread as evenly as possible over classes 0..width-1"""
        width = max(1, min(int(width), int(pop_size)))
        base, extra = divmod(int(pop_size), width)
        return cls.from_counts({k: base + (1 if k < extra else 0) for k in range(width)})

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "Population":
        """Histogram of per-individual fitness values"""
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if arr.size == 0:
            raise ValueError("no individuals")
        classes, occ = np.unique(arr.astype(np.int64), return_counts=True)
        return cls(
            counts={int(k): int(n) for k, n in zip(classes, occ)}, total=int(arr.size)
        )

    def to_values(self) -> np.ndarray:
        """One entry per individual, sorted ascending"""
        classes, occ = self.arrays()
        return np.repeat(classes, occ)

    def shift(self, j: int) -> "Population":
        return Population(counts={k + int(j): n for k, n in self.counts.items()}, total=self.total)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(classes, occupancies) as int64 arrays, classes ascending"""
        classes = np.fromiter(self.counts.keys(), dtype=np.int64, count=len(self.counts))
        occ = np.fromiter(self.counts.values(), dtype=np.int64, count=len(self.counts))
        return classes, occ

    @property
    def min_class(self) -> int:
        return next(iter(self.counts))

    @property
    def max_class(self) -> int:
        return next(reversed(self.counts))

    def proportion(self, k: int) -> float:
        """P_k"""
        return self.counts.get(int(k), 0) / self.total

    def range_fraction(self, k: float, l: float) -> float:
        """p_[k,l]: proportion with fitness in the closed range [k, l]"""
        return class_range_fraction(self, k, l)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self.counts.items())


@dataclass(frozen=True)
class TrajectoryRecord:
    """Statistics of the population at one recording time"""

    time: float
    mean_fitness: float
    c2: float
    c3: float
    c4: float
    k_c: Optional[int]
    k_d: Optional[int]
    k_w: int
    min_class: int
    max_class: int

    @classmethod
    def from_row(cls, row: np.ndarray) -> "TrajectoryRecord":
        """Decode one row of an engine record table; NaN marks an absent front"""
        return cls(
            time=float(row[0]),
            mean_fitness=float(row[1]),
            c2=float(row[2]),
            c3=float(row[3]),
            c4=float(row[4]),
            k_c=None if math.isnan(row[5]) else int(row[5]),
            k_d=None if math.isnan(row[6]) else int(row[6]),
            k_w=int(row[7]),
            min_class=int(row[8]),
            max_class=int(row[9]),
        )

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in CSV_FIELDS)


@dataclass
class IndividualState:
    """Per-individual fitness values X and, in coupled runs, the neutral shadow Y"""

    x: np.ndarray
    y: Optional[np.ndarray] = field(default=None)

    def __post_init__(self) -> None:
        self.x = np.ascontiguousarray(self.x, dtype=np.int64)
        if self.x.ndim != 1 or self.x.size == 0:
            raise ValueError("x must be a nonempty vector")
        if self.y is not None:
            self.y = np.ascontiguousarray(self.y, dtype=np.int64)
            if self.y.shape != self.x.shape:
                raise ValueError("x and y must have the same length")
            if np.any(self.y > self.x):
                raise ValueError("neutral values must not exceed selected values")

    @classmethod
    def from_population(cls, p: Population, coupled: bool = False) -> "IndividualState":
        x = p.to_values()
        return cls(x=x, y=x.copy() if coupled else None)

    @property
    def pop_size(self) -> int:
        return int(self.x.size)

    def population(self) -> Population:
        return Population.from_values(self.x)

    def neutral_population(self) -> Optional[Population]:
        return None if self.y is None else Population.from_values(self.y)


def mean_fitness(p: Population) -> float:
    classes, occ = p.arrays()
    return float(np.dot(classes.astype(np.float64), occ) / p.total)


def central_moment(p: Population, n: int) -> float:
    """c_n = sum_k (k - m)^n P_k, two-pass"""
    if n < 2:
        raise ValueError(f"central moment order must be >= 2, got {n}")
    classes, occ = p.arrays()
    dev = classes.astype(np.float64) - mean_fitness(p)
    return float(np.dot(dev**n, occ) / p.total)


def class_range_fraction(p: Population, k: float, l: float) -> float:
    """Proportion of individuals with fitness in [k, l]; infinite ends allowed"""
    if l < k:
        return 0.0
    classes, occ = p.arrays()
    mask = (classes >= k) & (classes <= l)
    return float(occ[mask].sum() / p.total)


def kc_threshold(pop_size: int) -> float:
    return math.log(pop_size) ** 2


def kd_threshold(pop_size: int, beta: float) -> float:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return math.exp(math.log(pop_size) ** (1.0 - beta))


def _tail_front(p: Population, threshold: float) -> Optional[int]:
    # The tail count only changes at occupied classes, so the answer is one of them
    tail = 0
    for k in reversed(p.counts):
        tail += p.counts[k]
        if tail > threshold:
            return k
    return None


def front_kc(p: Population) -> Optional[int]:
    """Largest k with more than (ln N)^2 individuals at or above k"""
    return _tail_front(p, kc_threshold(p.total))


def front_kd(p: Population, beta: float) -> Optional[int]:
    """Largest k with more than exp((ln N)^(1-beta)) individuals at or above k"""
    threshold = kd_threshold(max(p.total, 3), beta)
    if p.total < 3:
        return None
    return _tail_front(p, threshold)


def support_width(p: Population) -> int:
    return p.max_class - p.min_class


def summarize(p: Population, time: float, beta: float = 0.5) -> TrajectoryRecord:
    return TrajectoryRecord(
        time=float(time),
        mean_fitness=mean_fitness(p),
        c2=central_moment(p, 2),
        c3=central_moment(p, 3),
        c4=central_moment(p, 4),
        k_c=front_kc(p),
        k_d=front_kd(p, beta),
        k_w=support_width(p),
        min_class=p.min_class,
        max_class=p.max_class,
    )
