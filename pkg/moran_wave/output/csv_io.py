"""
CSV emission for trajectories and sweeps

Reals are written with 17 significant digits, absent values as empty
fields, rows end in a bare newline.
"""

import csv
import io
import math
from pathlib import Path
from typing import IO, Iterable, List, Optional, Sequence, Union

from moran_wave.models import SweepRow
from moran_wave.population import CSV_FIELDS, TrajectoryRecord

SWEEP_FIELDS = (
    "N",
    "mu",
    "q",
    "s",
    "replicate",
    "seed",
    "adaptation_rate",
    "rate_sd",
    "mean_c2",
)

Target = Union[str, Path, IO[str]]


def format_real(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{float(value):.17g}"


def format_int(value: Optional[int]) -> str:
    return "" if value is None else str(int(value))


def _write(target: Target, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as f:
            _write(f, header, rows)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def trajectory_row(r: TrajectoryRecord) -> List[str]:
    return [
        format_real(r.time),
        format_real(r.mean_fitness),
        format_real(r.c2),
        format_real(r.c3),
        format_real(r.c4),
        format_int(r.k_c),
        format_int(r.k_d),
        format_int(r.k_w),
        format_int(r.min_class),
        format_int(r.max_class),
    ]


def write_trajectory_csv(records: Iterable[TrajectoryRecord], target: Target) -> None:
    _write(target, CSV_FIELDS, (trajectory_row(r) for r in records))


def trajectory_csv_text(records: Iterable[TrajectoryRecord]) -> str:
    buf = io.StringIO()
    write_trajectory_csv(records, buf)
    return buf.getvalue()


def _opt_int(text: str) -> Optional[int]:
    return int(text) if text != "" else None


def read_trajectory_csv(source: Union[str, Path]) -> List[TrajectoryRecord]:
    with open(source, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [
            TrajectoryRecord(
                time=float(row["time"]),
                mean_fitness=float(row["mean_fitness"]),
                c2=float(row["c2"]),
                c3=float(row["c3"]),
                c4=float(row["c4"]),
                k_c=_opt_int(row["k_c"]),
                k_d=_opt_int(row["k_d"]),
                k_w=int(row["k_w"]),
                min_class=int(row["min_class"]),
                max_class=int(row["max_class"]),
            )
            for row in reader
        ]


def sweep_row(row: SweepRow) -> List[str]:
    p = row.params
    return [
        str(p.pop_size),
        format_real(p.mu),
        format_real(p.q),
        format_real(p.s),
        str(row.replicate),
        str(row.seed),
        format_real(row.adaptation_rate),
        format_real(row.rate_sd),
        format_real(row.mean_c2),
    ]


def write_sweep_csv(rows: Iterable[SweepRow], target: Target) -> None:
    _write(target, SWEEP_FIELDS, (sweep_row(r) for r in rows))


def read_sweep_csv(source: Union[str, Path]) -> List[dict]:
    with open(source, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
