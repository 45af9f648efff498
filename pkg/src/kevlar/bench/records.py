"""CSV rows shared by every bench: a fixed base schema plus per-bench columns."""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

BASE_COLUMNS = ("bench_id", "size_bytes", "repetition", "duration_ns", "throughput_bytes_per_s")


@dataclass
class BenchRecord:
    """One measurement: a workload unit, its size and its duration."""

    bench_id: str
    size_bytes: int
    repetition: int
    duration_ns: int
    extra: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.duration_ns <= 0:
            raise ValueError("duration_ns must be positive")

    @property
    def throughput_bytes_per_s(self) -> float:
        return self.size_bytes / self.duration_ns * 1e9


def write_csv(records: Iterable[BenchRecord], extra_columns: Sequence[str],
              out: str | Path | TextIO) -> None:
    """Write records as CSV with the base header plus extra_columns."""
    own = isinstance(out, (str, Path))
    fh = open(out, "w", newline="", encoding="utf-8") if own else out
    try:
        writer = csv.writer(fh)
        writer.writerow(list(BASE_COLUMNS) + list(extra_columns))
        for rec in records:
            row = [rec.bench_id, rec.size_bytes, rec.repetition, rec.duration_ns,
                   f"{rec.throughput_bytes_per_s:.3f}"]
            row.extend(rec.extra.get(col, "") for col in extra_columns)
            writer.writerow(row)
    finally:
        if own:
            fh.close()


def read_csv(path: str | Path) -> list[BenchRecord]:
    """Parse a bench CSV back into records (inverse of write_csv)."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            extra = {k: v for k, v in row.items() if k not in BASE_COLUMNS}
            records.append(
                BenchRecord(
                    bench_id=row["bench_id"],
                    size_bytes=int(row["size_bytes"]),
                    repetition=int(row["repetition"]),
                    duration_ns=int(row["duration_ns"]),
                    extra=extra,
                )
            )
    return records


def percentile_summary(values: Sequence[float]) -> dict[str, float]:
    """min / 25th / median / 75th / max of a sample."""
    data = sorted(values)
    if not data:
        raise ValueError("empty sample")
    if len(data) == 1:
        q1 = q2 = q3 = data[0]
    else:
        q1, q2, q3 = statistics.quantiles(data, n=4, method="inclusive")
    return {"min": data[0], "p25": q1, "p50": q2, "p75": q3, "max": data[-1]}
