"""Group-by aggregation of collision-ratio CSV sweeps.

The input schema is the primary CLI's delimited output:
``ensemble,M,N,q,circuit,seed,cf_count,samples,ratio``.  Aggregation keys are
(ensemble, q) series over the photon-number axis; the spread bar is the
standard deviation of per-circuit ratios, matching how the sweeps are
reported upstream.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

EXPECTED_HEADER = ["ensemble", "M", "N", "q", "circuit", "seed", "cf_count", "samples", "ratio"]


class SchemaError(ValueError):
    """The CSV does not carry the collision-ratio schema."""


@dataclass(frozen=True)
class SeriesPoint:
    photons: int
    mean: float
    std: float
    circuits: int


@dataclass(frozen=True)
class Series:
    ensemble: str
    q: int
    points: tuple[SeriesPoint, ...]

    @property
    def label(self) -> str:
        if self.ensemble == "haar":
            return "haar"
        base = self.ensemble if self.ensemble != "local" else "local"
        return f"{base} q={self.q}"


def read_records(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        if header != EXPECTED_HEADER:
            raise SchemaError(f"{path} header {header} != {EXPECTED_HEADER}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EXPECTED_HEADER):
                raise SchemaError(f"{path}:{line_no}: expected {len(EXPECTED_HEADER)} fields")
            rows.append(
                {
                    "ensemble": row[0],
                    "M": int(row[1]),
                    "N": int(row[2]),
                    "q": int(row[3]),
                    "circuit": int(row[4]),
                    "seed": int(row[5]),
                    "cf_count": int(row[6]),
                    "samples": int(row[7]),
                    "ratio": float(row[8]),
                }
            )
    if not rows:
        raise SchemaError(f"{path} has a header but no records")
    return rows


def aggregate(records: list[dict]) -> list[Series]:
    """Mean and standard deviation of per-circuit ratios per (ensemble, q, N)."""
    cells: dict[tuple[str, int, int], list[float]] = {}
    for rec in records:
        cells.setdefault((rec["ensemble"], rec["q"], rec["N"]), []).append(rec["ratio"])
    series_keys = sorted({(ensemble, q) for ensemble, q, _ in cells})
    out = []
    for ensemble, q in series_keys:
        points = []
        for (ens, qq, photons), ratios in sorted(cells.items()):
            if (ens, qq) != (ensemble, q):
                continue
            mean = sum(ratios) / len(ratios)
            if len(ratios) > 1:
                var = sum((r - mean) ** 2 for r in ratios) / (len(ratios) - 1)
            else:
                var = 0.0
            points.append(
                SeriesPoint(photons=photons, mean=mean, std=math.sqrt(var), circuits=len(ratios))
            )
        out.append(Series(ensemble=ensemble, q=q, points=tuple(points)))
    return out


def series_to_jsonable(series: list[Series]) -> list[dict]:
    return [
        {
            "ensemble": s.ensemble,
            "q": s.q,
            "label": s.label,
            "points": [
                {
                    "N": p.photons,
                    "mean": p.mean,
                    "std": p.std,
                    "circuits": p.circuits,
                }
                for p in s.points
            ],
        }
        for s in series
    ]
