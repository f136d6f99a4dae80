"""Time-series interchange format between simulation and analysis.

One CSV per experiment with the fixed header

    t_s,force_N,deflection_m,R1_ohm,R2_ohm,V1_V,V2_V

LF line endings, 9 significant digits, ``nan`` for open/unusable channel
samples.  A JSON sidecar (``<name>.meta.json``) carries the resolved plan,
seed, digest and per-gauge damage trace so a simulated record can be
replayed exactly.  Lab recordings use the same CSV schema; if only the
voltage columns are populated, resistance is reconstructed downstream
through the divider inversion.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    HeaderError,
    MalformedRowError,
    NonMonotonicTimeError,
    RecordError,
    UnitMismatchError,
)

SCHEMA_VERSION = "1"
CSV_HEADER = ("t_s", "force_N", "deflection_m", "R1_ohm", "R2_ohm", "V1_V", "V2_V")
_COLUMN_UNITS = {"t": "s", "force": "N", "deflection": "m",
                 "R1": "ohm", "R2": "ohm", "V1": "V", "V2": "V"}
_FLOAT_FMT = "%.9g"


@dataclass
class TimeSeriesRecord:
    """Sampled experiment channels plus replay metadata."""

    t: np.ndarray
    force: np.ndarray
    deflection: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.t.size
        for name in ("force", "deflection", "R1", "R2", "V1", "V2"):
            if getattr(self, name).size != n:
                raise RecordError(f"channel {name} length != time length")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            bad = int(np.flatnonzero(np.diff(self.t) <= 0)[0]) + 1
            raise NonMonotonicTimeError("time not strictly increasing", line=bad + 2)

    def columns(self) -> np.ndarray:
        return np.column_stack(
            [self.t, self.force, self.deflection, self.R1, self.R2, self.V1, self.V2]
        )

    @property
    def n_samples(self) -> int:
        return self.t.size


def meta_path_for(csv_path: str) -> str:
    base, _ = os.path.splitext(csv_path)
    return base + ".meta.json"


def write_record(record: TimeSeriesRecord, csv_path: str, meta_path: str | None = None) -> None:
    """Write the CSV and its metadata sidecar; output is byte-deterministic."""
    data = record.columns()
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for row in data:
            fh.write(",".join(_FLOAT_FMT % v for v in row) + "\n")
    if meta_path is None:
        meta_path = meta_path_for(csv_path)
    with open(meta_path, "w", newline="") as fh:
        json.dump(record.metadata, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _check_header(fields: list[str]) -> None:
    if len(fields) != len(CSV_HEADER):
        raise HeaderError(
            f"expected {len(CSV_HEADER)} columns {','.join(CSV_HEADER)}, "
            f"got {len(fields)}", line=1,
        )
    for got, want in zip(fields, CSV_HEADER):
        if got == want:
            continue
        name, _, unit = got.partition("_")
        want_unit = _COLUMN_UNITS.get(name)
        if want_unit is not None and unit != want_unit:
            raise UnitMismatchError(
                f"column {name!r} carries unit {unit!r}, expected {want_unit!r}", line=1
            )
        raise HeaderError(f"unexpected column {got!r}, expected {want!r}", line=1)


def parse_record(csv_path: str, meta_path: str | None = None) -> TimeSeriesRecord:
    """Read and schema-validate a record CSV (plus sidecar when present).

    Raises header, unit-mismatch, malformed-row and non-monotone-time
    errors distinctly, each carrying the offending 1-based line number.
    NaN markers pass through untouched.
    """
    rows: list[list[float]] = []
    with open(csv_path, "r", newline="") as fh:
        header_line = fh.readline()
        if not header_line:
            raise HeaderError("empty file", line=1)
        _check_header(header_line.strip().split(","))
        t_prev = -math.inf
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(CSV_HEADER):
                raise MalformedRowError(
                    f"expected {len(CSV_HEADER)} fields, got {len(parts)}", line=lineno
                )
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise MalformedRowError(f"non-numeric field in {line!r}", line=lineno) from None
            if not math.isfinite(values[0]):
                raise MalformedRowError("time must be finite", line=lineno)
            if values[0] <= t_prev:
                raise NonMonotonicTimeError(
                    f"t={values[0]!r} does not increase past {t_prev!r}", line=lineno
                )
            t_prev = values[0]
            rows.append(values)

    if not rows:
        raise MalformedRowError("no data rows", line=2)
    data = np.asarray(rows)

    metadata: dict = {}
    if meta_path is None:
        candidate = meta_path_for(csv_path)
        if os.path.exists(candidate):
            meta_path = candidate
    if meta_path is not None:
        with open(meta_path) as fh:
            metadata = json.load(fh)

    return TimeSeriesRecord(
        t=data[:, 0], force=data[:, 1], deflection=data[:, 2],
        R1=data[:, 3], R2=data[:, 4], V1=data[:, 5], V2=data[:, 6],
        metadata=metadata,
    )
