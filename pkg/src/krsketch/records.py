"""Sweep record types and delimited output shared by benchmarks and plots.

Every CSV starts with a schema comment line, e.g.

    # krsketch-csv v1 kind=sweep_r

followed by a fixed header.  Downstream readers refuse files whose schema
version does not match theirs.  Writes go to a temporary file in the target
directory and are renamed into place, so a crash never leaves a partial
file under the final name.

Medians are computed with the standard middle-of-sorted-values rule (mean
of the two middle values for even counts) and serialized through repr, so
any consumer that parses the floats and repeats the same arithmetic
reproduces them bit for bit.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA_TAG = "krsketch-csv"
SCHEMA_VERSION = 1
GRID_SCHEMA_TAG = "krsketch-grid"

SWEEP_KINDS = ("sweep_r", "sweep_n", "sweep_p", "eit_sweep")
SWEEP_COLUMNS = (
    "strategy",
    "r",
    "r1",
    "r2",
    "n1",
    "n2",
    "p",
    "trial",
    "rel_error",
    "wall_time_ms",
)
EIT_EXTRA_COLUMNS = ("nx", "sigma_star", "noise_sd")

# Which column indexes a sweep's grid when grouping trials into medians.
GROUP_KEY = {"sweep_r": "r", "sweep_n": "n1", "sweep_p": "p", "eit_sweep": "r"}


@dataclass(frozen=True)
class SweepRecord:
    """One trial of one strategy at one grid point."""

    strategy: str
    r: int
    r1: int | None
    r2: int | None
    n1: int
    n2: int
    p: int
    trial: int
    rel_error: float
    wall_time_ms: float
    nx: int | None = None
    sigma_star: float | None = None
    noise_sd: float | None = None

    def __post_init__(self):
        if self.r < 1 or self.n1 < 1 or self.n2 < 1 or self.p < 1 or self.trial < 1:
            raise ValueError("record dimensions and trial index must be positive")
        if not np.isfinite(self.rel_error) or not np.isfinite(self.wall_time_ms):
            raise ValueError("rel_error and wall_time_ms must be finite")
        if self.wall_time_ms < 0:
            raise ValueError("wall_time_ms must be nonnegative")


def _float_str(value: float) -> str:
    return repr(float(value))


def _opt_str(value) -> str:
    return "" if value is None else str(value)


def _atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def schema_line(kind: str) -> str:
    return f"# {SCHEMA_TAG} v{SCHEMA_VERSION} kind={kind}"


def parse_schema_line(line: str, expected_tag: str = SCHEMA_TAG) -> dict:
    """Parse and validate the leading schema comment; returns its fields."""
    parts = line.strip().lstrip("#").split()
    if len(parts) < 2 or parts[0] != expected_tag:
        raise ValueError(f"not a {expected_tag} file: {line.strip()!r}")
    version = parts[1]
    if version != f"v{SCHEMA_VERSION}":
        raise ValueError(
            f"schema version {version} is not supported (expected v{SCHEMA_VERSION})"
        )
    fields = {}
    for item in parts[2:]:
        key, _, value = item.partition("=")
        fields[key] = value
    return fields


def write_sweep_csv(
    path: str | Path,
    records: list[SweepRecord],
    kind: str,
    include_timing: bool = False,
) -> None:
    """Write records under the schema header.

    Timing is opt-in: by default the wall_time_ms column is zeroed so that
    reruns with the same seed produce byte-identical files.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind {kind!r}")
    columns = SWEEP_COLUMNS + (EIT_EXTRA_COLUMNS if kind == "eit_sweep" else ())
    lines = [schema_line(kind), ",".join(columns)]
    for rec in records:
        row = [
            rec.strategy,
            str(rec.r),
            _opt_str(rec.r1),
            _opt_str(rec.r2),
            str(rec.n1),
            str(rec.n2),
            str(rec.p),
            str(rec.trial),
            _float_str(rec.rel_error),
            _float_str(rec.wall_time_ms if include_timing else 0.0),
        ]
        if kind == "eit_sweep":
            row += [_opt_str(rec.nx), _float_str(rec.sigma_star), _float_str(rec.noise_sd)]
        lines.append(",".join(row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_sweep_csv(path: str | Path) -> tuple[str, list[SweepRecord]]:
    """Read a sweep CSV; returns (kind, records).  Refuses files whose
    schema tag or version differs from this module's."""
    with open(path) as handle:
        first = handle.readline()
        fields = parse_schema_line(first)
        kind = fields.get("kind", "")
        if kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {kind!r} in {path}")
        reader = csv.DictReader(handle)
        records = []
        for row in reader:
            records.append(
                SweepRecord(
                    strategy=row["strategy"],
                    r=int(row["r"]),
                    r1=int(row["r1"]) if row["r1"] else None,
                    r2=int(row["r2"]) if row["r2"] else None,
                    n1=int(row["n1"]),
                    n2=int(row["n2"]),
                    p=int(row["p"]),
                    trial=int(row["trial"]),
                    rel_error=float(row["rel_error"]),
                    wall_time_ms=float(row["wall_time_ms"]),
                    nx=int(row["nx"]) if row.get("nx") else None,
                    sigma_star=float(row["sigma_star"]) if row.get("sigma_star") else None,
                    noise_sd=float(row["noise_sd"]) if row.get("noise_sd") else None,
                )
            )
    return kind, records


def median(values) -> float:
    """Middle of sorted values; mean of the two middle ones for even counts."""
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise ValueError("median of an empty sequence")
    n = len(ordered)
    if n % 2 == 1:
        return ordered[n // 2]
    return (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0


def medians_by_group(records: list[SweepRecord], kind: str) -> list[dict]:
    """Per (strategy, grid value) medians of rel_error, deterministically
    ordered by strategy name then grid value."""
    key_field = GROUP_KEY[kind]
    groups: dict[tuple[str, int], list[float]] = {}
    for rec in records:
        groups.setdefault((rec.strategy, getattr(rec, key_field)), []).append(
            rec.rel_error
        )
    out = []
    for (strategy, key_value) in sorted(groups):
        vals = groups[(strategy, key_value)]
        out.append(
            {
                "strategy": strategy,
                key_field: key_value,
                "median_rel_error": median(vals),
                "trials": len(vals),
            }
        )
    return out


def medians_json_path(csv_path: str | Path) -> Path:
    return Path(str(csv_path) + ".medians.json")


def write_medians_json(
    path: str | Path, records: list[SweepRecord], kind: str, metadata: dict | None = None
) -> None:
    payload = {
        "schema": f"{SCHEMA_TAG} v{SCHEMA_VERSION}",
        "kind": kind,
        "group_by": GROUP_KEY[kind],
        "medians": medians_by_group(records, kind),
        "metadata": metadata or {},
    }
    _atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_medians_json(path: str | Path) -> dict:
    with open(path) as handle:
        payload = json.load(handle)
    parse_schema_line("# " + payload.get("schema", ""))
    return payload


def write_grid_csv(path: str | Path, values: np.ndarray, nx: int, label: str) -> None:
    """Write a cell-valued field as cell_i, cell_j, sigma_hat rows, where
    cell_i indexes x and cell_j indexes y."""
    values = np.asarray(values, dtype=float)
    if values.size != nx * nx:
        raise ValueError(f"expected {nx * nx} cell values, got {values.size}")
    lines = [
        f"# {GRID_SCHEMA_TAG} v{SCHEMA_VERSION} label={label} nx={nx}",
        "cell_i,cell_j,sigma_hat",
    ]
    for cj in range(nx):
        for ci in range(nx):
            lines.append(f"{ci},{cj},{_float_str(values[cj * nx + ci])}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_grid_csv(path: str | Path) -> tuple[str, int, np.ndarray]:
    """Read a cell grid file; returns (label, nx, values) with values in
    cell_j * nx + cell_i order."""
    with open(path) as handle:
        fields = parse_schema_line(handle.readline(), expected_tag=GRID_SCHEMA_TAG)
        label = fields.get("label", "")
        nx = int(fields["nx"])
        reader = csv.DictReader(handle)
        values = np.full(nx * nx, np.nan)
        for row in reader:
            ci, cj = int(row["cell_i"]), int(row["cell_j"])
            values[cj * nx + ci] = float(row["sigma_hat"])
    if np.isnan(values).any():
        raise ValueError(f"grid file {path} is missing cells")
    return label, nx, values
