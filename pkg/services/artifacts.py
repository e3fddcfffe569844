# services/artifacts.py
"""Deterministic output files.

CSV: header row, LF endings, floats as 17 significant digits.
FRSE snapshot (little-endian): b"FRSE", u32 version=1, u64 n, f64 x_min, f64 x_max,
then n pairs (f64 re, f64 im).
"""
from __future__ import annotations

import json
import logging
import math
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from physics.errors import ArtifactError, DomainError
from physics.fracops import Grid1D, WaveField

__all__ = [
    "format_float",
    "write_csv",
    "read_csv",
    "write_summary",
    "write_snapshot",
    "read_snapshot",
    "read_matrix",
    "read_table",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
]

log = logging.getLogger(f"fracwave.{__name__}")

SNAPSHOT_MAGIC = b"FRSE"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIQdd")


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format_float(v)


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactError(f"cannot create {path.parent}: {exc}") from exc
    return path


# ---------------- CSV ----------------
def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = _prepare(path)
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise DomainError(f"{path.name}: row has {len(row)} cells, header has {width}")
        lines.append(",".join(_cell(v) for v in row))
    try:
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    log.debug("wrote %s (%d rows)", path, len(lines) - 1)
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise ArtifactError(f"{path} is empty")
    header = lines[0].split(",")
    data = np.array([[float(c) for c in line.split(",")] for line in lines[1:]], dtype=float)
    return header, data.reshape(-1, len(header))


# ---------------- JSON ----------------
def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    return v


def write_summary(path: str | Path, summary: dict) -> Path:
    """Sorted keys, no wall-clock fields; identical inputs give identical bytes."""
    path = _prepare(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as f:
            json.dump(_jsonable(summary), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    return path


# ---------------- Snapshots ----------------
def write_snapshot(path: str | Path, field_: WaveField) -> Path:
    path = _prepare(path)
    grid = field_.grid
    values = np.asarray(field_.values, dtype="<c16")
    try:
        with path.open("wb") as f:
            f.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.n, grid.x_min, grid.x_max))
            f.write(values.view("<f8").tobytes())
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    return path


def read_snapshot(path: str | Path) -> WaveField:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise ArtifactError(f"{path}: truncated snapshot header")
    magic, version, n, x_min, x_max = _HEADER.unpack_from(blob)
    if magic != SNAPSHOT_MAGIC:
        raise ArtifactError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ArtifactError(f"{path}: unsupported snapshot version {version}")
    body = blob[_HEADER.size:]
    if len(body) != 16 * n:
        raise ArtifactError(f"{path}: expected {16 * n} payload bytes, found {len(body)}")
    pairs = np.frombuffer(body, dtype="<f8").reshape(n, 2)
    return WaveField(Grid1D(x_min, x_max, int(n)), pairs[:, 0] + 1j * pairs[:, 1])


# ---------------- Text inputs ----------------
def read_matrix(path: str | Path) -> np.ndarray:
    """First line: dim. Then dim^2 entries "re im", row-major, any whitespace layout."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read matrix {path}: {exc}") from exc
    tokens = text.split()
    try:
        dim = int(tokens[0])
        nums = [float(t) for t in tokens[1:]]
    except (IndexError, ValueError) as exc:
        raise ArtifactError(f"{path}: malformed matrix file: {exc}") from exc
    if dim < 1 or len(nums) != 2 * dim * dim:
        raise ArtifactError(f"{path}: expected {dim * dim} complex entries, found {len(nums) / 2:g}")
    pairs = np.asarray(nums).reshape(dim * dim, 2)
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)


def read_table(path: str | Path, columns: int = 2) -> np.ndarray:
    """Whitespace separated numeric columns; '#' starts a comment."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ArtifactError(f"cannot read table {path}: {exc}") from exc
    rows = []
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != columns:
            raise ArtifactError(f"{path}:{i}: expected {columns} columns, found {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ArtifactError(f"{path}:{i}: {exc}") from exc
    if not rows:
        raise ArtifactError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)
