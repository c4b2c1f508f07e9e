"""Readers for the solver's documented CSV schemas.

Only files are consumed; the solver itself is never invoked.  Schema
violations and non-finite cells are refused with precise locations.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


def _refuse_nan(value: float, path, where: str):
    if not math.isfinite(value):
        raise SchemaError(f"{path}: non-finite value at {where}")


def read_snapshot_1d(path):
    """Schema: header 'x,u', one x,u row per lattice node."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "x,u":
        raise SchemaError(f"{path}: expected header 'x,u'")
    xs, us = [], []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"{path}: line {i} does not have two columns")
        try:
            x, u = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise SchemaError(f"{path}: line {i} is not numeric") from exc
        _refuse_nan(x, path, f"line {i}, column x")
        _refuse_nan(u, path, f"line {i}, column u")
        xs.append(x)
        us.append(u)
    if not xs:
        raise SchemaError(f"{path}: no data rows")
    return np.array(xs), np.array(us)


_HEADER_2D = re.compile(
    r"^#\s*h=(?P<h>[^\s]+)\s+M=(?P<M>\d+)\s+t=(?P<t>[^\s]+)\s*$"
)


def read_snapshot_2d(path):
    """Schema: '# h=<h> M=<M> t=<t>' then (2M-1) rows of 2M-1 values."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    m = _HEADER_2D.match(lines[0])
    if m is None:
        raise SchemaError(f"{path}: bad 2d snapshot header {lines[0]!r}")
    h = float(m.group("h"))
    M = int(m.group("M"))
    t = float(m.group("t"))
    n = 2 * M - 1
    if len(lines) - 1 != n:
        raise SchemaError(f"{path}: expected {n} rows for M={M}, found {len(lines) - 1}")
    grid = np.empty((n, n))
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != n:
            raise SchemaError(f"{path}: row {i} has {len(parts)} values, expected {n}")
        for j, tok in enumerate(parts):
            try:
                v = float(tok)
            except ValueError as exc:
                raise SchemaError(f"{path}: row {i}, column {j} is not numeric") from exc
            _refuse_nan(v, path, f"row {i}, column {j}")
            grid[i, j] = v
    return grid, h, M, t


RATE_HEADER = "h,tau,P,l2_error,pair_rate,slope"


def read_rate_table(path):
    """Schema: 'h,tau,P,l2_error,pair_rate,slope'; rate cells may be empty."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != RATE_HEADER:
        raise SchemaError(f"{path}: expected header {RATE_HEADER!r}")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise SchemaError(f"{path}: line {i} does not have six columns")
        row = {
            "h": float(parts[0]),
            "tau": float(parts[1]),
            "P": int(parts[2]),
            "l2_error": float(parts[3]),
            "pair_rate": float(parts[4]) if parts[4] else None,
            "slope": float(parts[5]) if parts[5] else None,
        }
        for key in ("h", "tau", "l2_error"):
            _refuse_nan(row[key], path, f"line {i}, column {key}")
        rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: table has no rows")
    return rows
