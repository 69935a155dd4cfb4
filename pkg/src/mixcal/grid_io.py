"""Exact CSV serialization of scan grids.

Format: optional ``#``-prefixed comment lines, a ``x,y,p`` header, then one
row per lattice point in row-major order (x varies fastest).  Values are
written with ``repr`` so parsing reproduces every float bit-for-bit.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .grid import ScanGrid

__all__ = ["grid_to_csv", "parse_grid_csv", "write_grid_csv", "read_grid_csv"]

HEADER = "x,y,p"


def grid_to_csv(grid: ScanGrid, comment: str | None = None) -> str:
    lines = []
    if comment:
        for part in comment.splitlines():
            lines.append(f"# {part}")
    lines.append(HEADER)
    for x, y, p in grid.rows():
        lines.append(f"{x!r},{y!r},{p!r}")
    return "\n".join(lines) + "\n"


def parse_grid_csv(text: str) -> ScanGrid:
    lines = text.splitlines()
    i = 0
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("#")):
        i += 1
    if i >= len(lines) or lines[i].strip() != HEADER:
        raise DomainError(f"line {i + 1}: expected header {HEADER!r}")
    xs_vals: list[float] = []
    ys_vals: list[float] = []
    ps_vals: list[float] = []
    for ln, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise DomainError(f"line {ln}: expected 3 comma-separated values")
        try:
            x, y, p = (float(v) for v in parts)
        except ValueError as exc:
            raise DomainError(f"line {ln}: {exc}") from exc
        xs_vals.append(x)
        ys_vals.append(y)
        ps_vals.append(p)
    if not xs_vals:
        raise DomainError("grid CSV holds no data rows")
    xs = np.unique(np.asarray(xs_vals))
    ys = np.unique(np.asarray(ys_vals))
    if xs.size * ys.size != len(ps_vals):
        raise DomainError(
            f"rows do not tile a complete lattice: {len(ps_vals)} rows, "
            f"{xs.size} x-values, {ys.size} y-values"
        )
    ix = np.searchsorted(xs, xs_vals)
    iy = np.searchsorted(ys, ys_vals)
    if len(set(zip(iy.tolist(), ix.tolist()))) != len(ps_vals):
        raise DomainError("duplicate lattice points in grid CSV")
    p = np.full((ys.size, xs.size), np.nan)
    p[iy, ix] = ps_vals
    return ScanGrid(xs, ys, p)


def write_grid_csv(path: str, grid: ScanGrid, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(grid_to_csv(grid, comment))


def read_grid_csv(path: str) -> ScanGrid:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grid_csv(fh.read())
