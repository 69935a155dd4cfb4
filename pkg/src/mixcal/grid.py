"""Rectangular 2D scan grids: parameter lattices with one population per point."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["GridSpec", "ScanGrid"]


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned rectangular lattice specification."""

    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise DomainError("grid needs at least 2 points per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise DomainError("grid ranges must have positive extent")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Lattice coordinates, built symmetric about the window center.

        Points come in exact sign-symmetric pairs around the center, so
        patterns that are even about it cancel exactly in weighted sums.
        """

        def axis(lo, hi, n):
            step = (hi - lo) / (n - 1)
            return 0.5 * (lo + hi) + (np.arange(n) - (n - 1) / 2.0) * step

        return axis(self.x_min, self.x_max, self.nx), axis(self.y_min, self.y_max, self.ny)

    @classmethod
    def centered(cls, cx: float, cy: float, half_span: float, n: int = 41) -> "GridSpec":
        return cls(cx - half_span, cx + half_span, n, cy - half_span, cy + half_span, n)


def _validate_axis(values: np.ndarray, name: str) -> float:
    if values.ndim != 1 or values.size < 2:
        raise DomainError(f"{name} must be 1-D with at least 2 points")
    steps = np.diff(values)
    if np.any(steps <= 0):
        raise DomainError(f"{name} must be strictly increasing")
    d = float(values[-1] - values[0]) / (values.size - 1)
    if not np.allclose(steps, d, rtol=1e-9, atol=0):
        raise DomainError(f"{name} must be uniformly spaced")
    return d


@dataclass(frozen=True)
class ScanGrid:
    """Populations measured on a rectangular lattice of parameter pairs.

    ``p[iy, ix]`` is the population at ``(xs[ix], ys[iy])``.  Entries are
    probabilities in [0, 1]; NaN marks a point whose evaluation failed and is
    skipped by consumers.
    """

    xs: np.ndarray
    ys: np.ndarray
    p: np.ndarray
    dx: float = field(init=False)
    dy: float = field(init=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        p = np.asarray(self.p, dtype=float)
        dx = _validate_axis(xs, "xs")
        dy = _validate_axis(ys, "ys")
        if p.shape != (ys.size, xs.size):
            raise DomainError(f"p shape {p.shape} does not match (ny, nx)=({ys.size}, {xs.size})")
        finite = p[np.isfinite(p)]
        if finite.size and (finite.min() < 0.0 or finite.max() > 1.0):
            raise DomainError("populations must lie in [0, 1]")
        if np.any(np.isinf(p)):
            raise DomainError("populations must be finite or NaN")
        for name, arr in (("xs", xs), ("ys", ys), ("p", p)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dy", dy)

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    @property
    def y_range(self) -> tuple[float, float]:
        return float(self.ys[0]), float(self.ys[-1])

    @property
    def spacing(self) -> tuple[float, float]:
        return self.dx, self.dy

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def nearest_indices(self, qx, qy) -> tuple[np.ndarray, np.ndarray]:
        """Lattice indices nearest to query points, clamped to the grid.

        Half-way ties go to the smaller coordinate, so equidistant candidates
        resolve to the lexicographically smallest (x, y).
        """
        ux = (np.asarray(qx, dtype=float) - self.xs[0]) / self.dx
        uy = (np.asarray(qy, dtype=float) - self.ys[0]) / self.dy
        ix = np.clip(np.ceil(ux - 0.5).astype(int), 0, self.xs.size - 1)
        iy = np.clip(np.ceil(uy - 0.5).astype(int), 0, self.ys.size - 1)
        return ix, iy

    def value_at_nearest(self, qx, qy) -> np.ndarray:
        ix, iy = self.nearest_indices(qx, qy)
        return self.p[iy, ix]

    def meshed(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.xs, self.ys)

    def rows(self):
        """Yield (x, y, p) per lattice point, x varying fastest within each y."""
        for iy in range(self.ys.size):
            for ix in range(self.xs.size):
                yield float(self.xs[ix]), float(self.ys[iy]), float(self.p[iy, ix])

    def argmax_point(self) -> tuple[float, float]:
        iy, ix = np.unravel_index(np.nanargmax(self.p), self.p.shape)
        return float(self.xs[ix]), float(self.ys[iy])
