"""Symmetry-center search over measured 2D scan patterns.

Qubit-response scans of mixer calibration knobs are centrosymmetric about the
optimal parameters.  The search runs in two steps: a population-weighted
center of gravity seeds the estimate, then a shrinking-window refinement
minimizes a point-reflection mismatch loss until the center converges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGridError, DomainError
from .grid import GridSpec, ScanGrid

__all__ = [
    "ScanGrid",
    "GridSpec",
    "SearchConfig",
    "CenterEstimate",
    "center_of_gravity",
    "centrosymmetry_loss",
    "refine_center",
    "calibrate",
]

WINDOW_POINTS = 9  # candidate lattice per refinement window


@dataclass(frozen=True)
class SearchConfig:
    """Tuning of the center search.

    ``radius`` bounds the loss neighborhood (default: half the smaller scan
    span).  ``convergence_tol`` is the displacement below which the search
    stops (default: half the larger grid spacing).
    """

    radius: float | None = None
    window_shrink: float = 0.5
    max_iterations: int = 20
    convergence_tol: float | None = None

    def __post_init__(self):
        if self.radius is not None and not self.radius > 0:
            raise DomainError("radius must be > 0")
        if not 0.0 < self.window_shrink < 1.0:
            raise DomainError("window_shrink must be in (0, 1)")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.convergence_tol is not None and not self.convergence_tol > 0:
            raise DomainError("convergence_tol must be > 0")

    def resolve(self, grid: ScanGrid) -> tuple[float, float]:
        x0, x1 = grid.x_range
        y0, y1 = grid.y_range
        radius = self.radius if self.radius is not None else 0.5 * min(x1 - x0, y1 - y0)
        tol = (
            self.convergence_tol
            if self.convergence_tol is not None
            else 0.5 * max(grid.dx, grid.dy)
        )
        return radius, tol


@dataclass(frozen=True)
class CenterEstimate:
    """Result of a center search.

    ``trajectory`` starts at the initial guess and records every accepted
    center, one per iteration.
    """

    center: tuple[float, float]
    loss_value: float
    trajectory: tuple[tuple[float, float], ...]
    iterations: int
    converged: bool


def _require_searchable(grid: ScanGrid):
    if grid.xs.size < 3 or grid.ys.size < 3:
        raise DomainError("center search needs at least a 3x3 grid")


def center_of_gravity(grid: ScanGrid, weight_mode: str = "raw") -> tuple[float, float]:
    """Population-weighted mean of the scanned coordinates.

    ``weight_mode`` is ``"raw"`` (weights are the populations) or
    ``"background_subtracted"`` (the grid minimum is removed first, useful
    when the pattern rides on a large baseline).  NaN points carry no weight.
    """
    _require_searchable(grid)
    if weight_mode not in ("raw", "background_subtracted"):
        raise DomainError(f"unknown weight_mode {weight_mode!r}")
    gx, gy = grid.meshed()
    p = grid.p
    valid = np.isfinite(p)
    if not valid.any():
        raise DegenerateGridError("grid has no finite populations")
    w = np.where(valid, p, 0.0)
    if weight_mode == "background_subtracted":
        w = np.where(valid, p - p[valid].min(), 0.0)
    total = float(w.sum())
    if total <= 0.0:
        raise DegenerateGridError("grid weights sum to zero")
    # fsum keeps sign-symmetric contributions cancelling exactly, so a
    # pattern centered on the grid center lands on it to the last bit
    mx = math.fsum((gx * w).ravel().tolist())
    my = math.fsum((gy * w).ravel().tolist())
    return mx / total, my / total


def centrosymmetry_loss(grid: ScanGrid, x: float, y: float, radius: float) -> float:
    """Mean absolute mismatch between the pattern and its point reflection.

    Averages |p(x', y') - p(2x - x', 2y - y')| over all scanned points within
    ``radius`` of (x, y) (strictly).  Reflections falling off the lattice use
    the nearest scanned point, ties resolved toward the lexicographically
    smaller (x, y).  Zero iff the pattern is centrosymmetric about (x, y) on
    the sampled neighborhood.
    """
    if not radius > 0:
        raise DomainError("radius must be > 0")
    gx, gy = grid.meshed()
    in_r = (gx - x) ** 2 + (gy - y) ** 2 < radius * radius
    if not in_r.any():
        raise DomainError("no scanned points within radius of the query center")
    px = gx[in_r]
    py = gy[in_r]
    pv = grid.p[in_r]
    mirror = grid.value_at_nearest(2.0 * x - px, 2.0 * y - py)
    if np.isnan(mirror).any():
        mirror = mirror.copy()
        finite = np.isfinite(grid.p)
        fx, fy, fp = gx[finite], gy[finite], grid.p[finite]
        if fp.size == 0:
            raise DegenerateGridError("grid has no finite populations")
        for i in np.flatnonzero(np.isnan(mirror)):
            qx, qy = 2.0 * x - px[i], 2.0 * y - py[i]
            d2 = (fx - qx) ** 2 + (fy - qy) ** 2
            # nearest finite point; break distance ties lexicographically
            order = np.lexsort((fy, fx, d2))
            mirror[i] = fp[order[0]]
    pair_ok = np.isfinite(pv) & np.isfinite(mirror)
    if not pair_ok.any():
        raise DomainError("no valid point pairs within radius of the query center")
    return float(np.abs(pv[pair_ok] - mirror[pair_ok]).mean())


def refine_center(
    grid: ScanGrid,
    initial: tuple[float, float],
    cfg: SearchConfig | None = None,
) -> CenterEstimate:
    """Iteratively improve a center estimate by minimizing the symmetry loss.

    Each iteration evaluates the loss on a 9x9 candidate lattice inside a
    square window centered on the current estimate (initial window: half of
    each scan span), moves to the best candidate, and shrinks the window.
    Ties prefer lower loss, then smaller displacement, then lexicographic
    order, so repeated runs are identical.  Stops once the displacement falls
    below the convergence tolerance.
    """
    _require_searchable(grid)
    cfg = cfg or SearchConfig()
    radius, tol = cfg.resolve(grid)
    x0, x1 = grid.x_range
    y0, y1 = grid.y_range
    cx, cy = float(initial[0]), float(initial[1])
    if not (x0 <= cx <= x1 and y0 <= cy <= y1):
        raise DomainError("initial center must lie within the scan ranges")
    wx = 0.5 * (x1 - x0)
    wy = 0.5 * (y1 - y0)
    trajectory = [(cx, cy)]
    converged = False
    iterations = 0
    best_loss = math.inf
    for _ in range(cfg.max_iterations):
        iterations += 1
        cand_x = np.clip(np.linspace(cx - 0.5 * wx, cx + 0.5 * wx, WINDOW_POINTS), x0, x1)
        cand_y = np.clip(np.linspace(cy - 0.5 * wy, cy + 0.5 * wy, WINDOW_POINTS), y0, y1)
        best = None
        for qy in cand_y:
            for qx in cand_x:
                try:
                    loss = centrosymmetry_loss(grid, float(qx), float(qy), radius)
                except DomainError:
                    continue
                d2 = (qx - cx) ** 2 + (qy - cy) ** 2
                key = (loss, d2, qx, qy)
                if best is None or key < best:
                    best = key
        if best is None:
            raise DomainError("no evaluable candidate centers in the search window")
        best_loss, _, nx, ny = best
        displacement = math.hypot(nx - cx, ny - cy)
        cx, cy = float(nx), float(ny)
        trajectory.append((cx, cy))
        wx *= cfg.window_shrink
        wy *= cfg.window_shrink
        if displacement < tol:
            converged = True
            break
    return CenterEstimate(
        center=(cx, cy),
        loss_value=float(best_loss),
        trajectory=tuple(trajectory),
        iterations=iterations,
        converged=converged,
    )


def calibrate(
    scan: ScanGrid,
    cfg: SearchConfig | None = None,
    weight_mode: str = "raw",
) -> CenterEstimate:
    """Full center search: center-of-gravity seed, then refinement."""
    seed = center_of_gravity(scan, weight_mode)
    return refine_center(scan, seed, cfg)
