import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixcal.calibrator import (
    SearchConfig,
    calibrate,
    center_of_gravity,
    centrosymmetry_loss,
    refine_center,
)
from mixcal.errors import DegenerateGridError, DomainError
from mixcal.grid import GridSpec, ScanGrid


def lattice(n=21, half=1.0, cx=0.0, cy=0.0):
    xs, ys = GridSpec.centered(cx, cy, half, n).axes()
    return xs, ys


def symmetric_grid(seed=0, n=21, half=1.0):
    """Random pattern made exactly centrosymmetric about the grid center."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, 1.0, size=(n, n))
    p = 0.5 * (p + p[::-1, ::-1])
    xs, ys = lattice(n, half)
    return ScanGrid(xs, ys, p)


def ring_grid(center=(0.15, -0.3), k=6.0, n=41, half=1.0, noise=None, seed=0):
    """Concentric cos^2 rings about ``center``: the drive-scan geometry."""
    xs, ys = lattice(n, half)
    gx, gy = np.meshgrid(xs, ys)
    r = np.hypot(gx - center[0], gy - center[1])
    p = np.cos(k * r) ** 2
    if noise:
        rng = np.random.default_rng(seed)
        p = np.clip(p + rng.uniform(-noise, noise, size=p.shape), 0.0, 1.0)
    return ScanGrid(xs, ys, p)


class TestCenterOfGravity:
    def test_point_mass(self):
        xs = np.array([0.0, 1.0, 2.0, 3.0])
        ys = np.array([1.0, 2.0, 3.0, 4.0])
        p = np.zeros((4, 4))
        p[2, 2] = 1.0  # x=2, y=3
        grid = ScanGrid(xs, ys, p)
        assert center_of_gravity(grid) == (2.0, 3.0)

    def test_uniform_gives_geometric_center(self):
        xs, ys = lattice(n=9, half=1.0, cx=0.3, cy=-0.7)
        grid = ScanGrid(xs, ys, np.full((9, 9), 0.4))
        cx, cy = center_of_gravity(grid)
        assert cx == pytest.approx(0.3, abs=1e-12)
        assert cy == pytest.approx(-0.7, abs=1e-12)

    def test_gaussian_bump_matches_direct_summation(self):
        xs, ys = lattice(n=41, half=1.0)
        gx, gy = np.meshgrid(xs, ys)
        p = np.exp(-((gx - 0.1) ** 2 + (gy + 0.2) ** 2) / (2 * 0.15**2))
        grid = ScanGrid(xs, ys, p)
        got = center_of_gravity(grid)
        # independent plain-loop summation
        num_x = num_y = den = 0.0
        for iy in range(41):
            for ix in range(41):
                w = p[iy, ix]
                num_x += xs[ix] * w
                num_y += ys[iy] * w
                den += w
        assert got[0] == pytest.approx(num_x / den, abs=1e-12)
        assert got[1] == pytest.approx(num_y / den, abs=1e-12)
        spacing = grid.dx
        assert math.hypot(got[0] - 0.1, got[1] + 0.2) < spacing

    def test_background_subtraction_removes_baseline_bias(self):
        xs, ys = lattice(n=21, half=1.0)
        gx, gy = np.meshgrid(xs, ys)
        bump = 0.3 * np.exp(-((gx - 0.4) ** 2 + gy**2) / (2 * 0.1**2))
        grid = ScanGrid(xs, ys, 0.6 + bump)
        raw = center_of_gravity(grid, "raw")
        sub = center_of_gravity(grid, "background_subtracted")
        assert abs(sub[0] - 0.4) < abs(raw[0] - 0.4)

    def test_all_zero_weights(self):
        xs, ys = lattice(n=5)
        with pytest.raises(DegenerateGridError):
            center_of_gravity(ScanGrid(xs, ys, np.zeros((5, 5))))

    def test_rejects_tiny_grid(self):
        xs = np.array([0.0, 1.0])
        with pytest.raises(DomainError):
            center_of_gravity(ScanGrid(xs, xs, np.ones((2, 2))))

    def test_unknown_weight_mode(self):
        with pytest.raises(DomainError):
            center_of_gravity(symmetric_grid(), "squared")


class TestCentrosymmetryLoss:
    def test_zero_at_true_center_of_symmetric_grid(self):
        grid = symmetric_grid(seed=3)
        assert centrosymmetry_loss(grid, 0.0, 0.0, radius=0.8) == 0.0

    def test_constant_grid_zero_everywhere(self):
        xs, ys = lattice(n=11)
        grid = ScanGrid(xs, ys, np.full((11, 11), 0.5))
        for qx, qy in [(0.0, 0.0), (0.31, -0.47), (0.9, 0.9)]:
            assert centrosymmetry_loss(grid, qx, qy, radius=0.5) == 0.0

    def test_linear_pattern_matches_enumeration(self):
        """p = x + 1/2 on a symmetric lattice: differences across the center
        are exactly 2x', so the loss is the mean of |2x'| over the disk."""
        n, half, radius = 21, 0.4, 0.25
        xs, ys = lattice(n, half)
        gx, _ = np.meshgrid(xs, ys)
        grid = ScanGrid(xs, ys, gx + 0.5)
        got = centrosymmetry_loss(grid, 0.0, 0.0, radius)
        total, count = 0.0, 0
        for y in ys:
            for x in xs:
                if x * x + y * y < radius * radius:
                    total += abs(2.0 * x)
                    count += 1
        assert count > 0
        assert got == pytest.approx(total / count, abs=1e-15)

    def test_strict_radius_and_empty_region(self):
        grid = symmetric_grid(n=5, half=1.0)
        with pytest.raises(DomainError):
            centrosymmetry_loss(grid, 0.25, 0.25, radius=1e-6)

    def test_mirror_tie_breaks_to_smaller_coordinate(self):
        xs = np.array([0.0, 1.0, 2.0])
        ys = np.array([0.0, 1.0, 2.0])
        p = np.array([[0.0, 0.5, 1.0]] * 3)
        grid = ScanGrid(xs, ys, p)
        # mirror of x'=1 about x=0.75 is 0.5, equidistant from columns 0 and 1
        assert grid.value_at_nearest(0.5, 0.0) == 0.0

    def test_nonnegative(self):
        grid = ring_grid(noise=0.05)
        for qx, qy in [(0.0, 0.0), (0.2, 0.1), (-0.5, 0.4)]:
            assert centrosymmetry_loss(grid, qx, qy, radius=0.6) >= 0.0


class TestRefineCenter:
    def test_centered_start_converges_immediately(self):
        grid = symmetric_grid(seed=5)
        est = refine_center(grid, (0.0, 0.0))
        assert est.converged
        assert est.iterations == 1
        assert est.center[0] == pytest.approx(0.0, abs=1e-12)
        assert est.center[1] == pytest.approx(0.0, abs=1e-12)
        assert est.loss_value == 0.0
        assert est.trajectory[0] == (0.0, 0.0)

    def test_recovers_ring_center(self):
        truth = (0.15, -0.3)
        grid = ring_grid(center=truth)
        est = calibrate(grid)
        assert est.converged
        assert est.iterations <= 10
        err = math.hypot(est.center[0] - truth[0], est.center[1] - truth[1])
        assert err <= 0.5 * grid.dx

    def test_trajectory_records_moves(self):
        grid = ring_grid(center=(0.3, 0.2))
        est = refine_center(grid, (-0.5, -0.5))
        assert len(est.trajectory) == est.iterations + 1
        assert est.trajectory[0] == (-0.5, -0.5)
        assert est.trajectory[-1] == est.center

    def test_nonconvergence_reported(self):
        grid = ring_grid(noise=0.05)
        cfg = SearchConfig(max_iterations=1, convergence_tol=1e-15)
        est = refine_center(grid, (0.5, 0.5), cfg)
        assert not est.converged
        assert est.iterations == 1

    def test_initial_outside_ranges(self):
        grid = symmetric_grid()
        with pytest.raises(DomainError):
            refine_center(grid, (5.0, 0.0))

    def test_center_stays_in_ranges(self):
        grid = ring_grid(center=(0.9, 0.9))
        est = calibrate(grid)
        (x0, x1), (y0, y1) = grid.x_range, grid.y_range
        assert x0 <= est.center[0] <= x1
        assert y0 <= est.center[1] <= y1

    def test_deterministic(self):
        grid = ring_grid(noise=0.05, seed=8)
        a = calibrate(grid)
        b = calibrate(grid)
        assert a.trajectory == b.trajectory
        assert a.center == b.center


class TestEquivariance:
    @settings(max_examples=20, deadline=None)
    @given(
        st.floats(-3.0, 3.0, allow_nan=False),
        st.floats(-3.0, 3.0, allow_nan=False),
        st.integers(0, 100),
    )
    def test_translation(self, ax, ay, seed):
        grid = ring_grid(center=(0.2, -0.1), noise=0.03, seed=seed)
        shifted = ScanGrid(grid.xs + ax, grid.ys + ay, grid.p)
        c0 = center_of_gravity(grid)
        c1 = center_of_gravity(shifted)
        assert c1[0] - ax == pytest.approx(c0[0], abs=1e-9)
        assert c1[1] - ay == pytest.approx(c0[1], abs=1e-9)
        e0 = calibrate(grid)
        e1 = calibrate(shifted)
        assert e1.center[0] - ax == pytest.approx(e0.center[0], abs=1e-9)
        assert e1.center[1] - ay == pytest.approx(e0.center[1], abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 100))
    def test_reflection(self, seed):
        grid = ring_grid(center=(0.2, -0.1), noise=0.03, seed=seed)
        flipped = ScanGrid(-grid.xs[::-1], -grid.ys[::-1], grid.p[::-1, ::-1])
        c0 = center_of_gravity(grid)
        c1 = center_of_gravity(flipped)
        assert c1[0] == pytest.approx(-c0[0], abs=1e-9)
        assert c1[1] == pytest.approx(-c0[1], abs=1e-9)
        e0 = calibrate(grid)
        e1 = calibrate(flipped)
        assert e1.center[0] == pytest.approx(-e0.center[0], abs=1e-9)
        assert e1.center[1] == pytest.approx(-e0.center[1], abs=1e-9)


class TestRobustness:
    def test_bounded_noise_recovery(self):
        """<= 5% added noise: recovered center within one spacing nearly always."""
        truth = (0.21, -0.17)
        hits = 0
        trials = 40
        for seed in range(trials):
            grid = ring_grid(center=truth, noise=0.05, seed=seed)
            est = calibrate(grid)
            err = math.hypot(est.center[0] - truth[0], est.center[1] - truth[1])
            hits += err <= grid.dx
        assert hits >= 0.95 * trials


class TestSearchConfig:
    def test_defaults_resolve_from_grid(self):
        grid = symmetric_grid(n=21, half=1.0)
        radius, tol = SearchConfig().resolve(grid)
        assert radius == pytest.approx(1.0)  # half the 2.0 span
        assert tol == pytest.approx(0.5 * grid.dx)

    def test_validation(self):
        with pytest.raises(DomainError):
            SearchConfig(radius=0.0)
        with pytest.raises(DomainError):
            SearchConfig(window_shrink=1.0)
        with pytest.raises(DomainError):
            SearchConfig(max_iterations=0)
        with pytest.raises(DomainError):
            SearchConfig(convergence_tol=-1.0)


class TestNanHandling:
    def test_nan_points_are_ignored(self):
        grid0 = symmetric_grid(seed=9)
        p = np.array(grid0.p)
        p[0, 0] = np.nan
        grid = ScanGrid(grid0.xs, grid0.ys, p)
        cx, cy = center_of_gravity(grid)
        assert math.isfinite(cx) and math.isfinite(cy)
        loss = centrosymmetry_loss(grid, 0.0, 0.0, radius=0.8)
        assert math.isfinite(loss)
