import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixcal.errors import DomainError, SingularityError
from mixcal.grid import GridSpec
from mixcal.qubit_dynamics import (
    DriveScanConfig,
    DriveTone,
    QubitParams,
    QubitState,
    drive_scan_map,
    evolve_two_level,
    leakage_ground_population,
    recommended_step,
    sideband_ground_population,
)

TWO_PI = 2.0 * math.pi


def make_qubit(f_q, rabi_per_volt_hz):
    return QubitParams(qubit_frequency=f_q, drive_coupling=TWO_PI * rabi_per_volt_hz)


def cosine_drive(freq, amp, phase=0.0):
    w = TWO_PI * freq
    return lambda ts: amp * np.cos(w * ts + phase)


class TestLeakagePopulation:
    def test_hardware_scale_value(self):
        """10 kHz coupling amplitude, 1 MHz detuning, 10 us pulse at a 5 GHz
        carrier: the rotation angle is dominated by 1/detuning."""
        f_lo, f_q, t0, theta = 5e9, 4.999e9, 10e-6, 0.3
        v0 = 0.02
        q = make_qubit(f_q, 1e4 / v0)  # coupling*V0 = 2*pi*10 kHz
        got = leakage_ground_population(q, DriveTone(f_lo, v0, theta), t0)
        # independently assembled: z ~ (coupling*V0) / (sqrt(2)*delta)
        delta = TWO_PI * (f_lo - f_q)
        sigma = TWO_PI * (f_lo + f_q)
        z = (TWO_PI * 1e4 / 2.0) * math.sqrt(
            2.0 * (delta**-2 + sigma**-2 - math.cos(2 * TWO_PI * f_lo * t0 + 2 * theta) / (delta * sigma))
        )
        assert z == pytest.approx(7.07e-3, rel=1e-3)
        assert got == pytest.approx(math.cos(z) ** 2, abs=1e-12)
        assert got == pytest.approx(0.99995, abs=2e-8)

    def test_zero_amplitude_stays_ground(self):
        q = make_qubit(24e6, 1e6)
        assert leakage_ground_population(q, DriveTone(25e6, 0.0, 1.0), 1e-5) == 1.0

    def test_sign_flipped_offsets_equal_population(self):
        q = make_qubit(24e6, 5e7)
        for i0, q0 in [(0.01, 0.02), (-0.013, 0.004), (0.02, 0.0)]:
            v0 = math.hypot(i0, q0)
            p_plus = leakage_ground_population(
                q, DriveTone(25e6, v0, math.atan2(q0, i0)), 1e-5
            )
            p_minus = leakage_ground_population(
                q, DriveTone(25e6, v0, math.atan2(-q0, -i0)), 1e-5
            )
            assert p_plus == pytest.approx(p_minus, abs=1e-12)

    def test_on_resonance_raises(self):
        q = make_qubit(25e6, 1e6)
        with pytest.raises(SingularityError):
            leakage_ground_population(q, DriveTone(25e6, 0.01, 0.0), 1e-5)

    def test_rejects_nonpositive_time(self):
        q = make_qubit(24e6, 1e6)
        with pytest.raises(DomainError):
            leakage_ground_population(q, DriveTone(25e6, 0.01, 0.0), 0.0)

    def test_monotone_excitation_toward_small_detuning(self):
        """At hardware-like scale separation the excitation grows steadily as
        the tone approaches the qubit, over 1..50 MHz detunings."""
        f_q = 5e9
        v0 = 0.02
        q = make_qubit(f_q, 3e7 / v0 / TWO_PI * TWO_PI)  # coupling*V0 = 2*pi*0.6 MHz? keep simple
        q = make_qubit(f_q, 3e7)
        detunings = [1e6 * 1.6**k for k in range(11)]  # 1 MHz .. ~110 MHz
        detunings = [d for d in detunings if d <= 50e6]
        exc = []
        for df in detunings:
            p = leakage_ground_population(q, DriveTone(f_q + df, v0, 0.7), 10e-6)
            exc.append(1.0 - p)
        assert all(a > b for a, b in zip(exc, exc[1:]))

    def test_weak_angular_dependence(self):
        """Populations barely depend on the offset angle when the detuning is
        tiny compared to the sum frequency."""
        f_lo = 5e9
        ratio = 5e-4  # detuning / sum frequency
        delta = ratio * 2 * f_lo / (1 + ratio)
        f_q = f_lo - delta
        v0 = 1.0
        # rotation angle near 1 rad
        coupling = 1.0 * math.sqrt(2.0) * TWO_PI * delta / v0
        q = QubitParams(f_q, coupling)
        t0 = 10e-6
        thetas = np.linspace(0.0, TWO_PI, 73)
        pops = np.array(
            [leakage_ground_population(q, DriveTone(f_lo, v0, th), t0) for th in thetas]
        )
        p0 = leakage_ground_population(q, DriveTone(f_lo, v0, 0.0), t0)
        assert np.max(np.abs(pops - p0)) <= 1e-3 * (1.0 - pops.min())


class TestSidebandPopulation:
    def test_zero_correction_stays_ground(self):
        q = make_qubit(18e6, 1e6)
        assert sideband_ground_population(q, 1.0, 0j, 25e6, 5e6, 1e-5) == 1.0
        assert sideband_ground_population(q, 0.0, 0.1 + 0j, 25e6, 5e6, 1e-5) == 1.0

    def test_sign_flipped_correction_equal_population(self):
        q = make_qubit(18e6, 5e7)
        for c in [0.03 + 0.01j, -0.012 + 0.02j, 0.05j]:
            p1 = sideband_ground_population(q, 1.0, c, 25e6, 5e6, 1e-5)
            p2 = sideband_ground_population(q, 1.0, -c, 25e6, 5e6, 1e-5)
            assert p1 == pytest.approx(p2, abs=1e-12)

    def test_on_resonance_raises(self):
        q = make_qubit(20e6, 1e6)
        with pytest.raises(SingularityError):
            sideband_ground_population(q, 1.0, 0.1 + 0j, 25e6, 5e6, 1e-5)

    def test_frequency_ordering(self):
        q = make_qubit(18e6, 1e6)
        with pytest.raises(DomainError):
            sideband_ground_population(q, 1.0, 0.1 + 0j, 5e6, 25e6, 1e-5)


class TestEvolveTwoLevel:
    def test_no_drive_leaves_state_unchanged(self):
        q = make_qubit(10e6, 1e6)
        state = QubitState((0.6 + 0j, 0.8j))
        out = evolve_two_level(q, lambda ts: np.zeros_like(ts), 1e-6, 1e-9, state)
        assert out.amplitudes == state.amplitudes

    @settings(max_examples=15, deadline=None)
    @given(
        st.floats(1e6, 5e7),
        st.floats(0.0, 0.05),
        st.floats(0.0, TWO_PI),
        st.integers(0, 10**6),
    )
    def test_norm_conserved(self, f_drive, amp, phase, seed):
        rng = np.random.default_rng(seed)
        f_q = rng.uniform(1e6, 5e7)
        q = make_qubit(f_q, 5e7)
        t0 = 20.0 / max(f_drive, f_q)
        step = recommended_step(f_drive + f_q, 100)
        out = evolve_two_level(q, cosine_drive(f_drive, amp, phase), t0, step)
        norm = abs(out.amplitudes[0]) ** 2 + abs(out.amplitudes[1]) ** 2
        assert abs(norm - 1.0) <= 1e-9

    def test_rejects_unnormalized_state(self):
        with pytest.raises(DomainError):
            QubitState((1.0 + 0j, 0.1 + 0j))

    def test_rejects_bad_step(self):
        q = make_qubit(10e6, 1e6)
        with pytest.raises(DomainError):
            evolve_two_level(q, lambda ts: np.zeros_like(ts), 1e-6, 0.0)

    def test_resonant_rabi_rate(self):
        """A resonant drive cycles the population at coupling*amplitude."""
        f_q = 25e6
        v0 = 0.01
        rabi_hz = 2e4
        q = QubitParams(f_q, TWO_PI * rabi_hz / v0)
        period = 1.0 / rabi_hz
        step = recommended_step(2 * f_q, 200)
        drive = cosine_drive(f_q, v0)
        half = evolve_two_level(q, drive, period / 2, step)
        quarter = evolve_two_level(q, drive, period / 4, step)
        assert half.excited_population == pytest.approx(1.0, abs=1e-3)
        assert quarter.excited_population == pytest.approx(0.5, abs=1e-3)

    def test_matches_leakage_formula_off_resonance(self):
        f_lo, f_q = 25e6, 24e6
        v0 = 0.02
        q = make_qubit(f_q, 1e4 / v0)
        t0 = 10e-6
        analytic = leakage_ground_population(q, DriveTone(f_lo, v0, 0.3), t0)
        numeric = evolve_two_level(
            q, cosine_drive(f_lo, v0, 0.3), t0, recommended_step(f_lo + f_q)
        ).ground_population
        assert abs(analytic - numeric) <= 1e-3

    def test_matches_sideband_formula_off_resonance(self):
        f_lo, f_if = 25e6, 5e6
        f_image = f_lo - f_if
        f_q = f_image - 2e6
        c = 0.02 * cmath.exp(0.9j)
        q = make_qubit(f_q, 1e4 / abs(c))
        t0 = 10e-6
        analytic = sideband_ground_population(q, 1.0, c, f_lo, f_if, t0)
        numeric = evolve_two_level(
            q,
            cosine_drive(f_image, abs(c), cmath.phase(c)),
            t0,
            recommended_step(f_image + f_q),
        ).ground_population
        assert abs(analytic - numeric) <= 1e-3


class TestDriveScanMap:
    def test_symmetry_is_exact(self):
        q = make_qubit(99e6, TWO_PI * 9e7)
        cfg = DriveScanConfig(f_lo=100e6, pulse_duration=10e-6)
        xs, ys = GridSpec.centered(0.0, 0.0, 0.1, 41).axes()
        grid = drive_scan_map(q, cfg, xs, ys, mode="leakage")
        assert np.max(np.abs(grid.p - grid.p[::-1, ::-1])) <= 1e-15

    def test_sideband_symmetry_is_exact(self):
        q = make_qubit(78e6, TWO_PI * 9e7)
        cfg = DriveScanConfig(
            f_lo=100e6, f_if=20e6, pulse_duration=10e-6, envelope_amplitude=0.05
        )
        xs, ys = GridSpec.centered(0.0, 0.0, 0.25, 41).axes()
        grid = drive_scan_map(q, cfg, xs, ys, mode="sideband")
        assert np.max(np.abs(grid.p - grid.p[::-1, ::-1])) <= 1e-15

    def test_small_grid_origin_is_ground(self):
        q = make_qubit(99e6, TWO_PI * 9e7)
        cfg = DriveScanConfig(f_lo=100e6)
        xs = np.array([0.0, 0.01])
        grid = drive_scan_map(q, cfg, xs, xs, mode="leakage")
        assert grid.p[0, 0] == 1.0
        assert np.all(grid.p[grid.p < 1.0] < 1.0)

    def test_pattern_peaks_at_cancellation(self):
        leak = 0.01 + 0.0173j
        q = make_qubit(99e6, TWO_PI * 9e7)
        cfg = DriveScanConfig(f_lo=100e6, amplitude_offset=leak)
        xs, ys = GridSpec.centered(-leak.real, -leak.imag, 0.1, 41).axes()
        grid = drive_scan_map(q, cfg, xs, ys, mode="leakage")
        top = grid.argmax_point()
        assert top[0] == pytest.approx(-leak.real, abs=1e-12)
        assert top[1] == pytest.approx(-leak.imag, abs=1e-12)
        assert grid.value_at_nearest(-leak.real, -leak.imag) == 1.0

    def test_singular_detuning_marks_points(self):
        q = make_qubit(100e6, TWO_PI * 9e7)
        cfg = DriveScanConfig(f_lo=100e6)
        xs = np.array([-0.01, 0.0, 0.01])
        grid = drive_scan_map(q, cfg, xs, xs, mode="leakage")
        assert np.all(np.isnan(grid.p))

    def test_oracle_flag_agrees_with_closed_form(self):
        q = make_qubit(24e6, 5e5 / 0.02)
        cfg = DriveScanConfig(f_lo=25e6, amplitude_offset=0.01 + 0.005j)
        xs = np.linspace(-0.02, 0.02, 3)
        fast = drive_scan_map(q, cfg, xs, xs, mode="leakage")
        slow = drive_scan_map(q, cfg, xs, xs, mode="leakage", use_oracle=True)
        assert np.max(np.abs(fast.p - slow.p)) <= 1e-3

    def test_unknown_mode(self):
        q = make_qubit(99e6, 1e6)
        xs = np.linspace(-1, 1, 3)
        with pytest.raises(DomainError):
            drive_scan_map(q, DriveScanConfig(f_lo=100e6), xs, xs, mode="image")

    def test_sideband_requires_if(self):
        q = make_qubit(78e6, 1e6)
        xs = np.linspace(-1, 1, 3)
        with pytest.raises(DomainError):
            drive_scan_map(q, DriveScanConfig(f_lo=100e6), xs, xs, mode="sideband")


class TestValidation:
    def test_params(self):
        with pytest.raises(DomainError):
            QubitParams(0.0, 1.0)
        with pytest.raises(DomainError):
            QubitParams(1e6, 0.0)
        with pytest.raises(DomainError):
            DriveTone(0.0, 1.0)
        with pytest.raises(DomainError):
            DriveTone(1e6, -1.0)
        with pytest.raises(DomainError):
            recommended_step(0.0)
