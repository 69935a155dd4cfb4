"""Two-level qubit response to off-resonant spurious tones.

A weak microwave tone detuned from the qubit partially excites it.  This
module provides two routes to the resulting ground-state population:

* closed forms from the first-order Magnus propagator of the rotating-frame
  drive Hamiltonian (fast, used for scan maps), and
* a fixed-step RK4 integration of the same Hamiltonian (slow, independent;
  the reference the closed forms are checked against).

The closed forms have a pole at zero detuning; on resonance only the numeric
route is valid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SingularityError
from .grid import ScanGrid

__all__ = [
    "QubitParams",
    "DriveTone",
    "QubitState",
    "leakage_ground_population",
    "sideband_ground_population",
    "evolve_two_level",
    "recommended_step",
    "drive_scan_map",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QubitParams:
    """Physical constants of the driven two-level system.

    drive_coupling is the lumped conversion from drive volts to angular Rabi
    rate (rad/s per volt); capacitive divider and zero-point charge factors
    are folded into it.
    """

    qubit_frequency: float
    drive_coupling: float

    def __post_init__(self):
        if not self.qubit_frequency > 0:
            raise DomainError("qubit_frequency must be > 0")
        if not self.drive_coupling > 0:
            raise DomainError("drive_coupling must be > 0")


@dataclass(frozen=True)
class DriveTone:
    """A single real tone ``amplitude * cos(2*pi*frequency*t + phase)``."""

    frequency: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.frequency > 0:
            raise DomainError("tone frequency must be > 0")
        if self.amplitude < 0:
            raise DomainError("tone amplitude must be >= 0")


@dataclass(frozen=True)
class QubitState:
    """Pure state (c0, c1) in the qubit energy basis."""

    amplitudes: tuple[complex, complex] = (1.0 + 0j, 0j)

    def __post_init__(self):
        n = abs(self.amplitudes[0]) ** 2 + abs(self.amplitudes[1]) ** 2
        if abs(n - 1.0) > 1e-9:
            raise DomainError(f"state norm {n} deviates from 1 by more than 1e-9")

    @classmethod
    def ground(cls) -> "QubitState":
        return cls((1.0 + 0j, 0j))

    @property
    def ground_population(self) -> float:
        return abs(self.amplitudes[0]) ** 2

    @property
    def excited_population(self) -> float:
        return abs(self.amplitudes[1]) ** 2


def _magnus_angle_leakage(
    coupling_amp: float,
    delta: float,
    sigma: float,
    time_phase: float,
    cos2t: float,
    sin2t: float,
):
    """Half-rotation angle of the leakage propagator.

    ``time_phase`` is 2*w_tone*t; ``cos2t``/``sin2t`` are cos/sin of twice the
    tone phase, passed separately so that sign-flipped offsets reproduce the
    angle bit-for-bit.
    """
    cos_total = math.cos(time_phase) * cos2t - math.sin(time_phase) * sin2t
    bracket = 1.0 / delta**2 + 1.0 / sigma**2 - cos_total / (delta * sigma)
    return 0.5 * coupling_amp * math.sqrt(2.0 * max(bracket, 0.0))


def leakage_ground_population(q: QubitParams, tone: DriveTone, t0: float) -> float:
    """Ground-state population after a carrier-leakage tone drives the qubit.

    First-order Magnus closed form: P0 = cos^2(z) with the rotation angle z
    proportional to the tone amplitude and dominated by the inverse
    tone-qubit detuning.  Diverges on resonance (SingularityError).
    """
    if not t0 > 0:
        raise DomainError("t0 must be > 0")
    w_tone = TWO_PI * tone.frequency
    w_q = TWO_PI * q.qubit_frequency
    delta = w_tone - w_q
    if delta == 0.0:
        raise SingularityError(
            "tone is resonant with the qubit; use evolve_two_level instead"
        )
    if tone.amplitude == 0.0:
        return 1.0
    sigma = w_tone + w_q
    z = _magnus_angle_leakage(
        q.drive_coupling * tone.amplitude,
        delta,
        sigma,
        2.0 * w_tone * t0,
        math.cos(2.0 * tone.phase),
        math.sin(2.0 * tone.phase),
    )
    return math.cos(z) ** 2


def _sideband_angle(
    coupling_amp: float,
    delta: float,
    w_q: float,
    t: float,
    cos2p: float,
    sin2p: float,
):
    """Half-rotation angle of the mirror-sideband propagator."""
    two_wq_plus = 2.0 * w_q + delta
    time_phase = 2.0 * w_q * t + 2.0 * delta * t
    cos_total = math.cos(time_phase) * cos2p - math.sin(time_phase) * sin2p
    bracket = (
        1.0 / two_wq_plus**2
        + 1.0 / delta**2
        + 2.0 * cos_total / (delta * two_wq_plus)
    )
    return 0.25 * coupling_amp * math.sqrt(max(bracket, 0.0))


def sideband_ground_population(
    q: QubitParams,
    envelope_amplitude: float,
    c: complex,
    f_lo: float,
    f_if: float,
    t: float,
) -> float:
    """Ground-state population under the residual mirror-sideband tone.

    ``c`` is the complex amplitude of the image tone per unit envelope (the
    residual after correction).  The qubit is assumed biased near the image
    frequency ``f_lo - f_if``; the far-detuned target tone is neglected.
    """
    if not (f_lo > f_if > 0):
        raise DomainError("require f_lo > f_if > 0")
    if not t > 0:
        raise DomainError("t must be > 0")
    if envelope_amplitude < 0:
        raise DomainError("envelope_amplitude must be >= 0")
    w_image = TWO_PI * (f_lo - f_if)
    w_q = TWO_PI * q.qubit_frequency
    delta = w_image - w_q
    if delta == 0.0:
        raise SingularityError(
            "image tone is resonant with the qubit; use evolve_two_level instead"
        )
    mag = abs(c)
    if envelope_amplitude == 0.0 or mag == 0.0:
        return 1.0
    cos2p = (c.real**2 - c.imag**2) / mag**2
    sin2p = 2.0 * c.real * c.imag / mag**2
    z = _sideband_angle(
        q.drive_coupling * envelope_amplitude * mag, delta, w_q, t, cos2p, sin2p
    )
    return math.cos(z) ** 2


def recommended_step(max_frequency: float, points_per_period: int = 200) -> float:
    """Integration step resolving the fastest oscillation in the Hamiltonian."""
    if not max_frequency > 0:
        raise DomainError("max_frequency must be > 0")
    return 1.0 / (points_per_period * max_frequency)


def evolve_two_level(
    q: QubitParams,
    drive: Callable[[np.ndarray], np.ndarray],
    t0: float,
    step: float,
    initial: QubitState | None = None,
) -> QubitState:
    """Numerically evolve the qubit under a scalar drive field V_d(t).

    Integrates i d|psi>/dt = H(t)|psi> with the rotating-frame drive
    Hamiltonian H = drive_coupling * V_d(t) * (cos(w_q t) sigma_y
    - sin(w_q t) sigma_x), using fixed-step 4th-order Runge-Kutta.  ``drive``
    must accept a numpy array of times.  The step must resolve the fastest
    frequency present (see recommended_step); norm is then conserved to
    better than 1e-9.
    """
    if not step > 0:
        raise DomainError("step must be > 0")
    if not t0 > 0:
        raise DomainError("t0 must be > 0")
    if initial is None:
        initial = QubitState.ground()
    n_steps = max(1, math.ceil(t0 / step))
    h = t0 / n_steps
    times = np.linspace(0.0, t0, 2 * n_steps + 1)
    v = np.asarray(drive(times), dtype=float)
    if v.shape != times.shape:
        raise DomainError("drive(t) must return one value per time sample")
    w_q = TWO_PI * q.qubit_frequency
    # H = gy*sigma_y + gx*sigma_x with gy = Omega*V*cos(w_q t),
    # gx = -Omega*V*sin(w_q t); encode w = gx + i*gy so that
    # H psi = (conj(w) c1, w c0).
    g = q.drive_coupling * v
    w = (-g * np.sin(w_q * times) + 1j * g * np.cos(w_q * times)).tolist()

    c0, c1 = initial.amplitudes
    half_h = 0.5 * h
    sixth_h = h / 6.0
    for j in range(n_steps):
        w1 = w[2 * j]
        w2 = w[2 * j + 1]
        w4 = w[2 * j + 2]
        # k = -i H psi
        k1_0 = -1j * (w1.conjugate() * c1)
        k1_1 = -1j * (w1 * c0)
        a0 = c0 + half_h * k1_0
        a1 = c1 + half_h * k1_1
        k2_0 = -1j * (w2.conjugate() * a1)
        k2_1 = -1j * (w2 * a0)
        b0 = c0 + half_h * k2_0
        b1 = c1 + half_h * k2_1
        k3_0 = -1j * (w2.conjugate() * b1)
        k3_1 = -1j * (w2 * b0)
        d0 = c0 + h * k3_0
        d1 = c1 + h * k3_1
        k4_0 = -1j * (w4.conjugate() * d1)
        k4_1 = -1j * (w4 * d0)
        c0 = c0 + sixth_h * (k1_0 + 2.0 * (k2_0 + k3_0) + k4_0)
        c1 = c1 + sixth_h * (k1_1 + 2.0 * (k2_1 + k3_1) + k4_1)
    return QubitState((c0, c1))


@dataclass(frozen=True)
class DriveScanConfig:
    """Geometry of one qubit-as-detector scan.

    The scanned pair (x, y) maps to a complex tone amplitude
    ``amplitude_scale * (amplitude_offset + x + i*y)``; the offset carries the
    injected hardware defect so the pattern center sits at its negation.
    For sideband scans the scanned pair is the complex correction and
    ``envelope_amplitude`` sets the IF pulse height.
    """

    f_lo: float
    pulse_duration: float = 10e-6
    f_if: float | None = None
    amplitude_offset: complex = 0j
    amplitude_scale: float = 1.0
    envelope_amplitude: float = 1.0

    def __post_init__(self):
        if not self.f_lo > 0:
            raise DomainError("f_lo must be > 0")
        if not self.pulse_duration > 0:
            raise DomainError("pulse_duration must be > 0")
        if not self.amplitude_scale > 0:
            raise DomainError("amplitude_scale must be > 0")
        if self.envelope_amplitude < 0:
            raise DomainError("envelope_amplitude must be >= 0")


def _leakage_map(q: QubitParams, cfg: DriveScanConfig, zx, zy) -> np.ndarray:
    w_tone = TWO_PI * cfg.f_lo
    w_q = TWO_PI * q.qubit_frequency
    delta = w_tone - w_q
    if delta == 0.0:
        return np.full(zx.shape, np.nan)
    sigma = w_tone + w_q
    re = cfg.amplitude_offset.real + zx
    im = cfg.amplitude_offset.imag + zy
    mag2 = re**2 + im**2
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2t = np.where(mag2 > 0, (re**2 - im**2) / mag2, 1.0)
        sin2t = np.where(mag2 > 0, 2.0 * re * im / mag2, 0.0)
    tp = 2.0 * w_tone * cfg.pulse_duration
    cos_total = math.cos(tp) * cos2t - math.sin(tp) * sin2t
    bracket = 1.0 / delta**2 + 1.0 / sigma**2 - cos_total / (delta * sigma)
    amp = q.drive_coupling * cfg.amplitude_scale * np.sqrt(mag2)
    z = 0.5 * amp * np.sqrt(2.0 * np.maximum(bracket, 0.0))
    return np.cos(z) ** 2


def _sideband_map(q: QubitParams, cfg: DriveScanConfig, zx, zy) -> np.ndarray:
    if cfg.f_if is None:
        raise DomainError("sideband scan requires f_if")
    if not (cfg.f_lo > cfg.f_if > 0):
        raise DomainError("require f_lo > f_if > 0")
    w_image = TWO_PI * (cfg.f_lo - cfg.f_if)
    w_q = TWO_PI * q.qubit_frequency
    delta = w_image - w_q
    if delta == 0.0:
        return np.full(zx.shape, np.nan)
    two_wq_plus = 2.0 * w_q + delta
    re = cfg.amplitude_offset.real + zx
    im = cfg.amplitude_offset.imag + zy
    mag2 = re**2 + im**2
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2p = np.where(mag2 > 0, (re**2 - im**2) / mag2, 1.0)
        sin2p = np.where(mag2 > 0, 2.0 * re * im / mag2, 0.0)
    t = cfg.pulse_duration
    tp = (2.0 * w_q + 2.0 * delta) * t
    cos_total = math.cos(tp) * cos2p - math.sin(tp) * sin2p
    bracket = (
        1.0 / two_wq_plus**2 + 1.0 / delta**2 + 2.0 * cos_total / (delta * two_wq_plus)
    )
    amp = q.drive_coupling * cfg.envelope_amplitude * cfg.amplitude_scale * np.sqrt(mag2)
    z = 0.25 * amp * np.sqrt(np.maximum(bracket, 0.0))
    return np.cos(z) ** 2


def _oracle_population(q: QubitParams, freq: float, amp: float, phase: float, t0: float) -> float:
    if amp == 0.0:
        return 1.0
    f_max = freq + q.qubit_frequency
    step = recommended_step(f_max)
    w = TWO_PI * freq

    def drive(ts):
        return amp * np.cos(w * ts + phase)

    return evolve_two_level(q, drive, t0, step).ground_population


def drive_scan_map(
    q: QubitParams,
    cfg: DriveScanConfig,
    xs: np.ndarray,
    ys: np.ndarray,
    mode: str = "leakage",
    use_oracle: bool = False,
) -> ScanGrid:
    """Ground-state population over a rectangular scan of (x, y) pairs.

    ``mode`` selects the leakage closed form (scan over DC offsets) or the
    sideband closed form (scan over the complex correction).  Points where
    the closed form is singular (zero detuning) are marked NaN.  With
    ``use_oracle`` every point is integrated numerically instead; expensive,
    intended for small validation grids.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise DomainError("grid axes must be non-empty")
    zx, zy = np.meshgrid(xs, ys)
    if mode == "leakage":
        freq = cfg.f_lo
        scale = cfg.amplitude_scale
        p = _leakage_map(q, cfg, zx, zy)
    elif mode == "sideband":
        if cfg.f_if is None:
            raise DomainError("sideband scan requires f_if")
        freq = cfg.f_lo - cfg.f_if
        scale = cfg.amplitude_scale * cfg.envelope_amplitude
        p = _sideband_map(q, cfg, zx, zy)
    else:
        raise DomainError(f"unknown scan mode {mode!r}")
    if use_oracle:
        p = np.empty_like(zx)
        for iy in range(ys.size):
            for ix in range(xs.size):
                z = cfg.amplitude_offset + complex(zx[iy, ix], zy[iy, ix])
                if freq == q.qubit_frequency:
                    p[iy, ix] = np.nan
                    continue
                p[iy, ix] = _oracle_population(
                    q, freq, scale * abs(z), math.atan2(z.imag, z.real), cfg.pulse_duration
                )
    return ScanGrid(xs, ys, np.clip(p, 0.0, 1.0))
