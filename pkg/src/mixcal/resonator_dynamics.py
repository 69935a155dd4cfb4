"""Readout-line leakage: resonator photons and the induced qubit shift.

Carrier leakage from a measurement-line mixer drives the readout resonator
off-resonantly.  The resulting photon population pulls the qubit frequency
(a Z error) through the dispersive interaction.  Two routes are provided:

* analytic: a transmission-line filter factor, the driven-cavity steady-state
  photon number, and a linear-in-photons qubit shift;
* numeric: unitary evolution of the driven Jaynes-Cummings model on a
  truncated Fock space, in the frame co-rotating with the leakage tone.

The numeric route is the reference for the dispersive analytics.  Resonator
damping and photon-induced dephasing are not modelled; the steady-state
photon number is treated as constant over the interrogation window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, TruncationError
from .grid import ScanGrid
from .qubit_dynamics import QubitParams

__all__ = [
    "ResonatorParams",
    "ResonatorDrive",
    "JointState",
    "filter_factor",
    "steady_photon_number",
    "qubit_shift",
    "evolve_jaynes_cummings",
    "ramsey_population",
    "numeric_qubit_shift",
    "measurement_scan_map",
    "RamseyConfig",
]

TWO_PI = 2.0 * math.pi
TOP_LEVEL_LIMIT = 1e-4


@dataclass(frozen=True)
class ResonatorParams:
    """Readout resonator constants (linear frequencies, Hz).

    linewidth enters the transmission-line filter factor; input_coupling sets
    the drive strength; dispersive_shift is the per-photon qubit pull used by
    the analytic route.  fock_truncation bounds the numeric Hilbert space.
    """

    resonator_frequency: float
    linewidth: float
    input_coupling: float
    qubit_coupling: float
    dispersive_shift: float
    fock_truncation: int = 20

    def __post_init__(self):
        for name in (
            "resonator_frequency",
            "linewidth",
            "input_coupling",
            "qubit_coupling",
            "dispersive_shift",
        ):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.fock_truncation < 2:
            raise DomainError("fock_truncation must be >= 2")


@dataclass(frozen=True)
class ResonatorDrive:
    """Constant leakage tone hitting the resonator input line."""

    amplitude: float
    f_lo: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError("drive amplitude must be >= 0")
        if not self.f_lo > 0:
            raise DomainError("f_lo must be > 0")


class JointState:
    """Pure qubit-resonator state on a truncated Fock space.

    Amplitudes are ordered |q, n> with q in {ground, excited} outermost:
    index = q * n_levels + n.
    """

    def __init__(self, amplitudes: np.ndarray):
        amp = np.asarray(amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size < 4 or amp.size % 2:
            raise DomainError("joint state needs a 1-D complex vector of even length >= 4")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise DomainError(f"state norm {norm} deviates from 1 by more than 1e-9")
        amp.setflags(write=False)
        self.amplitudes = amp

    @property
    def n_levels(self) -> int:
        return self.amplitudes.size // 2

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_levels
        return self.amplitudes[:n], self.amplitudes[n:]

    @property
    def qubit_excited_population(self) -> float:
        _, e = self.blocks()
        return float(np.sum(np.abs(e) ** 2))

    @property
    def mean_photon_number(self) -> float:
        g, e = self.blocks()
        n = np.arange(self.n_levels)
        return float(n @ (np.abs(g) ** 2 + np.abs(e) ** 2))

    @property
    def top_level_population(self) -> float:
        g, e = self.blocks()
        return float(abs(g[-1]) ** 2 + abs(e[-1]) ** 2)

    def qubit_coherence(self) -> complex:
        g, e = self.blocks()
        return complex(np.vdot(g, e))

    @classmethod
    def ground_vacuum(cls, n_levels: int) -> "JointState":
        amp = np.zeros(2 * n_levels, dtype=complex)
        amp[0] = 1.0
        return cls(amp)

    @classmethod
    def with_coherent_field(
        cls, n_levels: int, alpha: complex, qubit: tuple[complex, complex] = (1.0, 0.0)
    ) -> "JointState":
        """Qubit in the given superposition, resonator in a coherent state.

        The truncated coherent vector is renormalized; callers should keep
        |alpha|^2 well below n_levels so the discarded tail is negligible.
        """
        n = np.arange(n_levels)
        log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, n_levels)))))
        if alpha == 0:
            field = np.zeros(n_levels, dtype=complex)
            field[0] = 1.0
        else:
            log_mag = n * math.log(abs(alpha)) - 0.5 * log_fact
            field = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
            field /= math.sqrt(float(np.sum(np.abs(field) ** 2)))
        amp = np.concatenate((qubit[0] * field, qubit[1] * field))
        amp /= math.sqrt(float(np.sum(np.abs(amp) ** 2)))
        return cls(amp)


def filter_factor(f_lo: float, r: ResonatorParams) -> float:
    """Transmission-line/resonator coupling efficiency, in (0, 1].

    Lorentzian in the LO-resonator detuning measured in linewidths; equals 1
    on resonance and 1/2 at one linewidth of detuning.
    """
    x = (f_lo - r.resonator_frequency) / r.linewidth
    return 1.0 / (1.0 + x * x)


def steady_photon_number(drive_amplitude: float, f_lo: float, r: ResonatorParams) -> float:
    """Mean photon number of the leakage-driven resonator in steady state.

    Driven-cavity Lorentzian: |mu*sqrt(kappa)*A|^2 / (Delta^2 + (kappa/2)^2)
    with Delta the angular LO-resonator detuning.
    """
    if drive_amplitude < 0:
        raise DomainError("drive_amplitude must be >= 0")
    mu = filter_factor(f_lo, r)
    kappa = TWO_PI * r.input_coupling
    delta = TWO_PI * (f_lo - r.resonator_frequency)
    return (mu * drive_amplitude) ** 2 * kappa / (delta**2 + (kappa / 2.0) ** 2)


def qubit_shift(r: ResonatorParams, n_bar: float) -> float:
    """Photon-induced qubit frequency shift in Hz: twice the dispersive
    shift per photon."""
    if n_bar < 0:
        raise DomainError("n_bar must be >= 0")
    return 2.0 * r.dispersive_shift * n_bar


def _rotating_hamiltonian(
    r: ResonatorParams, q: QubitParams, drive_amplitude: float, f_lo: float
) -> np.ndarray:
    """Time-independent Hamiltonian in the frame co-rotating with the tone.

    Block structure over |q, n>: detuned qubit and resonator on the diagonal,
    excitation exchange at rate g, and a static displacement drive of
    strength mu*sqrt(kappa)*A.  Angular units (rad/s).
    """
    n_lev = r.fock_truncation
    dim = 2 * n_lev
    delta_q = TWO_PI * (q.qubit_frequency - f_lo)
    delta_r = TWO_PI * (r.resonator_frequency - f_lo)
    g = TWO_PI * r.qubit_coupling
    eps = filter_factor(f_lo, r) * math.sqrt(TWO_PI * r.input_coupling) * drive_amplitude

    h = np.zeros((dim, dim), dtype=complex)
    n = np.arange(n_lev)
    h[n, n] = delta_r * n
    h[n_lev + n, n_lev + n] = delta_q + delta_r * n
    # sigma+ a: |g, n> -> |e, n-1> with amplitude g*sqrt(n)
    for m in range(1, n_lev):
        h[n_lev + m - 1, m] = g * math.sqrt(m)
        h[m, n_lev + m - 1] = g * math.sqrt(m)
    # i*eps*(a^dag - a) within each qubit block
    for base in (0, n_lev):
        for m in range(n_lev - 1):
            h[base + m + 1, base + m] = 1j * eps * math.sqrt(m + 1)
            h[base + m, base + m + 1] = -1j * eps * math.sqrt(m + 1)
    return h


def _check_truncation(state: JointState, n_lev: int):
    top = state.top_level_population
    if top > TOP_LEVEL_LIMIT:
        raise TruncationError(top, n_lev)


def evolve_jaynes_cummings(
    r: ResonatorParams,
    q: QubitParams,
    drive: ResonatorDrive,
    t1: float,
    t2: float,
    initial: JointState,
) -> JointState:
    """Unitary qubit-resonator evolution from t1 to t2 under the leakage tone.

    The state is rotated into the tone frame at t1, propagated with the
    matrix exponential of the static rotated Hamiltonian, and rotated back at
    t2.  Raises TruncationError when either endpoint puts more than 1e-4
    population in the top Fock level.
    """
    if t2 < t1:
        raise DomainError("t2 must be >= t1")
    n_lev = r.fock_truncation
    if initial.n_levels != n_lev:
        raise DomainError(
            f"state has {initial.n_levels} Fock levels, resonator expects {n_lev}"
        )
    _check_truncation(initial, n_lev)
    w_lo = TWO_PI * drive.f_lo
    n = np.arange(n_lev)
    excitations = np.concatenate((n, 1 + n))

    h = _rotating_hamiltonian(r, q, drive.amplitude, drive.f_lo)
    phi = np.exp(1j * w_lo * t1 * excitations) * initial.amplitudes
    phi = expm(-1j * h * (t2 - t1)) @ phi
    amp = np.exp(-1j * w_lo * t2 * excitations) * phi
    final = JointState(amp)
    _check_truncation(final, n_lev)
    return final


def _probe_state(r: ResonatorParams, n_bar: float) -> JointState:
    """Equal qubit superposition with the field at n_bar photons.

    Integral photon numbers use a Fock state: no photon-number spread means
    no coherence collapse, so the phase rate is clean.  Fractional values
    fall back to a coherent state and the caller must fit within the
    collapse time.
    """
    fraction = 1.0 / math.sqrt(2.0)
    if float(n_bar).is_integer():
        n = int(n_bar)
        if n >= r.fock_truncation - 1:
            raise DomainError("n_bar too close to the Fock truncation")
        amp = np.zeros(2 * r.fock_truncation, dtype=complex)
        amp[n] = fraction
        amp[r.fock_truncation + n] = fraction
        return JointState(amp)
    return JointState.with_coherent_field(
        r.fock_truncation, math.sqrt(n_bar), (fraction, fraction)
    )


def _coherence_phase_rate(
    r: ResonatorParams, q: QubitParams, n_bar: float, duration: float, samples: int
) -> float:
    """Phase accumulation rate (rad/s) of the qubit coherence at fixed photons.

    Evolves the probe state in the resonator frame with no drive and fits the
    unwrapped coherence phase over time.  For coherent (non-integral) probes
    the window shrinks with n_bar: the photon-number spread dephases the
    coherence on a 1/(chi*sqrt(n_bar)) scale, and fitting through that
    collapse would bias the rate.
    """
    window = duration
    detuning = abs(q.qubit_frequency - r.resonator_frequency)
    if not float(n_bar).is_integer() and detuning > 0:
        chi_scale = r.qubit_coupling**2 / detuning
        window = min(duration, 0.1 / (chi_scale * (2.0 * math.sqrt(max(n_bar, 0.0)) + 1.0)))
    h = _rotating_hamiltonian(r, q, 0.0, r.resonator_frequency)
    evals, vecs = np.linalg.eigh(h)
    state = _probe_state(r, n_bar)
    _check_truncation(state, r.fock_truncation)
    coeff = vecs.conj().T @ state.amplitudes
    taus = np.linspace(0.0, window, samples)
    phases = np.empty(samples)
    n_lev = r.fock_truncation
    # demodulate the bare qubit-frame detuning so the residual (photon-induced)
    # phase advances slowly enough between samples to unwrap
    bare = TWO_PI * (q.qubit_frequency - r.resonator_frequency)
    for i, tau in enumerate(taus):
        amp = vecs @ (np.exp(-1j * evals * tau) * coeff)
        coh = np.vdot(amp[:n_lev], amp[n_lev:]) * np.exp(1j * bare * tau)
        phases[i] = np.angle(coh)
    phases = np.unwrap(phases)
    slope = np.polyfit(taus, phases, 1)[0]
    return float(slope)


def numeric_qubit_shift(
    r: ResonatorParams,
    q: QubitParams,
    n_bar: float,
    duration: float = 2e-6,
    samples: int = 65,
) -> float:
    """Photon-induced qubit shift (Hz) from the Jaynes-Cummings evolution.

    Difference of coherence phase rates with and without photons, so
    bare-detuning and single-excitation offsets cancel.  Serves as the
    independent check of qubit_shift in the dispersive regime.
    """
    if n_bar < 0:
        raise DomainError("n_bar must be >= 0")
    rate_n = _coherence_phase_rate(r, q, n_bar, duration, samples)
    rate_0 = _coherence_phase_rate(r, q, 0.0, duration, samples)
    return -(rate_n - rate_0) / TWO_PI


@dataclass(frozen=True)
class RamseyConfig:
    """Idealized pi/2 - delay - pi/2 interrogation settings."""

    delay: float = 1e-6
    virtual_detuning: float = 0.0

    def __post_init__(self):
        if self.delay < 0:
            raise DomainError("ramsey delay must be >= 0")


def ramsey_population(
    r: ResonatorParams,
    q: QubitParams,
    leakage_drive: ResonatorDrive,
    ramsey_delay: float,
    virtual_detuning: float = 0.0,
    numeric: bool = False,
    initial_photons: float | None = None,
) -> float:
    """Excited-state population after a Ramsey sequence under leakage photons.

    Analytic route: the steady-state photon number shifts the qubit by
    qubit_shift and P(|1>) = cos^2(pi * (virtual_detuning + shift) * delay).
    Numeric route: full Jaynes-Cummings evolution between ideal instantaneous
    pi/2 rotations, with the resonator preloaded at the steady amplitude (or
    at ``initial_photons`` with the drive off, for controlled-photon probes).
    """
    if ramsey_delay < 0:
        raise DomainError("ramsey_delay must be >= 0")
    if not numeric:
        if initial_photons is not None:
            n_bar = initial_photons
        else:
            n_bar = steady_photon_number(leakage_drive.amplitude, leakage_drive.f_lo, r)
        total = virtual_detuning + qubit_shift(r, n_bar)
        return math.cos(math.pi * total * ramsey_delay) ** 2

    n_lev = r.fock_truncation
    if initial_photons is not None:
        alpha = math.sqrt(initial_photons)
        drive = ResonatorDrive(0.0, leakage_drive.f_lo)
    else:
        delta_r = TWO_PI * (r.resonator_frequency - leakage_drive.f_lo)
        if delta_r == 0.0:
            raise DomainError(
                "undamped drive has no steady amplitude on resonance; "
                "pass initial_photons explicitly"
            )
        eps = (
            filter_factor(leakage_drive.f_lo, r)
            * math.sqrt(TWO_PI * r.input_coupling)
            * leakage_drive.amplitude
        )
        alpha = -1j * eps / delta_r
        drive = leakage_drive
    # first pi/2: |g> -> (|g> + |e>)/sqrt(2)
    state = JointState.with_coherent_field(
        n_lev, alpha, (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    )
    tau = ramsey_delay
    if tau > 0:
        state = evolve_jaynes_cummings(r, q, drive, 0.0, tau, state)
    g, e = state.blocks()
    # reference frame of the pulse generator: remove the bare qubit phase,
    # advance by the programmed virtual detuning
    frame = np.exp(1j * TWO_PI * q.qubit_frequency * tau - 1j * TWO_PI * virtual_detuning * tau)
    e = e * frame
    # second pi/2 about the same axis: |g> -> (|g>+|e>)/sqrt(2), |e> -> (|e>-|g>)/sqrt(2)
    e_final = (g + e) / math.sqrt(2.0)
    return float(np.sum(np.abs(e_final) ** 2))


def measurement_scan_map(
    r: ResonatorParams,
    q: QubitParams,
    xs: np.ndarray,
    ys: np.ndarray,
    f_lo: float,
    ramsey: RamseyConfig,
    amplitude_offset: complex = 0j,
    amplitude_scale: float = 1.0,
) -> ScanGrid:
    """Ramsey |1> population over a scan of measurement-mixer DC offsets.

    The scanned pair (x, y) maps to a leakage amplitude
    ``amplitude_scale * |amplitude_offset + x + i*y|``; each point follows the
    analytic chain leakage -> photons -> shift -> Ramsey fringe.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    zx, zy = np.meshgrid(xs, ys)
    re = amplitude_offset.real + zx
    im = amplitude_offset.imag + zy
    amp2 = (amplitude_scale**2) * (re**2 + im**2)
    mu = filter_factor(f_lo, r)
    kappa = TWO_PI * r.input_coupling
    delta = TWO_PI * (f_lo - r.resonator_frequency)
    n_bar = mu**2 * kappa * amp2 / (delta**2 + (kappa / 2.0) ** 2)
    shift = 2.0 * r.dispersive_shift * n_bar
    p1 = np.cos(math.pi * (ramsey.virtual_detuning + shift) * ramsey.delay) ** 2
    return ScanGrid(xs, ys, np.clip(p1, 0.0, 1.0))
