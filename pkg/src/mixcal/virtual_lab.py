"""End-to-end virtual mixer-calibration experiments.

Wires the pieces together: injected mixer defects produce spurious tones,
the simulated qubit (or qubit+resonator) responds, shot noise corrupts the
measured populations, the center search recovers the calibration knobs, and
the residual suppression is reported against the known ground truth.

All randomness is drawn from per-point streams derived from (seed, point
index), so grids are reproducible bit-for-bit and independent of evaluation
order.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .calibrator import CenterEstimate, SearchConfig, calibrate
from .errors import DomainError
from .grid import GridSpec, ScanGrid
from .qubit_dynamics import (
    DriveScanConfig,
    DriveTone,
    QubitParams,
    drive_scan_map,
    leakage_ground_population,
)
from .resonator_dynamics import (
    RamseyConfig,
    ResonatorParams,
    measurement_scan_map,
    qubit_shift,
    steady_photon_number,
)
from .signal_model import (
    DacCorrection,
    MixerImperfection,
    SquarePulse,
    residual_power_db,
    synthesize_spectrum,
)

__all__ = [
    "NoiseModel",
    "VirtualSetup",
    "CalibrationOutcome",
    "SweepRow",
    "default_setup",
    "measure_population",
    "run_drive_leakage_scan",
    "run_drive_sideband_scan",
    "run_measurement_leakage_scan",
    "calibrate_drive_mixer",
    "calibrate_measurement_mixer",
    "detuning_sweep",
    "exact_corrections",
]

DEFAULT_PULSE_DURATION = 10e-6
DEFAULT_GRID_POINTS = 41
DEFAULT_SPAN_FACTOR = 5.0
MIN_HALF_SPAN = 0.01
RESOLVABLE_SHIFT_HZ = 1e3


@dataclass(frozen=True)
class NoiseModel:
    """Finite sampling and readout assignment errors.

    ``shots=None`` disables noise entirely.  readout_error_01 is the
    probability of reporting |1> for a qubit in |0>; readout_error_10 the
    reverse.  All draws derive from ``seed`` plus a per-point stream index.
    """

    shots: int | None = None
    readout_error_01: float = 0.0
    readout_error_10: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise DomainError("shots must be >= 1 (or None to disable noise)")
        for name in ("readout_error_01", "readout_error_10"):
            v = getattr(self, name)
            if not 0.0 <= v < 0.5:
                raise DomainError(f"{name} must lie in [0, 0.5)")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def enabled(self) -> bool:
        return self.shots is not None


@dataclass(frozen=True)
class VirtualSetup:
    """Complete description of one virtual bench.

    ``f_lo``/``f_if`` belong to the drive-line mixer; the measurement-line LO
    is placed relative to the resonator per scan.  readout_drive_conversion
    converts DAC volts reaching the readout line into the cavity drive
    amplitude used by the photon-number model.
    """

    mixer: MixerImperfection
    qubit: QubitParams
    resonator: ResonatorParams
    f_lo: float
    f_if: float
    noise: NoiseModel = field(default_factory=NoiseModel)
    readout_drive_conversion: float = 3.5e5

    def __post_init__(self):
        if not (self.f_lo > self.f_if > 0):
            raise DomainError("require f_lo > f_if > 0")
        if not self.readout_drive_conversion > 0:
            raise DomainError("readout_drive_conversion must be > 0")


def default_setup(
    noise: NoiseModel | None = None,
    carrier_leakage: complex = 0.02 * np.exp(1j * math.pi / 3),
    image_gain: complex = 0.05 * np.exp(-0.7j),
) -> VirtualSetup:
    """Desk-scale bench: frequencies rescaled to the tens of MHz so the
    numeric oracle stays cheap; all governing ratios match hardware scale."""
    return VirtualSetup(
        mixer=MixerImperfection(complex(carrier_leakage), complex(image_gain)),
        qubit=QubitParams(qubit_frequency=70e6, drive_coupling=2.0 * math.pi * 90e6),
        resonator=ResonatorParams(
            resonator_frequency=50e6,
            linewidth=50e6,
            input_coupling=50e6,
            qubit_coupling=1e6,
            dispersive_shift=5e4,
            fock_truncation=20,
        ),
        f_lo=100e6,
        f_if=20e6,
        noise=noise if noise is not None else NoiseModel(),
    )


def measure_population(true_p: float, noise: NoiseModel | None, stream: int = 0) -> float:
    """Sampled estimate of an excited-state probability.

    Applies the readout assignment-error channel, draws ``shots`` Bernoulli
    outcomes from a stream derived from (seed, stream), and returns the
    observed fraction.  Noise disabled returns ``true_p`` exactly; NaN
    (failed point) passes through.
    """
    if math.isnan(true_p):
        return true_p
    if not 0.0 <= true_p <= 1.0:
        raise DomainError("true_p must lie in [0, 1]")
    if noise is None or not noise.enabled:
        return true_p
    p_eff = true_p * (1.0 - noise.readout_error_10) + (1.0 - true_p) * noise.readout_error_01
    rng = np.random.default_rng(np.random.SeedSequence(noise.seed, spawn_key=(stream,)))
    return float(rng.binomial(noise.shots, p_eff)) / noise.shots


def _sample_grid(truth: ScanGrid, noise: NoiseModel, excited: bool) -> ScanGrid:
    """Per-point sampling of a true-population grid.

    Drive scans store ground-state populations; their complement is sampled
    through the 0/1 channel and complemented back.
    """
    if not noise.enabled:
        return truth
    p = np.array(truth.p)
    nx = truth.xs.size
    for iy in range(truth.ys.size):
        for ix in range(nx):
            v = p[iy, ix]
            if math.isnan(v):
                continue
            stream = iy * nx + ix
            if excited:
                p[iy, ix] = measure_population(v, noise, stream)
            else:
                p[iy, ix] = 1.0 - measure_population(1.0 - v, noise, stream)
    return ScanGrid(truth.xs, truth.ys, p)


def default_offset_grid(magnitude: float) -> GridSpec:
    """Symmetric scan window spanning several times the expected defect."""
    half = DEFAULT_SPAN_FACTOR * max(magnitude, MIN_HALF_SPAN / DEFAULT_SPAN_FACTOR)
    half = max(half, MIN_HALF_SPAN)
    return GridSpec.centered(0.0, 0.0, half, DEFAULT_GRID_POINTS)


def run_drive_leakage_scan(
    setup: VirtualSetup,
    detuning: float,
    grid: GridSpec | None = None,
    pulse_duration: float = DEFAULT_PULSE_DURATION,
) -> ScanGrid:
    """Qubit-as-detector map of ground population vs (I0, Q0) offsets.

    The qubit is biased ``detuning`` below the drive LO and responds to the
    residual carrier tone; the pattern is centrosymmetric about the
    cancellation offsets.
    """
    if detuning == 0:
        raise DomainError(
            "LO-qubit detuning must be nonzero; bias the qubit off the LO frequency"
        )
    f_q = setup.f_lo - detuning
    if not f_q > 0:
        raise DomainError("detuning places the qubit at a non-positive frequency")
    if grid is None:
        grid = default_offset_grid(abs(setup.mixer.carrier_leakage))
    xs, ys = grid.axes()
    qubit = replace(setup.qubit, qubit_frequency=f_q)
    cfg = DriveScanConfig(
        f_lo=setup.f_lo,
        pulse_duration=pulse_duration,
        amplitude_offset=setup.mixer.carrier_leakage,
        amplitude_scale=setup.mixer.attenuation,
    )
    truth = drive_scan_map(qubit, cfg, xs, ys, mode="leakage")
    return _sample_grid(truth, setup.noise, excited=False)


def sideband_scan_amplitude(
    setup: VirtualSetup, detuning: float, grid: GridSpec
) -> float:
    """Envelope amplitude putting the grid's maximum excitation near 1/2.

    Mirrors the practice of driving the scan just hard enough to excite the
    qubit: the largest residual on the grid rotates the qubit by ~pi/4.
    """
    corners = [
        abs(setup.mixer.image_gain + complex(x, y))
        for x in (grid.x_min, grid.x_max)
        for y in (grid.y_min, grid.y_max)
    ]
    reach = max(corners)
    if reach == 0:
        raise DomainError("degenerate scan grid: zero reach from the image defect")
    omega = setup.qubit.drive_coupling * setup.mixer.attenuation
    return math.pi * abs(2.0 * math.pi * detuning) / (omega * reach)


def run_drive_sideband_scan(
    setup: VirtualSetup,
    detuning: float,
    grid: GridSpec | None = None,
    envelope_amplitude: float | None = None,
    pulse_duration: float = DEFAULT_PULSE_DURATION,
) -> ScanGrid:
    """Ground-population map vs the complex sideband correction.

    The qubit is biased ``detuning`` below the image frequency
    ``f_lo - f_if``; the optimum sits at the negated image gain.  Without an
    explicit envelope amplitude a just-sufficient drive level is chosen
    automatically.
    """
    if detuning == 0:
        raise DomainError(
            "image-qubit detuning must be nonzero; bias the qubit off the image tone"
        )
    f_image = setup.f_lo - setup.f_if
    f_q = f_image - detuning
    if not f_q > 0:
        raise DomainError("detuning places the qubit at a non-positive frequency")
    if grid is None:
        grid = default_offset_grid(abs(setup.mixer.image_gain))
    if envelope_amplitude is None:
        envelope_amplitude = sideband_scan_amplitude(setup, detuning, grid)
    xs, ys = grid.axes()
    qubit = replace(setup.qubit, qubit_frequency=f_q)
    cfg = DriveScanConfig(
        f_lo=setup.f_lo,
        pulse_duration=pulse_duration,
        f_if=setup.f_if,
        amplitude_offset=setup.mixer.image_gain,
        amplitude_scale=setup.mixer.attenuation,
        envelope_amplitude=envelope_amplitude,
    )
    truth = drive_scan_map(qubit, cfg, xs, ys, mode="sideband")
    return _sample_grid(truth, setup.noise, excited=False)


def run_measurement_leakage_scan(
    setup: VirtualSetup,
    detuning: float,
    grid: GridSpec | None = None,
    ramsey: RamseyConfig | None = None,
) -> ScanGrid:
    """Ramsey |1> population vs measurement-mixer offsets.

    The measurement LO sits ``detuning`` above the readout resonator; leakage
    photons shift the qubit and wind the Ramsey phase, producing ring
    patterns centered on the cancellation offsets.  Warns when no point on
    the grid shifts the qubit measurably.
    """
    if grid is None:
        grid = default_offset_grid(abs(setup.mixer.carrier_leakage))
    ramsey = ramsey or RamseyConfig(delay=1e-6, virtual_detuning=0.25e6)
    f_lo_meas = setup.resonator.resonator_frequency + detuning
    if not f_lo_meas > 0:
        raise DomainError("detuning places the measurement LO at a non-positive frequency")
    xs, ys = grid.axes()
    scale = setup.mixer.attenuation * setup.readout_drive_conversion
    corners = [
        abs(setup.mixer.carrier_leakage + complex(x, y))
        for x in (grid.x_min, grid.x_max)
        for y in (grid.y_min, grid.y_max)
    ]
    max_amp = scale * max(corners)
    max_shift = qubit_shift(
        setup.resonator, steady_photon_number(max_amp, f_lo_meas, setup.resonator)
    )
    if max_shift < RESOLVABLE_SHIFT_HZ:
        warnings.warn(
            f"maximum photon-induced shift {max_shift:.3g} Hz is below the "
            f"{RESOLVABLE_SHIFT_HZ:.0f} Hz resolvability threshold; the scan is "
            "insensitive to the mixer offsets",
            stacklevel=2,
        )
    truth = measurement_scan_map(
        setup.resonator,
        setup.qubit,
        xs,
        ys,
        f_lo_meas,
        ramsey,
        amplitude_offset=setup.mixer.carrier_leakage,
        amplitude_scale=scale,
    )
    return _sample_grid(truth, setup.noise, excited=True)


@dataclass(frozen=True)
class CalibrationOutcome:
    """Recovered knobs and achieved suppression for one mixer.

    Residuals are relative to the target tone; ``None`` marks a stage a role
    does not calibrate (the measurement line leaves the image tone alone).
    """

    optimal_offsets: tuple[float, float]
    optimal_c: complex
    residual_carrier_db: float
    residual_image_db: float | None
    uncalibrated_carrier_db: float
    uncalibrated_image_db: float | None
    scans: tuple[ScanGrid, ...]
    estimates: dict[str, CenterEstimate]
    success: bool


def _spectra_pair(
    setup: VirtualSetup,
    offsets: tuple[float, float],
    c: complex,
    pulse_duration: float,
):
    envelope = SquarePulse(amplitude=1.0, duration=pulse_duration)
    uncal = synthesize_spectrum(
        setup.mixer,
        DacCorrection(if_frequency=setup.f_if, envelope=envelope),
        setup.f_lo,
    )
    cal = synthesize_spectrum(
        setup.mixer,
        DacCorrection(
            if_frequency=setup.f_if,
            i_offset=offsets[0],
            q_offset=offsets[1],
            sideband_correction=c,
            envelope=envelope,
        ),
        setup.f_lo,
    )
    return uncal, cal


def exact_corrections(setup: VirtualSetup, pulse_duration: float = DEFAULT_PULSE_DURATION) -> DacCorrection:
    """The analytic cancellation point for the injected defects."""
    return DacCorrection(
        if_frequency=setup.f_if,
        i_offset=-setup.mixer.carrier_leakage.real,
        q_offset=-setup.mixer.carrier_leakage.imag,
        sideband_correction=-setup.mixer.image_gain,
        envelope=SquarePulse(amplitude=1.0, duration=pulse_duration),
    )


ZOOM_FACTOR = 0.125


def _zoom_grid(coarse: ScanGrid, center: tuple[float, float]) -> GridSpec:
    half = ZOOM_FACTOR * 0.5 * (coarse.x_range[1] - coarse.x_range[0])
    return GridSpec.centered(center[0], center[1], half, DEFAULT_GRID_POINTS)


def _scan_and_zoom(scan_fn, search: SearchConfig | None, weight_mode: str):
    """Coarse scan + center search, then a zoomed rescan around the estimate.

    A single pass resolves the symmetry center only to a fraction of the grid
    spacing (mirror values snap to the nearest scanned point), so a second,
    tighter scan buys the extra precision deep suppression needs.
    """
    coarse = scan_fn(None)
    coarse_est = calibrate(coarse, search, weight_mode=weight_mode)
    fine = scan_fn(_zoom_grid(coarse, coarse_est.center))
    fine_est = calibrate(fine, search, weight_mode=weight_mode)
    return (coarse, fine), (coarse_est, fine_est)


def calibrate_drive_mixer(
    setup: VirtualSetup,
    leakage_detuning: float = 1e6,
    sideband_detuning: float = 2e6,
    leakage_grid: GridSpec | None = None,
    sideband_grid: GridSpec | None = None,
    search: SearchConfig | None = None,
    pulse_duration: float = DEFAULT_PULSE_DURATION,
) -> CalibrationOutcome:
    """Two-stage drive-mixer calibration: offsets first, then the sideband.

    Each stage runs a coarse scan, recovers the symmetry center, and rescans
    a zoomed window around it.  The leakage offsets are applied before the
    sideband stage; residual carrier and image power are reported against the
    uncalibrated mixer.
    """
    leak_scans, leak_ests = _scan_and_zoom(
        lambda g: run_drive_leakage_scan(
            setup, leakage_detuning, g if g is not None else leakage_grid, pulse_duration
        ),
        search,
        "raw",
    )
    offsets = leak_ests[-1].center

    side_scans, side_ests = _scan_and_zoom(
        lambda g: run_drive_sideband_scan(
            setup,
            sideband_detuning,
            g if g is not None else sideband_grid,
            None,
            pulse_duration,
        ),
        search,
        "raw",
    )
    c_opt = complex(side_ests[-1].center[0], side_ests[-1].center[1])

    uncal, cal = _spectra_pair(setup, offsets, c_opt, pulse_duration)
    return CalibrationOutcome(
        optimal_offsets=offsets,
        optimal_c=c_opt,
        residual_carrier_db=residual_power_db(cal, "carrier"),
        residual_image_db=residual_power_db(cal, "image"),
        uncalibrated_carrier_db=residual_power_db(uncal, "carrier"),
        uncalibrated_image_db=residual_power_db(uncal, "image"),
        scans=leak_scans + side_scans,
        estimates={
            "leakage": leak_ests[0],
            "leakage_zoom": leak_ests[1],
            "sideband": side_ests[0],
            "sideband_zoom": side_ests[1],
        },
        success=all(e.converged for e in leak_ests + side_ests),
    )


def calibrate_measurement_mixer(
    setup: VirtualSetup,
    detuning: float = 10e6,
    grid: GridSpec | None = None,
    ramsey: RamseyConfig | None = None,
    search: SearchConfig | None = None,
) -> CalibrationOutcome:
    """Measurement-mixer leakage calibration via Ramsey Z-error patterns."""
    scans, ests = _scan_and_zoom(
        lambda g: run_measurement_leakage_scan(
            setup, detuning, g if g is not None else grid, ramsey
        ),
        search,
        "background_subtracted",
    )
    offsets = ests[-1].center
    uncal, cal = _spectra_pair(setup, offsets, 0j, DEFAULT_PULSE_DURATION)
    return CalibrationOutcome(
        optimal_offsets=offsets,
        optimal_c=0j,
        residual_carrier_db=residual_power_db(cal, "carrier"),
        residual_image_db=None,
        uncalibrated_carrier_db=residual_power_db(uncal, "carrier"),
        uncalibrated_image_db=None,
        scans=scans,
        estimates={"leakage": ests[0], "leakage_zoom": ests[1]},
        success=all(e.converged for e in ests),
    )


@dataclass(frozen=True)
class SweepRow:
    detuning: float
    metric_uncal: float
    metric_cal: float


def detuning_sweep(
    setup: VirtualSetup,
    detunings,
    metric: str = "drive-excitation",
    pulse_duration: float = DEFAULT_PULSE_DURATION,
) -> list[SweepRow]:
    """Error metric vs detuning, uncalibrated and with exact cancellation.

    ``drive-excitation``: qubit excitation from the residual carrier with the
    qubit biased at each detuning.  ``measurement-shift``: photon-induced
    qubit shift (Hz) at each LO-resonator detuning.  The calibrated column
    applies the analytic cancellation, so it probes the scheme's error floor.
    """
    detunings = list(detunings)
    if not detunings:
        raise DomainError("detuning list must be non-empty")
    if metric not in ("drive-excitation", "measurement-shift"):
        raise DomainError(f"unknown sweep metric {metric!r}")
    leak = setup.mixer.carrier_leakage
    a = setup.mixer.attenuation
    rows = []
    for i, df in enumerate(detunings):
        if metric == "drive-excitation":
            if df == 0:
                raise DomainError("drive sweep requires nonzero detunings")
            f_q = setup.f_lo - df
            if not f_q > 0:
                raise DomainError(f"detuning {df} places the qubit at a non-positive frequency")
            qubit = replace(setup.qubit, qubit_frequency=f_q)
            if leak == 0:
                exc_u = 0.0
            else:
                tone = DriveTone(setup.f_lo, a * abs(leak), math.atan2(leak.imag, leak.real))
                exc_u = 1.0 - leakage_ground_population(qubit, tone, pulse_duration)
            exc_c = 0.0  # exact cancellation leaves no carrier residual
            u = measure_population(exc_u, setup.noise, stream=2 * i)
            c = measure_population(exc_c, setup.noise, stream=2 * i + 1)
            rows.append(SweepRow(df, u, c))
        else:
            f_lo_meas = setup.resonator.resonator_frequency + df
            if not f_lo_meas > 0:
                raise DomainError(f"detuning {df} places the LO at a non-positive frequency")
            amp = setup.readout_drive_conversion * a * abs(leak)
            shift_u = qubit_shift(
                setup.resonator, steady_photon_number(amp, f_lo_meas, setup.resonator)
            )
            rows.append(SweepRow(df, shift_u, 0.0))
    return rows
