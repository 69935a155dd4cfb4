"""Run configuration: YAML schema, validation, and assembly of the bench.

Physical scalar keys carry unit suffixes (``_hz``, ``_v``, ``_s``) to keep
angular/linear frequency and amplitude conventions explicit.  Grid axis keys
are unit-free because their meaning follows the scanned plane: volts for
offset scans, dimensionless for correction scans.  Unknown keys are rejected
with the offending line number.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import yaml

from .calibrator import SearchConfig
from .errors import ConfigError
from .grid import GridSpec
from .qubit_dynamics import QubitParams
from .resonator_dynamics import RamseyConfig, ResonatorParams
from .signal_model import MixerImperfection
from .virtual_lab import NoiseModel, VirtualSetup, default_offset_grid

__all__ = ["RunConfig", "load_config", "parse_config", "config_digest"]

SWEEP_METRICS = ("drive-excitation", "measurement-shift")


def _line_map(text: str) -> dict[tuple, int]:
    """Map each config key path to its 1-based line number."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return {}
    lines: dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key_node, val_node in node.value:
                p = path + (getattr(key_node, "value", "?"),)
                lines[p] = key_node.start_mark.line + 1
                walk(val_node, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                walk(item, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


class _Validator:
    def __init__(self, data: dict, lines: dict[tuple, int]):
        self.data = data
        self.lines = lines

    def fail(self, path: tuple, message: str):
        line = self.lines.get(path)
        if line is None and path:
            line = self.lines.get(path[:-1])
        raise ConfigError(f"{'.'.join(str(p) for p in path) or '<root>'}: {message}", line)

    def section(self, parent: dict, path: tuple, key: str) -> dict:
        value = parent.get(key)
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(path + (key,), "expected a mapping")
        return value

    def reject_unknown(self, mapping: dict, path: tuple, allowed):
        for key in mapping:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key {key!r}")

    def number(self, mapping, path, key, default, *, minimum=None, maximum=None,
               strict_min=False, allow_none=False):
        value = mapping.get(key, default)
        if value is None:
            if allow_none:
                return None
            self.fail(path + (key,), "value required")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path + (key,), f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            self.fail(path + (key,), "value must be finite")
        if minimum is not None:
            if strict_min and not value > minimum:
                self.fail(path + (key,), f"must be > {minimum}")
            if not strict_min and value < minimum:
                self.fail(path + (key,), f"must be >= {minimum}")
        if maximum is not None and value > maximum:
            self.fail(path + (key,), f"must be <= {maximum}")
        return value

    def integer(self, mapping, path, key, default, *, minimum=None, maximum=None,
                allow_none=False):
        value = mapping.get(key, default)
        if value is None:
            if allow_none:
                return None
            self.fail(path + (key,), "value required")
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path + (key,), f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(path + (key,), f"must be >= {minimum}")
        if maximum is not None and value > maximum:
            self.fail(path + (key,), f"must be <= {maximum}")
        return value

    def string(self, mapping, path, key, default, *, choices=None):
        value = mapping.get(key, default)
        if not isinstance(value, str) or not value:
            self.fail(path + (key,), "expected a non-empty string")
        if choices is not None and value not in choices:
            self.fail(path + (key,), f"must be one of {list(choices)}")
        return value


GRID_KEYS = ("x_min", "x_max", "nx", "y_min", "y_max", "ny")


@dataclass(frozen=True)
class DriveScanSettings:
    detuning: float
    pulse_duration: float
    grid: GridSpec | None


@dataclass(frozen=True)
class SidebandScanSettings:
    detuning: float
    pulse_duration: float
    envelope_amplitude: float | None
    grid: GridSpec | None


@dataclass(frozen=True)
class MeasurementScanSettings:
    detuning: float
    ramsey: RamseyConfig
    grid: GridSpec | None


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run settings; grids left as None follow the defect size."""

    seed: int | None
    channel: str
    setup: VirtualSetup
    drive_leakage: DriveScanSettings
    drive_sideband: SidebandScanSettings
    measurement: MeasurementScanSettings
    search: SearchConfig
    sweep_detunings: tuple[float, ...]
    sweep_metric: str
    resolved: dict = field(repr=False)

    def with_seed(self, seed: int) -> "RunConfig":
        """Copy with the noise seed pinned (CLI override or generated seed)."""
        noise = NoiseModel(
            shots=self.setup.noise.shots,
            readout_error_01=self.setup.noise.readout_error_01,
            readout_error_10=self.setup.noise.readout_error_10,
            seed=seed,
        )
        setup = VirtualSetup(
            mixer=self.setup.mixer,
            qubit=self.setup.qubit,
            resonator=self.setup.resonator,
            f_lo=self.setup.f_lo,
            f_if=self.setup.f_if,
            noise=noise,
            readout_drive_conversion=self.setup.readout_drive_conversion,
        )
        resolved = dict(self.resolved)
        resolved["seed"] = seed
        return RunConfig(
            seed=seed,
            channel=self.channel,
            setup=setup,
            drive_leakage=self.drive_leakage,
            drive_sideband=self.drive_sideband,
            measurement=self.measurement,
            search=self.search,
            sweep_detunings=self.sweep_detunings,
            sweep_metric=self.sweep_metric,
            resolved=resolved,
        )

    @property
    def digest(self) -> str:
        return config_digest(self.resolved)


def config_digest(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _grid(v: _Validator, section: dict, path: tuple) -> GridSpec | None:
    raw = section.get("grid")
    if raw is None:
        return None
    gpath = path + ("grid",)
    if not isinstance(raw, dict):
        v.fail(gpath, "expected a mapping")
    v.reject_unknown(raw, gpath, GRID_KEYS)
    x_min = v.number(raw, gpath, "x_min", None)
    x_max = v.number(raw, gpath, "x_max", None)
    y_min = v.number(raw, gpath, "y_min", None)
    y_max = v.number(raw, gpath, "y_max", None)
    nx = v.integer(raw, gpath, "nx", 41, minimum=2)
    ny = v.integer(raw, gpath, "ny", 41, minimum=2)
    if not x_max > x_min:
        v.fail(gpath + ("x_max",), "must exceed x_min")
    if not y_max > y_min:
        v.fail(gpath + ("y_max",), "must exceed y_min")
    return GridSpec(x_min, x_max, nx, y_min, y_max, ny)


ROOT_KEYS = (
    "seed",
    "channel",
    "lo_frequency_hz",
    "if_frequency_hz",
    "readout_drive_conversion_rad_per_s_per_v",
    "mixer",
    "qubit",
    "resonator",
    "noise",
    "drive_leakage_scan",
    "drive_sideband_scan",
    "measurement_scan",
    "search",
    "sweep",
)


def parse_config(text: str) -> RunConfig:
    """Validate a YAML document against the run schema.

    Missing sections take the desk-scale defaults; unknown keys or
    out-of-range values raise ConfigError with the line number.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {exc}", line) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1)
    v = _Validator(data, _line_map(text))
    v.reject_unknown(data, (), ROOT_KEYS)

    seed = v.integer(data, (), "seed", None, minimum=0, maximum=2**64 - 1, allow_none=True)
    channel = v.string(data, (), "channel", "default")
    f_lo = v.number(data, (), "lo_frequency_hz", 100e6, minimum=0, strict_min=True)
    f_if = v.number(data, (), "if_frequency_hz", 20e6, minimum=0, strict_min=True)
    conversion = v.number(
        data, (), "readout_drive_conversion_rad_per_s_per_v", 3.5e5, minimum=0, strict_min=True
    )
    if not f_lo > f_if:
        v.fail(("if_frequency_hz",), "must be below lo_frequency_hz")

    sec = v.section(data, (), "mixer")
    v.reject_unknown(
        sec,
        ("mixer",),
        (
            "carrier_leakage_real",
            "carrier_leakage_imag",
            "image_gain_real",
            "image_gain_imag",
            "attenuation",
        ),
    )
    mp = ("mixer",)
    mixer = MixerImperfection(
        carrier_leakage=complex(
            v.number(sec, mp, "carrier_leakage_real", 0.02 * math.cos(math.pi / 3)),
            v.number(sec, mp, "carrier_leakage_imag", 0.02 * math.sin(math.pi / 3)),
        ),
        image_gain=complex(
            v.number(sec, mp, "image_gain_real", 0.05 * math.cos(-0.7)),
            v.number(sec, mp, "image_gain_imag", 0.05 * math.sin(-0.7)),
        ),
        attenuation=v.number(sec, mp, "attenuation", 1.0, minimum=0, strict_min=True),
    )

    sec = v.section(data, (), "qubit")
    v.reject_unknown(sec, ("qubit",), ("frequency_hz", "drive_coupling_rad_per_s_per_v"))
    qp = ("qubit",)
    qubit = QubitParams(
        qubit_frequency=v.number(sec, qp, "frequency_hz", 70e6, minimum=0, strict_min=True),
        drive_coupling=v.number(
            sec, qp, "drive_coupling_rad_per_s_per_v", 2 * math.pi * 90e6,
            minimum=0, strict_min=True,
        ),
    )

    sec = v.section(data, (), "resonator")
    v.reject_unknown(
        sec,
        ("resonator",),
        (
            "frequency_hz",
            "linewidth_hz",
            "input_coupling_hz",
            "qubit_coupling_hz",
            "dispersive_shift_hz",
            "fock_truncation",
        ),
    )
    rp = ("resonator",)
    resonator = ResonatorParams(
        resonator_frequency=v.number(sec, rp, "frequency_hz", 50e6, minimum=0, strict_min=True),
        linewidth=v.number(sec, rp, "linewidth_hz", 50e6, minimum=0, strict_min=True),
        input_coupling=v.number(sec, rp, "input_coupling_hz", 50e6, minimum=0, strict_min=True),
        qubit_coupling=v.number(sec, rp, "qubit_coupling_hz", 1e6, minimum=0, strict_min=True),
        dispersive_shift=v.number(
            sec, rp, "dispersive_shift_hz", 5e4, minimum=0, strict_min=True
        ),
        fock_truncation=v.integer(sec, rp, "fock_truncation", 20, minimum=2),
    )

    sec = v.section(data, (), "noise")
    v.reject_unknown(sec, ("noise",), ("shots", "readout_error_01", "readout_error_10"))
    np_ = ("noise",)
    noise = NoiseModel(
        shots=v.integer(sec, np_, "shots", 1000, minimum=1, allow_none=True),
        readout_error_01=v.number(sec, np_, "readout_error_01", 0.0, minimum=0.0, maximum=0.499999),
        readout_error_10=v.number(sec, np_, "readout_error_10", 0.0, minimum=0.0, maximum=0.499999),
        seed=seed if seed is not None else 0,
    )

    setup = VirtualSetup(
        mixer=mixer,
        qubit=qubit,
        resonator=resonator,
        f_lo=f_lo,
        f_if=f_if,
        noise=noise,
        readout_drive_conversion=conversion,
    )

    sec = v.section(data, (), "drive_leakage_scan")
    dp = ("drive_leakage_scan",)
    v.reject_unknown(sec, dp, ("detuning_hz", "pulse_duration_s", "grid"))
    det = v.number(sec, dp, "detuning_hz", 1e6)
    if det == 0:
        v.fail(dp + ("detuning_hz",), "must be nonzero")
    drive_leakage = DriveScanSettings(
        detuning=det,
        pulse_duration=v.number(sec, dp, "pulse_duration_s", 10e-6, minimum=0, strict_min=True),
        grid=_grid(v, sec, dp),
    )

    sec = v.section(data, (), "drive_sideband_scan")
    sp = ("drive_sideband_scan",)
    v.reject_unknown(
        sec, sp, ("detuning_hz", "pulse_duration_s", "envelope_amplitude_v", "grid")
    )
    det = v.number(sec, sp, "detuning_hz", 2e6)
    if det == 0:
        v.fail(sp + ("detuning_hz",), "must be nonzero")
    drive_sideband = SidebandScanSettings(
        detuning=det,
        pulse_duration=v.number(sec, sp, "pulse_duration_s", 10e-6, minimum=0, strict_min=True),
        envelope_amplitude=v.number(
            sec, sp, "envelope_amplitude_v", None, minimum=0, strict_min=True, allow_none=True
        ),
        grid=_grid(v, sec, sp),
    )

    sec = v.section(data, (), "measurement_scan")
    mp2 = ("measurement_scan",)
    v.reject_unknown(
        sec, mp2, ("detuning_hz", "ramsey_delay_s", "virtual_detuning_hz", "grid")
    )
    measurement = MeasurementScanSettings(
        detuning=v.number(sec, mp2, "detuning_hz", 10e6),
        ramsey=RamseyConfig(
            delay=v.number(sec, mp2, "ramsey_delay_s", 1e-6, minimum=0.0),
            virtual_detuning=v.number(sec, mp2, "virtual_detuning_hz", 0.25e6),
        ),
        grid=_grid(v, sec, mp2),
    )

    sec = v.section(data, (), "search")
    sp2 = ("search",)
    v.reject_unknown(
        sec, sp2, ("radius", "window_shrink", "max_iterations", "convergence_tol")
    )
    search = SearchConfig(
        radius=v.number(sec, sp2, "radius", None, minimum=0, strict_min=True, allow_none=True),
        window_shrink=v.number(sec, sp2, "window_shrink", 0.5, minimum=1e-9, maximum=0.999999),
        max_iterations=v.integer(sec, sp2, "max_iterations", 20, minimum=1),
        convergence_tol=v.number(
            sec, sp2, "convergence_tol", None, minimum=0, strict_min=True, allow_none=True
        ),
    )

    sec = v.section(data, (), "sweep")
    wp = ("sweep",)
    v.reject_unknown(sec, wp, ("detunings_hz", "metric"))
    raw_det = sec.get("detunings_hz", [50e6, 20e6, 10e6, 5e6, 2e6, 1e6])
    if not isinstance(raw_det, list) or not raw_det:
        v.fail(wp + ("detunings_hz",), "expected a non-empty list of frequencies")
    detunings = []
    for i, item in enumerate(raw_det):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            v.fail(wp + ("detunings_hz", i), f"expected a number, got {item!r}")
        detunings.append(float(item))
    sweep_metric = v.string(sec, wp, "metric", "drive-excitation", choices=SWEEP_METRICS)

    resolved = {
        "seed": seed,
        "channel": channel,
        "lo_frequency_hz": f_lo,
        "if_frequency_hz": f_if,
        "readout_drive_conversion_rad_per_s_per_v": conversion,
        "mixer": {
            "carrier_leakage_real": mixer.carrier_leakage.real,
            "carrier_leakage_imag": mixer.carrier_leakage.imag,
            "image_gain_real": mixer.image_gain.real,
            "image_gain_imag": mixer.image_gain.imag,
            "attenuation": mixer.attenuation,
        },
        "qubit": {
            "frequency_hz": qubit.qubit_frequency,
            "drive_coupling_rad_per_s_per_v": qubit.drive_coupling,
        },
        "resonator": {
            "frequency_hz": resonator.resonator_frequency,
            "linewidth_hz": resonator.linewidth,
            "input_coupling_hz": resonator.input_coupling,
            "qubit_coupling_hz": resonator.qubit_coupling,
            "dispersive_shift_hz": resonator.dispersive_shift,
            "fock_truncation": resonator.fock_truncation,
        },
        "noise": {
            "shots": noise.shots,
            "readout_error_01": noise.readout_error_01,
            "readout_error_10": noise.readout_error_10,
        },
        "drive_leakage_scan": {
            "detuning_hz": drive_leakage.detuning,
            "pulse_duration_s": drive_leakage.pulse_duration,
            "grid": _grid_dict(drive_leakage.grid, mixer.carrier_leakage),
        },
        "drive_sideband_scan": {
            "detuning_hz": drive_sideband.detuning,
            "pulse_duration_s": drive_sideband.pulse_duration,
            "envelope_amplitude_v": drive_sideband.envelope_amplitude,
            "grid": _grid_dict(drive_sideband.grid, mixer.image_gain),
        },
        "measurement_scan": {
            "detuning_hz": measurement.detuning,
            "ramsey_delay_s": measurement.ramsey.delay,
            "virtual_detuning_hz": measurement.ramsey.virtual_detuning,
            "grid": _grid_dict(measurement.grid, mixer.carrier_leakage),
        },
        "search": {
            "radius": search.radius,
            "window_shrink": search.window_shrink,
            "max_iterations": search.max_iterations,
            "convergence_tol": search.convergence_tol,
        },
        "sweep": {"detunings_hz": detunings, "metric": sweep_metric},
    }
    return RunConfig(
        seed=seed,
        channel=channel,
        setup=setup,
        drive_leakage=drive_leakage,
        drive_sideband=drive_sideband,
        measurement=measurement,
        search=search,
        sweep_detunings=tuple(detunings),
        sweep_metric=sweep_metric,
        resolved=resolved,
    )


def _grid_dict(grid: GridSpec | None, defect: complex) -> dict:
    if grid is None:
        grid = default_offset_grid(abs(defect))
    return {
        "x_min": grid.x_min,
        "x_max": grid.x_max,
        "nx": grid.nx,
        "y_min": grid.y_min,
        "y_max": grid.y_max,
        "ny": grid.ny,
    }


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
