"""Command-line interface: scan, calibrate, sweep, and the record store.

Exit codes: 0 success, 2 configuration/usage error, 3 calibration did not
converge, 4 I/O or store error.
"""
from __future__ import annotations

import functools
import secrets
import sys

import click

from . import virtual_lab
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError, MixcalError, StoreError
from .grid_io import write_grid_csv
from .store import CalibrationRecord, store_append, store_list, utc_timestamp

EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_IO = 4

SCAN_MODES = ("drive-leakage", "drive-sideband", "measurement-leakage")


class NonConvergenceError(MixcalError):
    pass


def _translate_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, DomainError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except NonConvergenceError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NO_CONVERGENCE)
        except (StoreError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def _load(config_path: str, seed: int | None) -> RunConfig:
    cfg = load_config(config_path)
    if seed is not None:
        cfg = cfg.with_seed(seed)
    elif cfg.seed is None:
        generated = secrets.randbits(63)
        cfg = cfg.with_seed(generated)
        click.echo(f"seed: {generated} (generated; pass --seed to reproduce)")
    return cfg


def _store_path(option: str | None) -> str:
    import os

    path = option or os.environ.get("MIXCAL_STORE")
    if not path:
        raise ConfigError("no store path: pass --store or set MIXCAL_STORE")
    return path


@click.group()
def main():
    """Virtual IQ-mixer calibration bench."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", required=True, type=click.Choice(SCAN_MODES))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=False))
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None)
@_translate_errors
def scan(config_path, mode, out_path, seed):
    """Run one qubit-as-detector scan and write the grid as CSV."""
    cfg = _load(config_path, seed)
    setup = cfg.setup
    comment = None
    if mode == "drive-leakage":
        grid = virtual_lab.run_drive_leakage_scan(
            setup, cfg.drive_leakage.detuning, cfg.drive_leakage.grid,
            cfg.drive_leakage.pulse_duration,
        )
    elif mode == "drive-sideband":
        grid = virtual_lab.run_drive_sideband_scan(
            setup, cfg.drive_sideband.detuning, cfg.drive_sideband.grid,
            cfg.drive_sideband.envelope_amplitude, cfg.drive_sideband.pulse_duration,
        )
        comment = "mode=drive-sideband x=Re(c) y=Im(c)"
    else:
        grid = virtual_lab.run_measurement_leakage_scan(
            setup, cfg.measurement.detuning, cfg.measurement.grid, cfg.measurement.ramsey
        )
    write_grid_csv(out_path, grid, comment)
    click.echo(f"wrote {grid.p.size} points to {out_path}")


def _format_db(value: float | None) -> str:
    if value is None:
        return "n/a"
    return f"{value:.1f} dB"


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--role", required=True, type=click.Choice(["drive", "measurement"]))
@click.option("--store", "store_option", default=None, type=click.Path(dir_okay=False))
@click.option("--channel", "channel_option", default=None)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None)
@_translate_errors
def calibrate(config_path, role, store_option, channel_option, seed):
    """Calibrate one mixer, report the result, and append it to the store."""
    cfg = _load(config_path, seed)
    store_path = _store_path(store_option)
    channel = channel_option or cfg.channel
    setup = cfg.setup
    if role == "drive":
        outcome = virtual_lab.calibrate_drive_mixer(
            setup,
            leakage_detuning=cfg.drive_leakage.detuning,
            sideband_detuning=cfg.drive_sideband.detuning,
            leakage_grid=cfg.drive_leakage.grid,
            sideband_grid=cfg.drive_sideband.grid,
            search=cfg.search,
            pulse_duration=cfg.drive_leakage.pulse_duration,
        )
    else:
        outcome = virtual_lab.calibrate_measurement_mixer(
            setup,
            detuning=cfg.measurement.detuning,
            grid=cfg.measurement.grid,
            ramsey=cfg.measurement.ramsey,
            search=cfg.search,
        )

    for stage, est in outcome.estimates.items():
        click.echo(f"[{stage}] {est.iterations} iterations, converged={est.converged}")
        for i, (x, y) in enumerate(est.trajectory):
            click.echo(f"  step {i}: ({x:+.6g}, {y:+.6g})")
    click.echo(
        f"offsets: I0={outcome.optimal_offsets[0]:+.6g} V, "
        f"Q0={outcome.optimal_offsets[1]:+.6g} V"
    )
    click.echo(f"sideband correction: {outcome.optimal_c:+.6g}")
    click.echo(
        "residual carrier: "
        f"{_format_db(outcome.residual_carrier_db)} "
        f"(uncalibrated {_format_db(outcome.uncalibrated_carrier_db)})"
    )
    click.echo(
        "residual image: "
        f"{_format_db(outcome.residual_image_db)} "
        f"(uncalibrated {_format_db(outcome.uncalibrated_image_db)})"
    )
    if not outcome.success:
        raise NonConvergenceError(
            "center search did not converge; no record appended"
        )
    record = CalibrationRecord(
        channel_id=channel,
        timestamp=utc_timestamp(),
        role=role,
        i_offset=outcome.optimal_offsets[0],
        q_offset=outcome.optimal_offsets[1],
        c_real=outcome.optimal_c.real,
        c_imag=outcome.optimal_c.imag,
        residual_carrier_db=outcome.residual_carrier_db,
        residual_image_db=outcome.residual_image_db,
        config_digest=cfg.digest,
    )
    store_append(store_path, record)
    click.echo(f"appended record for channel {channel!r} to {store_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None)
@_translate_errors
def sweep(config_path, out_path, seed):
    """Tabulate the error metric vs detuning, raw and calibrated."""
    cfg = _load(config_path, seed)
    if not cfg.sweep_detunings:
        raise ConfigError("sweep.detunings_hz must be non-empty")
    rows = virtual_lab.detuning_sweep(
        cfg.setup, cfg.sweep_detunings, metric=cfg.sweep_metric
    )
    lines = ["detuning_hz,metric_uncal,metric_cal"]
    for row in rows:
        lines.append(f"{row.detuning!r},{row.metric_uncal!r},{row.metric_cal!r}")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    click.echo(f"wrote {len(rows)} rows to {out_path}")


@main.group()
def store():
    """Inspect the calibration-record store."""


@store.command("list")
@click.option("--store", "store_option", default=None, type=click.Path(dir_okay=False))
@click.option("--channel", default=None)
@click.option("--since", default=None, help="ISO-8601 lower bound on timestamps")
@_translate_errors
def store_list_cmd(store_option, channel, since):
    """Print matching records, one JSON object per line, in file order."""
    path = _store_path(store_option)
    for rec in store_list(path, channel=channel, since=since):
        click.echo(rec.to_json_line())


if __name__ == "__main__":
    main()
