"""Append-only store of calibration records, one JSON object per line.

Regular recalibration produces a slowly growing log of per-channel results;
the store keeps them in arrival order, append-only, so drift can be tracked
by diffing records over time.  Appends are atomic (write-temp-then-rename)
and serialized by an advisory lock; reads never lock.

Note: residuals of exactly cancelled tones are ``-Infinity``, serialized via
Python's JSON infinity extension.
"""
from __future__ import annotations

import fcntl
import json
import os
import tempfile
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

from .errors import CorruptRecordError, DomainError, StoreError

__all__ = ["CalibrationRecord", "store_append", "store_list", "utc_timestamp"]

ROLES = ("drive", "measurement")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class CalibrationRecord:
    """One completed calibration of one channel."""

    channel_id: str
    timestamp: str
    role: str
    i_offset: float
    q_offset: float
    c_real: float
    c_imag: float
    residual_carrier_db: float
    residual_image_db: float | None
    config_digest: str

    def __post_init__(self):
        if not self.channel_id:
            raise DomainError("channel_id must be non-empty")
        if self.role not in ROLES:
            raise DomainError(f"role must be one of {ROLES}")
        try:
            datetime.fromisoformat(self.timestamp)
        except ValueError as exc:
            raise DomainError(f"timestamp {self.timestamp!r} is not ISO-8601") from exc
        try:
            bytes.fromhex(self.config_digest)
        except ValueError as exc:
            raise DomainError("config_digest must be a hex string") from exc

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "CalibrationRecord":
        data = json.loads(line)
        if not isinstance(data, dict):
            raise DomainError("record line must hold a JSON object")
        fields = set(cls.__dataclass_fields__)
        unknown = set(data) - fields
        if unknown:
            raise DomainError(f"unknown record fields: {sorted(unknown)}")
        missing = fields - set(data)
        if missing:
            raise DomainError(f"missing record fields: {sorted(missing)}")
        return cls(**data)


def _lock_path(path: str) -> str:
    return path + ".lock"


def store_append(path: str, record: CalibrationRecord) -> None:
    """Atomically append one record.

    The new file is assembled next to the store and swapped in with
    os.replace, so readers see either the old or the new store, never a torn
    line.  Concurrent appenders serialize on an advisory lock.
    """
    directory = os.path.dirname(os.path.abspath(path)) or "."
    with open(_lock_path(path), "w") as lock:
        fcntl.flock(lock, fcntl.LOCK_EX)
        try:
            try:
                with open(path, "rb") as fh:
                    existing = fh.read()
            except FileNotFoundError:
                existing = b""
            if existing and not existing.endswith(b"\n"):
                existing += b"\n"
            payload = existing + record.to_json_line().encode() + b"\n"
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=".store-", suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(payload)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        finally:
            fcntl.flock(lock, fcntl.LOCK_UN)


def store_list(
    path: str,
    channel: str | None = None,
    since: str | None = None,
) -> list[CalibrationRecord]:
    """Records in file order, optionally filtered by channel and start time.

    A missing store reads as empty.  A corrupt line raises
    CorruptRecordError carrying its line number and the valid records parsed
    before it.
    """
    since_dt = None
    if since is not None:
        try:
            since_dt = datetime.fromisoformat(since)
        except ValueError as exc:
            raise StoreError(f"invalid --since timestamp {since!r}") from exc
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        return []
    records: list[CalibrationRecord] = []
    selected: list[CalibrationRecord] = []
    for i, line in enumerate(lines, start=1):
        try:
            rec = CalibrationRecord.from_json_line(line)
        except (json.JSONDecodeError, DomainError, TypeError) as exc:
            raise CorruptRecordError(str(exc), i, selected) from exc
        records.append(rec)
        if channel is not None and rec.channel_id != channel:
            continue
        if since_dt is not None and datetime.fromisoformat(rec.timestamp) < since_dt:
            continue
        selected.append(rec)
    return selected
