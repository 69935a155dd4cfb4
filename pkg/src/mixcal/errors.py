"""Exception types shared across the package."""


class MixcalError(Exception):
    """Base class for all package-specific errors."""


class DomainError(MixcalError, ValueError):
    """An argument is outside the physical or mathematical domain of an operation."""


class SingularityError(DomainError):
    """A closed-form population formula was evaluated at its detuning pole.

    The analytic populations diverge on resonance; callers must fall back to
    the numeric time-evolution path there.
    """


class TruncationError(MixcalError):
    """The truncated Fock space is too small for the requested evolution."""

    def __init__(self, top_level_population: float, fock_truncation: int):
        self.top_level_population = top_level_population
        self.fock_truncation = fock_truncation
        super().__init__(
            f"population {top_level_population:.3e} in the top Fock level exceeds 1e-4; "
            f"increase fock_truncation (currently {fock_truncation})"
        )


class DegenerateGridError(DomainError):
    """A scan grid carries no usable weight (e.g. all-zero populations)."""


class ConfigError(MixcalError):
    """A run configuration file failed schema validation.

    ``line`` is the 1-based line number of the offending key when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class StoreError(MixcalError):
    """The calibration-record store could not be read or written."""


class CorruptRecordError(StoreError):
    """A store line failed to parse.

    ``records`` holds the valid records read before the corrupt line, and
    ``line`` its 1-based line number.
    """

    def __init__(self, message: str, line: int, records: list):
        self.line = line
        self.records = records
        super().__init__(f"line {line}: {message}")
