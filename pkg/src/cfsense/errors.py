"""Exception hierarchy shared across the toolkit.

Two failure families matter to callers (and to the CLI exit-code contract):
configuration problems (bad files, unknown keys, wrong units) and physics
problems (inputs that describe an impossible sample or an impossible
operating point).
"""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input (file/schema level)."""


class PhysicsError(ValueError):
    """Physically inconsistent model input (geometry, materials, circuit)."""


class RecordError(ValueError):
    """Base class for time-series record parsing failures."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class HeaderError(RecordError):
    """CSV header does not match the record schema."""


class UnitMismatchError(RecordError):
    """A header column carries an unexpected unit suffix."""


class MalformedRowError(RecordError):
    """A data row is truncated or not numeric."""


class NonMonotonicTimeError(RecordError):
    """Time column is not strictly increasing."""
