"""Exception types raised across the package."""


class LeakageError(Exception):
    """Base class for all package errors."""


class DimensionError(LeakageError, ValueError):
    """Invalid Hilbert-space dimension, or mismatched operand shapes."""


class DomainError(LeakageError, ValueError):
    """Argument outside the domain where a quantity is defined."""


class UnsupportedQueryError(LeakageError, ValueError):
    """Query that is meaningless for the given object (e.g. pointwise field of an impulse)."""


class ProjectionError(LeakageError, ValueError):
    """Initial subspace density has weight outside the chosen projector."""


class TruncationError(LeakageError, RuntimeError):
    """Fock truncation failed to converge."""


class ConfigurationError(LeakageError, ValueError):
    """Invalid scenario, box or command configuration."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)
