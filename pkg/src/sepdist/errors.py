"""Exception types shared across the package."""


class SepdistError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(SepdistError, ValueError):
    """Operands have incompatible shapes or subsystem dimensions."""


class ValidationError(SepdistError, ValueError):
    """An object violates a structural requirement (hermiticity, trace, positivity, unitarity)."""


class ParameterError(SepdistError, ValueError):
    """A scalar argument or configuration value is out of range or malformed."""


class DegenerateError(SepdistError, ArithmeticError):
    """A computation has no unique answer (zero variance, coincident states)."""


class CapacityError(SepdistError, RuntimeError):
    """A bounded construction (group closure) exceeded its cap."""


class FileFormatError(SepdistError, ValueError):
    """A state file or trace file does not parse as the expected format."""
