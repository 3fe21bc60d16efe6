"""Exception types shared across the package."""


class PvarstatError(Exception):
    """Base class for all package errors."""


class ValidationError(PvarstatError, ValueError):
    """Invalid input, configuration, or violated precondition."""


class ConfigurationError(ValidationError):
    """A specification is incomplete or cannot be acted on."""


class DegenerateFilterError(ValidationError):
    """Filter coefficients sum to zero within the declared tolerance."""


class UnsupportedExponentError(ValidationError):
    """Variation exponent outside the supported range."""


class OracleSizeError(ValidationError):
    """Input too long for exhaustive enumeration."""


class DegenerateDesignError(ValidationError):
    """Regression design with zero energy."""


class DegeneratePartitionError(ValidationError):
    """A segment of the partition contains no grid point."""


class TableMismatchError(ValidationError):
    """Critical-value table does not match the requested test."""
