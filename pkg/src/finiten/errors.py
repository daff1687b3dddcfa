"""Exception types shared across the package."""


class FiniteNError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FiniteNError, ValueError):
    """A numeric argument lies outside the domain of the requested operation."""


class DegenerateSampleError(FiniteNError, ValueError):
    """The sample carries no scale information (constant values)."""


class ConfigError(FiniteNError, ValueError):
    """Inconsistent or unsupported configuration."""
