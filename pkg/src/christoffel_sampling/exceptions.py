"""Shared exception types."""


class ChristoffelError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(ChristoffelError):
    """Matrix input contains non-finite entries or is otherwise unusable."""


class NotPSD(ChristoffelError):
    """Matrix has an eigenvalue below the negative tolerance band."""


class InvalidShape(ChristoffelError):
    """Operands have incompatible shapes."""


class DegenerateReference(ChristoffelError):
    """Reference Gramian has rank zero."""


class InvalidSpec(ChristoffelError):
    """Malformed dictionary/measure/experiment parameters."""


class NumericalError(ChristoffelError):
    """A numeric evaluation produced non-finite values."""


class DegenerateDensity(ChristoffelError):
    """A sampling density is identically zero."""


class DomainError(ChristoffelError):
    """Evaluation point lies outside the dictionary's domain."""


class ConfigError(ChristoffelError):
    """Unusable experiment configuration (CLI exit code 1)."""
