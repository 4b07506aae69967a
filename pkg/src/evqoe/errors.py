"""Exception hierarchy shared across the toolkit."""


class EvqoeError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(EvqoeError):
    """Input file does not match the documented schema."""


class InsufficientData(EvqoeError):
    """Not enough samples to run the requested estimator."""


class MissingExogData(EvqoeError):
    """Exogenous registry does not cover the requested date."""


class FitError(EvqoeError):
    """Model fitting failed for every attempted configuration."""


class NumericalError(EvqoeError):
    """A numerical routine hit a degenerate case (singular design, ...)."""
