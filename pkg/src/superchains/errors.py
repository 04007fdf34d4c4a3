"""Typed errors raised across the package.

Every failure mode the library promises to detect maps to one of these
classes so callers (and the CLI exit-code translation) can dispatch on type
instead of parsing messages.
"""


class SuperchainError(Exception):
    """Base class for all package errors."""


class ShapeError(SuperchainError):
    """A tensor or file does not have the declared (K, M, N, D) extent."""


class DataError(SuperchainError):
    """Non-finite or otherwise unusable numeric content."""


class IngestionError(SuperchainError):
    """A serialized draw or config file could not be parsed."""


class DegenerateVarianceError(SuperchainError):
    """A variance that must be positive is exactly zero."""


class InsufficientDrawsError(SuperchainError):
    """Too few draws per chain for the requested estimator."""


class InsufficientSuperchainsError(SuperchainError):
    """Fewer than two superchains (or chains) where a spread is needed."""


class InvalidLawError(SuperchainError):
    """A chain law violates symmetry/PSD/shape requirements."""


class InvalidParameterError(SuperchainError):
    """A scalar parameter outside its documented domain."""


class DegenerateRegimeError(SuperchainError):
    """A closed-form quantity is evaluated where it is undefined."""


class AssumptionViolationError(SuperchainError):
    """A numerically checked analytical assumption failed on this input."""


class InitializationError(SuperchainError):
    """Chains cannot be started (non-finite density at the initial point)."""


class ConfigurationError(SuperchainError):
    """A run/CLI configuration is incomplete or contradictory."""


class MissingBenchmarkError(ConfigurationError):
    """Reference moments were requested but no cache entry exists."""
