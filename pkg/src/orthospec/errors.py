"""Exception types shared across the package."""


class OrthospecError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(OrthospecError, ValueError):
    """A caller-supplied parameter is outside its admissible range."""


class SingularityError(OrthospecError, ArithmeticError):
    """The resolvent weight 1/(1/mu - T(y)) is evaluated too close to its pole.

    Carries the offending mu and, when available, the y (or index) values
    where the denominator collapsed.
    """

    def __init__(self, message, mu=None, where=None):
        super().__init__(message)
        self.mu = mu
        self.where = where


class NumericError(OrthospecError, RuntimeError):
    """A numerical routine failed (bracket not found, accuracy check failed, ...).

    The message carries diagnostics; nothing is silently clamped.
    """


class DegeneratePredictionError(NumericError):
    """A prediction formula hit a near-zero denominator."""


class DegenerateStateError(OrthospecError, ValueError):
    """An iterate collapsed (zero projection, zero vector) where a direction is required."""


class ConfigError(OrthospecError, ValueError):
    """A run configuration (file or flag) is missing, malformed, or inconsistent."""
