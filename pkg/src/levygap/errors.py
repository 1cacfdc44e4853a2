"""Exception types shared across the package.

The CLI maps these onto exit codes, so every failure raised by library code
should be one of them (or a plain ``ValueError`` for bad arguments).
"""


class LevyGapError(Exception):
    """Base class for library errors."""


class ConfigError(LevyGapError):
    """Malformed or inconsistent run configuration."""


class DomainError(LevyGapError, ValueError):
    """Argument outside the domain where a formula is defined."""


class UnsupportedClass(LevyGapError):
    """The model class does not satisfy the structural assumption of a result."""


class NotIntegrable(LevyGapError):
    """E|X_1| or E M_t is infinite for the model."""


class MomentFailure(LevyGapError):
    """A required exponential moment E e^{qX_1} is infinite."""


class HypothesisFailure(LevyGapError):
    """Hypotheses H1/H2 of a continuity correction are not met."""


class QuadratureFailure(LevyGapError):
    """Adaptive quadrature could not reach the requested tolerance."""


class DegenerateInput(LevyGapError):
    """Input data cannot support the requested fit (e.g. nonpositive gaps)."""


class HypothesisWarning(UserWarning):
    """Emitted when a correction is evaluated outside its hypotheses."""
