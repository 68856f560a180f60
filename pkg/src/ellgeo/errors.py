"""Exception hierarchy.

Every error raised by the package derives from :class:`GeodesicError`. The
CLI maps the three families below onto its exit codes.
"""


class GeodesicError(Exception):
    """Base class for all package errors."""


class ValidationError(GeodesicError):
    """Bad input data: wrong shapes, off-manifold states, degenerate axes."""


class NumericalFailure(GeodesicError):
    """An iterative solver did not reach its target."""


class IntegrationError(GeodesicError):
    """The ODE integrator could not continue."""


class NonPositiveAxis(ValidationError):
    pass


class DuplicateAxis(ValidationError):
    pass


class DegenerateForm(ValidationError):
    pass


class ConstraintViolation(ValidationError):
    pass


class ZeroVelocity(ValidationError):
    pass


class PoleAtAxis(ValidationError):
    pass


class DegenerateChord(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class ResamplingFailure(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class NonFiniteState(IntegrationError):
    pass


class StepUnderflow(IntegrationError):
    pass


class MaxStepsExceeded(IntegrationError):
    pass


class NonMonotoneTime(IntegrationError):
    pass
