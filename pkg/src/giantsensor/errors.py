"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (CLI exit code 2),
numerical pathologies from :class:`NumericalError` (exit code 3).
"""


class GiantSensorError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GiantSensorError, ValueError):
    """Invalid user input. ``key`` names the offending parameter when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NonHermitianInput(ValidationError):
    pass


class NegativeRate(ValidationError):
    pass


class ZeroKappa(ValidationError):
    pass


class InvalidHorizon(ValidationError):
    pass


class UnknownKey(ValidationError):
    pass


class ConfigTypeError(ValidationError, TypeError):
    pass


class NumericalError(GiantSensorError):
    """A computation could not produce a meaningful number."""

    code = "NUMERICAL"


class SingularSystem(NumericalError):
    """The system matrix is (numerically) singular at the requested point."""

    code = "SINGULAR"

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class NonpositiveNoise(NumericalError):
    code = "NONPOSITIVE_NOISE"


class NotConverged(NumericalError):
    code = "NOT_CONVERGED"

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class StepTooLarge(NumericalError):
    code = "STEP_TOO_LARGE"


class NotUnimodal(NumericalError):
    code = "NOT_UNIMODAL"

    def __init__(self, message, extrema=()):
        super().__init__(message)
        self.extrema = list(extrema)
