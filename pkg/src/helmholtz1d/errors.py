"""Exception hierarchy shared by all modules."""


class Helmholtz1DError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(Helmholtz1DError, ValueError):
    """An input violates a documented precondition."""


class GeometryError(ValidationError):
    """Source/receiver/jump ordering is violated."""


class ReflectivityRangeError(ValidationError):
    """A reflectivity lies outside the open unit disk."""


class DomainError(ValidationError):
    """A wave speed or parameter is outside its admissible domain."""


class SingularFrequencyError(ValidationError):
    """A computation that divides by omega was asked to evaluate at omega = 0."""


class PoleError(Helmholtz1DError, ZeroDivisionError):
    """A linear fractional transformation was evaluated at its pole."""


class InversionError(Helmholtz1DError):
    """Base class for failures inside the reconstruction pipeline.

    ``step`` names the pipeline stage that failed so that callers (the CLI in
    particular) can report it.
    """

    step = "inversion"

    def __init__(self, message, step=None):
        super().__init__(message)
        if step is not None:
            self.step = step


class InsufficientBandError(InversionError):
    """The trace does not contain a full period of the surrogate reflection."""

    step = "fourier"


class AliasingError(InversionError):
    """Too few samples for the requested number of Fourier coefficients."""

    step = "fourier"


class DegenerateMeasureError(InversionError):
    """A Gram norm vanished while recovering reflectivities from moments."""

    step = "moments-to-reflectivities"


class NoArrivalDetected(InversionError):
    """No almost-periodic mean exceeded the detection threshold."""

    step = "first-arrival"
