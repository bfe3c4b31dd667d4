"""Exception hierarchy shared by all modules."""


class RwaMarkovError(Exception):
    """Base class for every error raised by the package."""


class PoleTooClose(RwaMarkovError):
    """Laplace transform evaluated at (or numerically at) a pole."""


class ConvergenceFailure(RwaMarkovError):
    """An iterative eigensolver ran out of its sweep budget."""


class StepTooCoarse(RwaMarkovError):
    """Solver step does not resolve the kernel decay or oscillation."""


class NonFinite(RwaMarkovError):
    """The time stepping produced NaN or Inf."""


class HorizonTooLarge(RwaMarkovError):
    """Requested physical horizon exceeds the configured cost cap."""


class GridMiss(RwaMarkovError):
    """A requested time is not a sample of the propagator grid."""


class SingularPropagator(RwaMarkovError):
    """V(t) is too ill-conditioned to invert."""


class SingularRenormalization(RwaMarkovError):
    """The renormalization matrix r is too ill-conditioned to invert."""


class DefectiveGenerator(RwaMarkovError):
    """The generator L is not diagonalizable within tolerance."""


class DegenerateFit(RwaMarkovError):
    """An error in a lambda sweep fell below the floating point floor."""


class ParseError(RwaMarkovError):
    """A scenario file could not be parsed."""


class ValidationError(RwaMarkovError):
    """A scenario violates an invariant.  ``field`` names the offender."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
