"""Exception types raised by the model and simulator."""


class ComsatError(Exception):
    """Base class for all package errors."""


class ParameterError(ComsatError, ValueError):
    """A physical parameter violates its invariant.

    ``field`` names the offending parameter so front ends can report it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class GeometryDomainError(ComsatError, ValueError):
    """An angle or distance argument lies outside the supported domain."""


class DegenerateGeometryError(ComsatError, ValueError):
    """The requested quantity has no density (zero-width support)."""


class NoServingRegionError(ComsatError, ArithmeticError):
    """The serving cone is empty (eta == 0), so the mean channel sum vanishes."""


class NoLoadError(ComsatError, ArithmeticError):
    """The average satellite load underflowed; the per-user rate is unbounded."""


class EstimatorError(ComsatError, ValueError):
    """A Monte Carlo estimator was called outside its preconditions."""
