"""Exception hierarchy shared by every app of the laboratory."""


class LabError(Exception):
    """Base class for all laboratory errors."""


class DomainError(LabError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class PoleError(DomainError):
    """The function has a pole at the requested argument."""


class ArgumentRangeError(DomainError):
    """The argument is valid mathematically but not representable in doubles."""


class UnsupportedArgumentError(DomainError):
    """The operation is only implemented for a restricted set of arguments."""


class IllConditionedError(DomainError):
    """A linear least-squares design is too close to singular."""


class ConvergenceError(LabError, ArithmeticError):
    """A series, quadrature or root find did not reach its tolerance.

    Attributes:
        estimate: Best value available when the computation stopped.
        error_bound: Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class SeriesBudgetExceeded(ConvergenceError):
    """A truncated sum ran out of terms before its tail bound was met."""


class QuadratureNonConvergence(ConvergenceError):
    """Adaptive quadrature exhausted its evaluation budget."""


class NoRootError(ConvergenceError):
    """A root bracket did not contain a sign change."""
