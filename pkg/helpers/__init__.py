from .differences import central_difference, richardson_derivative
from .exceptions import (
    ArgumentRangeError,
    ConvergenceError,
    DomainError,
    IllConditionedError,
    LabError,
    NoRootError,
    PoleError,
    QuadratureNonConvergence,
    SeriesBudgetExceeded,
    UnsupportedArgumentError,
)

__all__ = [
    "ArgumentRangeError",
    "ConvergenceError",
    "DomainError",
    "IllConditionedError",
    "LabError",
    "NoRootError",
    "PoleError",
    "QuadratureNonConvergence",
    "SeriesBudgetExceeded",
    "UnsupportedArgumentError",
    "central_difference",
    "richardson_derivative",
]
