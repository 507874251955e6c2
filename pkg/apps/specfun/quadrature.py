"""Globally adaptive Gauss–Kronrod quadrature on finite and semi-infinite domains."""

import heapq
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace

from helpers import DomainError, QuadratureNonConvergence

logger = logging.getLogger(__name__)

MIN_REL_TOL = 2.0**-50

_EPMACH = 2.220446049250313e-16
_UFLOW = 2.2250738585072014e-308

# 15-point Kronrod abscissae; odd indices are the embedded 7-point Gauss nodes.
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


@dataclass(frozen=True)
class ToleranceSpec:
    """Accuracy demand for a quadrature call.

    A result is accepted once its error estimate is below
    ``max(abs_tol, rel_tol * |value|)``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_evals: int = 400_000

    def __post_init__(self):
        if not MIN_REL_TOL <= self.rel_tol < 1.0:
            raise DomainError(
                f"rel_tol must lie in [2**-50, 1), got {self.rel_tol}"
            )
        if not self.abs_tol >= 0.0:
            raise DomainError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_evals < 1:
            raise DomainError(f"max_evals must be >= 1, got {self.max_evals}")

    def scaled(self, factor: float) -> "ToleranceSpec":
        """A tighter (factor < 1) copy; rel_tol never drops below 2**-50."""
        return replace(
            self,
            rel_tol=max(MIN_REL_TOL, self.rel_tol * factor),
            abs_tol=self.abs_tol * factor,
        )

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _gauss_kronrod(
    f: Callable[[float], float], lower: float, upper: float
) -> tuple[float, float]:
    """One 15-point Kronrod panel with the QUADPACK error heuristic."""
    center = 0.5 * (lower + upper)
    half = 0.5 * (upper - lower)

    f_center = f(center)
    kronrod = _WGK[7] * f_center
    gauss = _WG[3] * f_center
    resabs = abs(kronrod)
    pairs = []
    for i in range(7):
        dx = half * _XGK[i]
        f1 = f(center - dx)
        f2 = f(center + dx)
        pairs.append((f1, f2))
        kronrod += _WGK[i] * (f1 + f2)
        resabs += _WGK[i] * (abs(f1) + abs(f2))
        if i % 2 == 1:
            gauss += _WG[i // 2] * (f1 + f2)

    mean = 0.5 * kronrod
    resasc = _WGK[7] * abs(f_center - mean)
    for i, (f1, f2) in enumerate(pairs):
        resasc += _WGK[i] * (abs(f1 - mean) + abs(f2 - mean))

    value = kronrod * half
    resabs *= abs(half)
    resasc *= abs(half)
    error = abs((kronrod - gauss) * half)
    if resasc != 0.0 and error != 0.0:
        error = resasc * min(1.0, (200.0 * error / resasc) ** 1.5)
    if resabs > _UFLOW / (50.0 * _EPMACH):
        error = max(50.0 * _EPMACH * resabs, error)
    return value, error


def _adaptive(
    f: Callable[[float], float], lower: float, upper: float, tol: ToleranceSpec
) -> QuadratureResult:
    value, error = _gauss_kronrod(f, lower, upper)
    evaluations = 15
    # max-heap on error: (-error, lower, upper, value, error)
    heap = [(-error, lower, upper, value, error)]
    total = value
    total_error = error

    while total_error > tol.target(total):
        if evaluations + 30 > tol.max_evals:
            raise QuadratureNonConvergence(
                f"quadrature budget of {tol.max_evals} evaluations exhausted",
                estimate=total,
                error_bound=total_error,
            )
        _, a, b, v, e = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            raise QuadratureNonConvergence(
                "interval can no longer be bisected",
                estimate=total,
                error_bound=total_error,
            )
        left_value, left_error = _gauss_kronrod(f, a, mid)
        right_value, right_error = _gauss_kronrod(f, mid, b)
        evaluations += 30
        heapq.heappush(heap, (-left_error, a, mid, left_value, left_error))
        heapq.heappush(heap, (-right_error, mid, b, right_value, right_error))
        total += left_value + right_value - v
        total_error = max(0.0, total_error + left_error + right_error - e)

    value = math.fsum(item[3] for item in heap)
    error = math.fsum(item[4] for item in heap)
    if not math.isfinite(value):
        raise QuadratureNonConvergence(
            "integrand produced a non-finite value", estimate=value
        )
    logger.debug(f"quadrature: {len(heap)} panels, {evaluations} evaluations")
    return QuadratureResult(value, error, evaluations)


def integrate_finite(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    tol: ToleranceSpec | None = None,
) -> QuadratureResult:
    """Integrate f over [lower, upper] by adaptive G7/K15 bisection.

    Raises:
        QuadratureNonConvergence: If tol.max_evals is reached first; the
            exception carries the best estimate and its error bound.
    """
    tol = tol or ToleranceSpec()
    if lower == upper:
        return QuadratureResult(0.0, 0.0, 1)
    if upper < lower:
        result = _adaptive(f, upper, lower, tol)
        return QuadratureResult(-result.value, result.error_estimate, result.evaluations)
    return _adaptive(f, lower, upper, tol)


def integrate_semi_infinite(
    f: Callable[[float], float],
    lower: float,
    tol: ToleranceSpec | None = None,
    scale: float = 1.0,
) -> QuadratureResult:
    """Integrate f over [lower, ∞).

    The domain is mapped onto [0, 1) with x = lower + scale·t/(1-t); the
    Kronrod nodes never touch t = 1. ``scale`` should be comparable to the
    length over which f decays.

    Example:
        >>> round(integrate_semi_infinite(lambda t: math.exp(-t), 0.0).value, 12)
        1.0
    """
    tol = tol or ToleranceSpec()
    if not scale > 0.0:
        raise DomainError(f"scale must be positive, got {scale}")

    def mapped(t: float) -> float:
        one_minus = 1.0 - t
        value = f(lower + scale * t / one_minus)
        if value == 0.0:
            return 0.0
        return value * scale / (one_minus * one_minus)

    return _adaptive(mapped, 0.0, 1.0, tol)


def integrate_quadrant(
    f: Callable[[float, float], float],
    tol: ToleranceSpec | None = None,
    scale: float = 1.0,
) -> QuadratureResult:
    """Integrate f(u, v) over [0, ∞)² as an iterated integral.

    The outer axis receives half of rel_tol and every inner integral a
    tenth, so the combined estimate honours ``tol``.
    """
    tol = tol or ToleranceSpec()
    outer_tol = tol.scaled(0.5)
    inner_tol = tol.scaled(0.1)
    evaluations = 0
    worst_inner = 0.0

    def inner(u: float) -> float:
        nonlocal evaluations, worst_inner
        result = integrate_semi_infinite(lambda v: f(u, v), 0.0, inner_tol, scale)
        evaluations += result.evaluations
        if result.value != 0.0:
            worst_inner = max(worst_inner, result.error_estimate / abs(result.value))
        return result.value

    outer = integrate_semi_infinite(inner, 0.0, outer_tol, scale)
    error = outer.error_estimate + worst_inner * abs(outer.value)
    return QuadratureResult(outer.value, error, evaluations)
