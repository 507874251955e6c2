"""Aspect ratio at which the Casimir tension changes sign.

Under uniform rescaling E(a, b) = g(b/a)/a, so the tension has the sign of
the energy and the critical ratio is the zero of r ↦ E(1, r).
"""

import logging
import math
from dataclasses import dataclass

from apps.casimir.energy import DEFAULT_CONTROL, energy_ar
from apps.casimir.geometry import Geometry
from apps.epstein.series import SeriesControl
from helpers import ConvergenceError, DomainError, NoRootError

logger = logging.getLogger(__name__)

BRACKET = (2.0, 4.0)
BISECTION_WIDTH = 1e-3
MAX_ITERATIONS = 200
TOL_RANGE = (1e-10, 1e-2)


@dataclass(frozen=True)
class CriticalRatio:
    root: float
    bracket: tuple[float, float]
    iterations: int


def _energy_at_ratio(ratio: float, ctrl: SeriesControl) -> float:
    return energy_ar(Geometry(1.0, ratio), ctrl=ctrl).total


def solve_critical_ratio(
    tol: float = 1e-6, ctrl: SeriesControl = DEFAULT_CONTROL
) -> CriticalRatio:
    """Root of E(1, r) = 0 on [2, 4].

    Bisects until the bracket is 1e-3 wide, then switches to secant steps,
    falling back to bisection whenever a secant step leaves the bracket.

    Raises:
        DomainError: If tol is outside [1e-10, 1e-2]
        NoRootError: If E(1, r) does not change sign on the bracket
    """
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise DomainError(f"tol must lie in [1e-10, 1e-2], got {tol}")

    lo, hi = BRACKET
    f_lo = _energy_at_ratio(lo, ctrl)
    f_hi = _energy_at_ratio(hi, ctrl)
    if f_lo == 0.0:
        return CriticalRatio(lo, (lo, lo), 0)
    if f_hi == 0.0:
        return CriticalRatio(hi, (hi, hi), 0)
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise NoRootError(
            f"E(1, r) has the same sign at r = {lo} and r = {hi}",
            estimate=None,
        )

    iterations = 0
    while hi - lo > BISECTION_WIDTH:
        iterations += 1
        mid = 0.5 * (lo + hi)
        f_mid = _energy_at_ratio(mid, ctrl)
        if f_mid == 0.0:
            return CriticalRatio(mid, (mid, mid), iterations)
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid

    x_prev, f_prev = lo, f_lo
    x, f_x = hi, f_hi
    while iterations < MAX_ITERATIONS:
        iterations += 1
        if f_x == f_prev:
            candidate = 0.5 * (lo + hi)
        else:
            candidate = x - f_x * (x - x_prev) / (f_x - f_prev)
            if not lo < candidate < hi:
                candidate = 0.5 * (lo + hi)
        f_candidate = _energy_at_ratio(candidate, ctrl)
        step = abs(candidate - x)

        if f_candidate == 0.0:
            lo = hi = candidate
        elif (f_candidate > 0.0) == (f_lo > 0.0):
            lo, f_lo = candidate, f_candidate
        else:
            hi, f_hi = candidate, f_candidate

        x_prev, f_prev = x, f_x
        x, f_x = candidate, f_candidate
        if step <= tol * abs(x) or hi - lo <= tol * abs(x):
            logger.debug(f"critical ratio {x!r} after {iterations} iterations")
            return CriticalRatio(x, (lo, hi), iterations)

    raise ConvergenceError(
        f"critical ratio not converged in {MAX_ITERATIONS} iterations",
        estimate=x,
        error_bound=hi - lo,
    )


def critical_ratio(tol: float = 1e-6, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """The aspect ratio b/a ≈ 2.74 above which the tension turns negative."""
    return solve_critical_ratio(tol, ctrl).root
