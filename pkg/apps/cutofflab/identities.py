"""Limit identities of the cutoff derivation, checked by evaluating both
sides independently.

All integrands are written in manifestly real form; the Bose factor
1/(e^x - 1) is evaluated as e^(-x)/(1 - e^(-x)) so it neither overflows
nor loses digits near zero.
"""

import logging
import math
from dataclasses import dataclass

from apps.casimir.energy import DEFAULT_CONTROL, ZETA3
from apps.casimir.geometry import Geometry
from apps.epstein.series import INNER_STOP_FACTOR, SeriesControl, geometric_tail
from apps.specfun.functions import bessel_k
from apps.specfun.quadrature import (
    ToleranceSpec,
    integrate_quadrant,
    integrate_semi_infinite,
)
from helpers import DomainError, SeriesBudgetExceeded, UnsupportedArgumentError

logger = logging.getLogger(__name__)

ABEL_PLANA_CASES = ("exp_decay", "rational")
# exp(-x) is below the smallest normal double
_BOSE_CUTOFF = 745.0
_COSH_LIMIT = 700.0


@dataclass(frozen=True)
class IdentityCheck:
    """Two independently computed sides of an identity.

    ``cross_check`` holds a third evaluation where one exists.
    """

    left: float
    right: float
    cross_check: float | None = None

    @property
    def discrepancy(self) -> float:
        return abs(self.left - self.right)

    @property
    def relative_discrepancy(self) -> float:
        return self.discrepancy / max(abs(self.left), abs(self.right))


def bose(x: float) -> float:
    """1/(e^x - 1) for x > 0."""
    if x > _BOSE_CUTOFF:
        return 0.0
    return math.exp(-x) / -math.expm1(-x)


def identity_I_infinity(g: Geometry, tol: ToleranceSpec | None = None) -> IdentityCheck:
    """-2ab∫₀^∞du∫_u^∞dv sqrt(v² - u²)/(e^{2πav} - 1) = -ζ(3)b/(8π²a²).

    ``left`` integrates the reduced single integral -(πab/2)∫v²/(e^{2πav}-1),
    ``cross_check`` the double integral itself after v = u + y², which
    turns sqrt(v² - u²)dv into 2y²·sqrt(2u + y²)dy.
    """
    a, b = g.a, g.b
    c = 2.0 * math.pi * a

    reduced = integrate_semi_infinite(lambda v: v * v * bose(c * v), 0.0, tol, scale=1.0 / c)

    def unreduced_integrand(u, y):
        return 2.0 * y * y * math.sqrt(2.0 * u + y * y) * bose(c * (u + y * y))

    unreduced = integrate_quadrant(unreduced_integrand, tol, scale=1.0 / math.sqrt(c))
    return IdentityCheck(
        left=-0.5 * math.pi * a * b * reduced.value,
        right=-ZETA3 * b / (8.0 * math.pi**2 * a * a),
        cross_check=-2.0 * a * b * unreduced.value,
    )


def identity_sj3(
    j: int,
    g: Geometry,
    tol: ToleranceSpec | None = None,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> IdentityCheck:
    """-(2j²b/a²)∫₁^∞ sqrt(t² - 1)/(e^{2πjbt/a} - 1) dt
    = -(1/πa)Σ_k (j/k)K₁(2πkj·b/a).

    The integral is taken in t = cosh θ; the series is summed until its
    terms fall below ctrl.rel_tol.

    Raises:
        DomainError: If j < 1
        SeriesBudgetExceeded: If the K₁ series needs more than
            ctrl.max_inner_terms terms
    """
    if j < 1:
        raise DomainError(f"j must be a positive integer, got {j}")
    a, b = g.a, g.b
    c = 2.0 * math.pi * j * b / a

    def integrand(theta):
        if theta > _COSH_LIMIT:
            return 0.0
        x = c * math.cosh(theta)
        if x > _BOSE_CUTOFF:
            return 0.0
        return math.sinh(theta) ** 2 * bose(x)

    quadrature = integrate_semi_infinite(integrand, 0.0, tol)
    left = -2.0 * j * j * b / (a * a) * quadrature.value

    terms: list[float] = []
    previous = 0.0
    for k in range(1, ctrl.max_inner_terms + 1):
        term = j / k * bessel_k(1, c * k)
        terms.append(term)
        partial = math.fsum(terms)
        if term == 0.0 or term < ctrl.rel_tol * partial * INNER_STOP_FACTOR:
            logger.debug(
                f"S_j series j={j}: {k} terms, tail {geometric_tail(term, previous):.2e}"
            )
            break
        previous = term
    else:
        raise SeriesBudgetExceeded(
            f"K1 series for j={j} needs more than {ctrl.max_inner_terms} terms",
            estimate=-math.fsum(terms) / (math.pi * a),
        )
    right = -partial / (math.pi * a)
    return IdentityCheck(left=left, right=right)


def abel_plana_check(
    case: str, tol: ToleranceSpec | None = None, amplitude: float = 1.0
) -> IdentityCheck:
    """Σ_{n≥0}F(n) = F(0)/2 + ∫₀^∞F + i∫₀^∞[F(it) - F(-it)]/(e^{2πt} - 1) dt.

    Cases, with F scaled by ``amplitude``:
        ``exp_decay``: F(n) = e^(-n), bracket 2·sin t
        ``rational``: F(n) = 1/(n+1)², bracket 4t/(1+t²)²

    ``left`` is the closed-form sum, ``right`` the integral side.

    Raises:
        UnsupportedArgumentError: For an unknown case
    """
    if case == "exp_decay":
        exact = 1.0 / -math.expm1(-1.0)

        def bracket(t):
            return 2.0 * math.sin(t)

    elif case == "rational":
        exact = math.pi**2 / 6.0

        def bracket(t):
            return 4.0 * t / (1.0 + t * t) ** 2

    else:
        raise UnsupportedArgumentError(
            f"unknown Abel-Plana case {case!r}, expected one of {ABEL_PLANA_CASES}"
        )

    # F(0)/2 + ∫F is 1/2 + 1 in both cases
    remainder = integrate_semi_infinite(
        lambda t: bracket(t) * bose(2.0 * math.pi * t), 0.0, tol, scale=1.0 / (2.0 * math.pi)
    )
    right = amplitude * math.fsum([1.5, remainder.value])
    return IdentityCheck(left=amplitude * exact, right=right)
