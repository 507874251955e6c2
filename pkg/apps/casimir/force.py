"""Casimir force on the piston: exact series, finite-L, finite-difference
oracle and the two asymptotic regimes."""

import logging
import math
from dataclasses import replace

from apps.casimir.energy import DEFAULT_CONTROL, ZETA3, energy_ar, energy_derivative
from apps.casimir.geometry import ForceValue, Geometry, PistonGeometry
from apps.epstein.series import SeriesControl, double_series
from apps.specfun.functions import bessel_k, bessel_k1_prime
from helpers import DomainError, richardson_derivative

logger = logging.getLogger(__name__)

# fast regimes of the two exact series
EQ11_MIN_RATIO = 0.05
EQ14_MAX_RATIO = 20.0
# below this |F| / Σ|terms| eq14 keeps fewer than 8 significant digits
EQ14_CANCELLATION_LIMIT = 1e-8

FD_STEP_FACTOR = 1e-3
# energies feeding the difference quotient are summed past rounding level
FD_REL_TOL = 1e-15


def force_infinite(g: Geometry, ctrl: SeriesControl = DEFAULT_CONTROL) -> ForceValue:
    """L → ∞ force: (π/b²)Σ_{j,k≥1} k²K₁'(2πjk·a/b).

    Every term is negative, so the force is attractive toward the near wall.
    """
    g.require_admissible()
    advisory = None
    if g.ratio < EQ11_MIN_RATIO:
        advisory = (
            f"eq11 needs O(b/a) terms at a/b = {g.ratio:g} < {EQ11_MIN_RATIO}; "
            "prefer eq14"
        )
        logger.warning(advisory)

    arg = 2.0 * math.pi * g.ratio
    prefactor = math.pi / (g.b * g.b)

    def term(j, k):
        return k * k * bessel_k1_prime(arg * j * k)

    series = double_series(term, ctrl)
    return ForceValue(
        value=prefactor * series.value,
        route="eq11",
        tail_bound=prefactor * series.tail_bound,
        advisory=advisory,
    )


def _small_a_terms(a: float, b: float) -> list[float]:
    return [
        -ZETA3 * b / (8.0 * math.pi * a**3),
        math.pi / (48.0 * a * a),
        -ZETA3 / (16.0 * math.pi * b * b),
    ]


def _small_a_closed_form(a: float, b: float) -> float:
    return math.fsum(_small_a_terms(a, b))


def force_alt(g: Geometry, ctrl: SeriesControl = DEFAULT_CONTROL) -> ForceValue:
    """L → ∞ force in the form that converges fast for a ≤ b:

    -ζ(3)b/(8πa³) + π/(48a²) - ζ(3)/(16πb²) + (πb/a³)Σ k²K₀(2πjk·b/a)
    """
    g.require_admissible()
    advisories = []
    if g.ratio > EQ14_MAX_RATIO:
        advisories.append(
            f"eq14 needs O(a/b) terms at a/b = {g.ratio:g} > {EQ14_MAX_RATIO:g}; "
            "prefer eq11"
        )

    terms = _small_a_terms(g.a, g.b)
    closed = math.fsum(terms)
    prefactor = math.pi * g.b / g.a**3
    arg = 2.0 * math.pi * g.b / g.a

    def term(j, k):
        return k * k * bessel_k(0, arg * j * k)

    series = double_series(term, ctrl, scale=abs(closed / prefactor))
    value = closed + prefactor * series.value
    magnitude = math.fsum(abs(t) for t in terms) + abs(prefactor * series.value)
    if abs(value) < EQ14_CANCELLATION_LIMIT * magnitude:
        advisories.append(
            f"eq14 is cancellation-limited at a/b = {g.ratio:g}: |F| = {abs(value):.3e} "
            f"against terms of size {magnitude:.3e}; prefer eq11"
        )

    for advisory in advisories:
        logger.warning(advisory)
    return ForceValue(
        value=value,
        route="eq14",
        tail_bound=prefactor * series.tail_bound,
        advisory="; ".join(advisories) or None,
    )


def casimir_force(g: Geometry, ctrl: SeriesControl = DEFAULT_CONTROL) -> ForceValue:
    """L → ∞ force by whichever exact series keeps its Bessel arguments ≥ 2π."""
    if g.a >= g.b:
        return force_infinite(g, ctrl)
    return force_alt(g, ctrl)


def force_finite_L(
    pg: PistonGeometry, ctrl: SeriesControl = DEFAULT_CONTROL
) -> ForceValue:
    """F = -∂/∂a [E(a, b) + E(L-a, b)] from the analytic derivatives.

    Exactly antisymmetric under a → L-a and zero at a = L/2.
    """
    left, left_tail = energy_derivative(pg.a, pg.b, ctrl)
    right, right_tail = energy_derivative(pg.L - pg.a, pg.b, ctrl)
    return ForceValue(
        value=right - left,
        route="finite_L",
        tail_bound=left_tail + right_tail,
    )


def force_fd_oracle(
    geometry: Geometry | PistonGeometry,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    step_factor: float = FD_STEP_FACTOR,
) -> ForceValue:
    """Force from a Richardson-extrapolated central difference of energies.

    For a PistonGeometry this differentiates E(a, b) + E(L-a, b). For a
    single Geometry the far compartment is taken at L → ∞, where its
    a-derivative is the constant -ζ(3)/(16πb²).

    ``tail_bound`` is the change made by the extrapolation, an estimate of
    the discretization error.
    """
    fine = replace(ctrl, rel_tol=min(ctrl.rel_tol, FD_REL_TOL))
    b = geometry.b

    if isinstance(geometry, PistonGeometry):
        length = geometry.L
        h = step_factor * min(geometry.a, length - geometry.a, b)

        def total(a):
            return math.fsum(
                [
                    energy_ar(Geometry(a, b), ctrl=fine).total,
                    energy_ar(Geometry(length - a, b), ctrl=fine).total,
                ]
            )

        far_wall = 0.0
    else:
        h = step_factor * min(geometry.a, b)

        def total(a):
            return energy_ar(Geometry(a, b), ctrl=fine).total

        far_wall = -ZETA3 / (16.0 * math.pi * b * b)

    a = geometry.a
    extrapolated = richardson_derivative(total, a, h)
    plain = (total(a + 0.5 * h) - total(a - 0.5 * h)) / h
    return ForceValue(
        value=-extrapolated + far_wall,
        route="finite_difference",
        tail_bound=abs(extrapolated - plain),
    )


def force_asym_large_a(g: Geometry) -> ForceValue:
    """Quasi-one-dimensional limit a ≫ b: -(π/2)(ab³)^(-1/2)exp(-2πa/b)."""
    advisory = None
    if g.ratio < 1.0:
        advisory = f"large-a asymptote evaluated at a/b = {g.ratio:g} < 1"
    value = -0.5 * math.pi / math.sqrt(g.a * g.b**3) * math.exp(-2.0 * math.pi * g.ratio)
    return ForceValue(value=value, route="asym_large_a", advisory=advisory)


def force_asym_small_a(g: Geometry) -> ForceValue:
    """Limit a ≪ b: the closed part of the eq14 form."""
    advisory = None
    if g.ratio > 1.0:
        advisory = f"small-a asymptote evaluated at a/b = {g.ratio:g} > 1"
    return ForceValue(
        value=_small_a_closed_form(g.a, g.b), route="asym_small_a", advisory=advisory
    )


def parallel_lines_tension(a: float) -> float:
    """Force per unit length between two infinite Dirichlet lines a apart."""
    if not a > 0.0:
        raise DomainError(f"line separation must be positive, got {a}")
    return -ZETA3 / (8.0 * math.pi * a**3)
