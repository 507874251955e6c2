"""Analytically regularized vacuum energy of one rectangular compartment.

Two independent routes:

* ``zeta_reflection``: E = (π/8)Z₂(1/a, 1/b; -1) - (π/4)ζ(-1)(1/a + 1/b),
  with Z₂ continued to s = -1 by reflection;
* ``bessel_series``: for a ≥ b,
  E = π/(48b) - ζ(3)a/(16πb²) - (1/2b)Σ_{j,k≥1}(k/j)K₁(2πjk·a/b),
  and the same with a and b exchanged otherwise.
"""

import logging
import math

from apps.casimir.geometry import ENERGY_ROUTES, EnergyBreakdown, Geometry
from apps.epstein.lattice import z2_continued
from apps.epstein.series import SeriesControl, double_series
from apps.specfun.functions import bessel_k, bessel_k1_prime, riemann_zeta
from helpers import UnsupportedArgumentError

logger = logging.getLogger(__name__)

DEFAULT_CONTROL = SeriesControl()

ZETA3 = riemann_zeta(3.0)


def _zeta_reflection(g: Geometry, ctrl: SeriesControl) -> EnergyBreakdown:
    bulk = 0.125 * math.pi * z2_continued(1.0 / g.a, 1.0 / g.b, -1.0, ctrl)
    edge = -0.25 * math.pi * riemann_zeta(-1.0) * (1.0 / g.a + 1.0 / g.b)
    return EnergyBreakdown(
        edge_term=edge,
        bulk_term=bulk,
        interaction_series=0.0,
        total=math.fsum([edge, bulk]),
        route="zeta_reflection",
        tail_bound=ctrl.rel_tol * abs(bulk),
    )


def _bessel_series(g: Geometry, ctrl: SeriesControl) -> EnergyBreakdown:
    # long side first, so every Bessel argument is at least 2π
    long_side, short_side = (g.a, g.b) if g.a >= g.b else (g.b, g.a)
    edge = math.pi / (48.0 * short_side)
    bulk = -ZETA3 * long_side / (16.0 * math.pi * short_side**2)
    x = 2.0 * math.pi * long_side / short_side

    def term(j, k):
        return k / j * bessel_k(1, x * j * k)

    prefactor = 0.5 / short_side
    series = double_series(term, ctrl, scale=(abs(edge) + abs(bulk)) / prefactor)
    interaction = -prefactor * series.value
    return EnergyBreakdown(
        edge_term=edge,
        bulk_term=bulk,
        interaction_series=interaction,
        total=math.fsum([edge, bulk, interaction]),
        route="bessel_series",
        tail_bound=prefactor * series.tail_bound,
    )


def energy_ar(
    g: Geometry,
    route: str = "bessel_series",
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> EnergyBreakdown:
    """Regularized Casimir energy of the compartment g.

    Args:
        g: The compartment
        route: ``"bessel_series"`` or ``"zeta_reflection"``
        ctrl: Truncation policy for the Bessel double series

    Raises:
        ArgumentRangeError: If a/b lies outside [1e-4, 1e4]
        UnsupportedArgumentError: For an unknown route
        SeriesBudgetExceeded: If the double series does not converge
    """
    g.require_admissible()
    if route == "bessel_series":
        return _bessel_series(g, ctrl)
    if route == "zeta_reflection":
        return _zeta_reflection(g, ctrl)
    raise UnsupportedArgumentError(
        f"unknown energy route {route!r}, expected one of {ENERGY_ROUTES}"
    )


def energy_derivative(
    x: float, b: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> tuple[float, float]:
    """∂E(x, b)/∂x by term-wise differentiation of the Bessel form.

    For x ≥ b:  -ζ(3)/(16πb²) - (π/b²)Σ k²K₁'(2πjk·x/b)
    For x < b:  -π/(48x²) + ζ(3)b/(8πx³) - (πb/x³)Σ k²K₀(2πjk·b/x)

    Returns:
        ``(value, tail_bound)``
    """
    Geometry(x, b).require_admissible()
    if x >= b:
        closed = -ZETA3 / (16.0 * math.pi * b * b)
        prefactor = -math.pi / (b * b)
        arg = 2.0 * math.pi * x / b

        def term(j, k):
            return k * k * bessel_k1_prime(arg * j * k)

    else:
        closed = math.fsum(
            [-math.pi / (48.0 * x * x), ZETA3 * b / (8.0 * math.pi * x**3)]
        )
        prefactor = -math.pi * b / x**3
        arg = 2.0 * math.pi * b / x

        def term(j, k):
            return k * k * bessel_k(0, arg * j * k)

    series = double_series(term, ctrl, scale=abs(closed / prefactor))
    value = closed + prefactor * series.value
    return value, abs(prefactor) * series.tail_bound


def spectral_energy(
    g: Geometry, s: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """ℰ(a, b; s) = (π/2)Σ_{j,k≥1}(j²/a² + k²/b²)^(-s/2).

    Folding the quadrant sum onto the full lattice gives
    (π/8)Z₂(1/a, 1/b; s) - (π/4)ζ(s)(aˢ + bˢ), which is how it is computed
    for s > 2 and, by continuation, at s = -1 where it equals the
    regularized energy.
    """
    g.require_admissible()
    if not (s > 2.0 or s == -1.0):
        raise UnsupportedArgumentError(
            f"spectral energy implemented for s > 2 and s = -1, got s = {s}"
        )
    lattice = 0.125 * math.pi * z2_continued(1.0 / g.a, 1.0 / g.b, s, ctrl)
    axes = -0.25 * math.pi * riemann_zeta(s) * (g.a**s + g.b**s)
    return math.fsum([lattice, axes])


def tension(g: Geometry, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """T = -∂E/∂A under uniform rescaling of the compartment.

    E is homogeneous of degree -1 in the lengths and A of degree 2, so
    T = E/(2ab) and shares the sign of E.
    """
    energy = energy_ar(g, ctrl=ctrl).total
    return energy / (2.0 * g.a * g.b)
