"""Two-dimensional Epstein zeta function Z₂(c1, c2; s).

Z₂(c1, c2; s) = Σ'_{j,k ∈ ℤ} (j²c1² + k²c2²)^(-s/2), the prime dropping the
origin. Three independent realizations live here:

* ``z2_direct``: the convergent lattice sum (s > 2), slow but assumption-free;
* ``z2_s3_fast``: the K₁ Bessel expansion at s = 3;
* ``z2_continued``: the continuation to s = -1 through the p = 2 reflection.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from apps.epstein.series import (
    INNER_STOP_FACTOR,
    SeriesControl,
    double_series,
    geometric_tail,
)
from apps.specfun.functions import bessel_k, gamma, riemann_zeta
from apps.specfun.quadrature import (
    ToleranceSpec,
    integrate_finite,
    integrate_semi_infinite,
)
from helpers import (
    DomainError,
    PoleError,
    SeriesBudgetExceeded,
    UnsupportedArgumentError,
)

logger = logging.getLogger(__name__)

DEFAULT_CONTROL = SeriesControl()

_DIRECT_START = 16
_TAIL_TOL = ToleranceSpec(rel_tol=1e-14)


@dataclass(frozen=True)
class LatticeParams:
    c1: float
    c2: float
    s: float

    def __post_init__(self):
        if not (self.c1 > 0.0 and self.c2 > 0.0):
            raise DomainError(
                f"lattice scales must be positive, got ({self.c1}, {self.c2})"
            )
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise DomainError("lattice scales must be finite")


# ==========================
# Direct lattice sum
# ==========================


def _square_sum(c1: float, c2: float, s: float, n: int) -> float:
    """Σ' over the index square |j|, |k| ≤ n, folded onto one quadrant."""
    index = np.arange(1, n + 1, dtype=float)
    ju = index * c1
    kv = index * c2
    kv2 = kv * kv
    axes = [2.0 * float(np.sum(ju**-s)), 2.0 * float(np.sum(kv**-s))]
    rows = [float(np.sum((ju[j] * ju[j] + kv2) ** (-0.5 * s))) for j in range(n)]
    return math.fsum(axes) + 4.0 * math.fsum(rows)


def _outside_square_coefficient(c1: float, c2: float, s: float) -> float:
    """K such that ∫∫ outside [-M, M]² of the continuum summand is K/M^(s-2).

    In polar coordinates r ranges from the rectangle boundary
    min(c1M/|cos θ|, c2M/|sin θ|) to infinity.
    """
    p = s - 2.0
    corner = math.atan2(c2, c1)
    near = integrate_finite(lambda t: math.cos(t) ** p, 0.0, corner, _TAIL_TOL)
    far = integrate_finite(lambda t: math.sin(t) ** p, corner, 0.5 * math.pi, _TAIL_TOL)
    angular = near.value / c1**p + far.value / c2**p
    return 4.0 * angular / (c1 * c2 * p)


def z2_direct(p: LatticeParams, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Z₂ by summing index squares of doubling size.

    Each square |j|, |k| ≤ n is completed by the exact continuum integral over
    the region outside [-(n+½), n+½]²; what remains is the midpoint-rule
    error of the outer cells, homogeneous of degree -s in the half-width, and
    is removed by Richardson extrapolation between successive squares. The
    sum is accepted once two extrapolants agree to ctrl.rel_tol.

    Raises:
        DomainError: If s ≤ 2 (the lattice sum diverges)
        SeriesBudgetExceeded: If the half-width would exceed
            ctrl.max_inner_terms before convergence
    """
    if not p.s > 2.0:
        raise DomainError(f"the direct lattice sum needs s > 2, got s = {p.s}")

    coefficient = _outside_square_coefficient(p.c1, p.c2, p.s)
    n = _DIRECT_START
    previous_level = None
    extrapolants: list[float] = []
    while n <= ctrl.max_inner_terms:
        half_width = n + 0.5
        level = _square_sum(p.c1, p.c2, p.s, n) + coefficient / half_width ** (p.s - 2.0)
        if previous_level is not None:
            m1, z1 = previous_level
            ratio = (m1 / half_width) ** p.s
            extrapolants.append((level - ratio * z1) / (1.0 - ratio))
            if len(extrapolants) >= 2:
                change = abs(extrapolants[-1] - extrapolants[-2])
                if change <= ctrl.rel_tol * abs(extrapolants[-1]):
                    logger.debug(
                        f"z2_direct({p.c1}, {p.c2}; {p.s}) converged at "
                        f"half-width {n}, change {change:.3e}"
                    )
                    return extrapolants[-1]
        previous_level = (half_width, level)
        n *= 2

    estimate = extrapolants[-1] if extrapolants else previous_level[1]
    bound = abs(extrapolants[-1] - extrapolants[-2]) if len(extrapolants) > 1 else None
    raise SeriesBudgetExceeded(
        f"direct lattice sum not converged within half-width {ctrl.max_inner_terms}",
        estimate=estimate,
        error_bound=bound,
    )


# ==========================
# Auxiliary function S(m, a; s)
# ==========================


def _s_aux_bessel(m: float, a: float, ctrl: SeriesControl) -> float:
    """S(m, a; 3) = (πa/m²)·[1 + 4Σ_n (nma)·K₁(2nma)]."""
    x = m * a
    terms: list[float] = []
    previous = 0.0
    for n in range(1, ctrl.max_inner_terms + 1):
        term = n * x * bessel_k(1, 2.0 * n * x)
        terms.append(term)
        if term == 0.0:
            break
        total = 1.0 + 4.0 * math.fsum(terms)
        if 4.0 * term < ctrl.rel_tol * total * INNER_STOP_FACTOR:
            logger.debug(
                f"s_aux Bessel series: {n} terms, tail "
                f"{4.0 * geometric_tail(term, previous):.3e}"
            )
            break
        previous = term
    else:
        raise SeriesBudgetExceeded(
            f"S(m, a; 3) Bessel series needs more than {ctrl.max_inner_terms} terms",
            estimate=math.pi * a / (m * m) * (1.0 + 4.0 * math.fsum(terms)),
        )
    return math.pi * a / (m * m) * (1.0 + 4.0 * math.fsum(terms))


def _s_aux_direct(m: float, a: float, s: float) -> float:
    """π^(-s/2)Γ(s/2)Σ_n [(m/π)² + (n/a)²]^(-s/2), with a midpoint
    Euler–Maclaurin tail beyond n = N-1."""
    mu2 = (m / math.pi) ** 2
    cut = 200 + math.ceil(4.0 * math.sqrt(mu2) * a)

    def summand(n):
        return (mu2 + (n / a) ** 2) ** (-0.5 * s)

    index = np.arange(1, cut, dtype=float)
    head = float(np.sum(((mu2 + (index / a) ** 2) ** (-0.5 * s))[::-1]))
    start = cut - 0.5
    tail = integrate_semi_infinite(summand, start, _TAIL_TOL, scale=start)
    x = start / a
    derivative = -s * x / a * (mu2 + x * x) ** (-0.5 * s - 1.0)
    one_sided = math.fsum([head, tail.value, derivative / 24.0])
    return math.pi ** (-0.5 * s) * gamma(0.5 * s) * (summand(0.0) + 2.0 * one_sided)


def s_aux(
    m: float,
    a: float,
    s: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    route: str = "auto",
) -> float:
    """The auxiliary function S(m, a; s).

    Args:
        m: Mass-like parameter, positive
        a: Length, positive
        s: Argument. The Bessel route is available at s = 3 only (the only
            point where the Bessel order (1-s)/2 is 0 or ±1 and S is finite);
            the direct sum needs s > 1.
        ctrl: Truncation policy for the Bessel route
        route: ``"bessel"``, ``"direct"`` or ``"auto"`` (Bessel when possible)

    Raises:
        DomainError: If m or a is not positive
        UnsupportedArgumentError: If the requested route cannot handle s
    """
    if not (m > 0.0 and a > 0.0):
        raise DomainError(f"s_aux needs m > 0 and a > 0, got m={m}, a={a}")
    if route not in ("auto", "bessel", "direct"):
        raise UnsupportedArgumentError(f"unknown s_aux route {route!r}")

    if route == "auto":
        route = "bessel" if s == 3.0 else "direct"
    if route == "bessel":
        if s != 3.0:
            raise UnsupportedArgumentError(
                f"Bessel route of S implemented at s = 3 only, got s = {s}"
            )
        return _s_aux_bessel(m, a, ctrl)
    if not s > 1.0:
        raise UnsupportedArgumentError(
            f"S(m, a; s) for s = {s} needs a Bessel order outside {{0, ±1}}"
        )
    return _s_aux_direct(m, a, s)


# ==========================
# Fast Bessel route at s = 3
# ==========================


def z2_s3_series(a: float, b: float, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Closed part and series of Z₂(a, b; 3) for a ≥ b.

    Returns:
        ``(closed, prefactor, series)`` where
        Z₂ = closed + prefactor·series.value and series is the certified
        Σ_{j,k≥1} (k/j)K₁(2πjk·a/b).
    """
    closed = math.fsum(
        [2.0 * math.pi**2 / (3.0 * a * a * b), 2.0 * riemann_zeta(3.0) / b**3]
    )
    prefactor = 16.0 * math.pi / (a * b * b)
    x = 2.0 * math.pi * a / b

    def term(j, k):
        return k / j * bessel_k(1, x * j * k)

    series = double_series(term, ctrl, scale=closed / prefactor)
    return closed, prefactor, series


def z2_s3_fast(a: float, b: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Z₂(a, b; 3) from the K₁ expansion.

    The expansion is used with the longer side first so every Bessel
    argument is at least 2π.
    """
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"lattice scales must be positive, got ({a}, {b})")
    if a < b:
        a, b = b, a
    closed, prefactor, series = z2_s3_series(a, b, ctrl)
    return closed + prefactor * series.value


# ==========================
# Continuation through the reflection formula
# ==========================


def reflect_epstein(a1: float, a2: float, s: float, value: float) -> float:
    """Map Z₂(a1, a2; s) to Z₂(1/a1, 1/a2; 2-s).

    a1a2Γ(s/2)π^(-s/2)Z₂(a1,a2;s) = Γ((2-s)/2)π^((s-2)/2)Z₂(1/a1,1/a2;2-s)

    Raises:
        PoleError: If either side sits on the pole at argument 2
        UnsupportedArgumentError: If s is a nonpositive even integer, where
            Z₂(·; s) vanishes and the reflected value is lost
    """
    if not (a1 > 0.0 and a2 > 0.0):
        raise DomainError(f"lattice scales must be positive, got ({a1}, {a2})")
    target = 2.0 - s
    if s == 2.0 or target == 2.0:
        raise PoleError("Z2 has a pole at s = 2")
    if target < 0.0 and target == math.floor(target) and target % 2.0 == 0.0:
        return 0.0
    if s <= 0.0 and s == math.floor(s) and s % 2.0 == 0.0:
        raise UnsupportedArgumentError(f"cannot reflect from the zero at s = {s}")

    numerator = a1 * a2 * gamma(0.5 * s) * math.pi ** (-0.5 * s)
    denominator = gamma(0.5 * target) * math.pi ** (0.5 * (s - 2.0))
    return numerator / denominator * value


def z2_continued(
    a: float, b: float, s: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Z₂(a, b; s) for s > 2 and at s = -1.

    s = 3 goes to the fast route, other s > 2 to the direct sum, and s = -1
    is the reflection of Z₂(1/a, 1/b; 3).

    Raises:
        UnsupportedArgumentError: For any other s
    """
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"lattice scales must be positive, got ({a}, {b})")
    if s == 3.0:
        return z2_s3_fast(a, b, ctrl)
    if s > 2.0:
        return z2_direct(LatticeParams(a, b, s), ctrl)
    if s == -1.0:
        inverse = (1.0 / a, 1.0 / b)
        return reflect_epstein(*inverse, 3.0, z2_s3_fast(*inverse, ctrl))
    raise UnsupportedArgumentError(
        f"Z2 continuation implemented for s = -1 and s > 2, got s = {s}"
    )
