"""Divergent counterterms of the cutoff energy.

E_cutoff(a, b) = C₁·ab + C₂·(a + b) + c₃·(a/b + b/a) + E_AR(a, b) + o(1)

C₁ and C₂ are measured two ways: by quadrature of their integral
representations and by a least-squares fit of E_cutoff - E_AR over several
geometries. The quadrature form of C₂ carries an overall -π; the fit
measures the coefficient actually present in the mode sum, and the ratio
between the two is reported rather than assumed.

c₃ is finite and nonzero only for cutoffs with d'(0) ≠ 0, such as the
default family: the odd part of d survives the Λ → ∞ limit of the
Abel-Plana remainder integrals because it multiplies ∫t·d(t)dt ~ Λ². It is
predicted from the C₂ quadrature and subtracted before fitting.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from apps.casimir.energy import DEFAULT_CONTROL, energy_ar
from apps.casimir.geometry import Geometry
from apps.cutofflab.cutoff import CutoffSpec
from apps.cutofflab.modesum import energy_cutoff
from apps.epstein.series import SeriesControl
from apps.specfun.quadrature import (
    ToleranceSpec,
    integrate_quadrant,
    integrate_semi_infinite,
)
from helpers import IllConditionedError, UnsupportedArgumentError

logger = logging.getLogger(__name__)

MIN_GEOMETRIES = 4
MAX_CONDITION = 1e6


@dataclass(frozen=True)
class FitReport:
    """Result of one counterterm fit at a fixed cutoff scale.

    ``residuals`` pairs each geometry with
    E_cutoff - c1_fit·ab - c2_fit·(a+b) - c3_aspect·(a/b+b/a) - E_AR.
    """

    c1_fit: float
    c2_fit: float
    c1_quad: float
    c2_quad: float
    residuals: list[tuple[Geometry, float]]
    scale: float
    c3_aspect: float = 0.0

    @property
    def c1_ratio(self) -> float:
        return self.c1_fit / self.c1_quad

    @property
    def c2_ratio(self) -> float:
        return self.c2_fit / self.c2_quad

    @property
    def max_residual(self) -> float:
        return max(abs(r) for _, r in self.residuals)


def aspect(g: Geometry) -> float:
    return g.a / g.b + g.b / g.a


def c1_quadrature(cut: CutoffSpec, tol: ToleranceSpec | None = None) -> float:
    """C₁ = (π/2)∫∫ sqrt(u² + v²)·D_Λ(u, v) du dv over the quadrant."""

    def integrand(u, v):
        return math.hypot(u, v) * cut.D(u, v)

    result = integrate_quadrant(integrand, tol, scale=cut.scale)
    logger.debug(
        f"C1 quadrature Λ={cut.scale:g}: {result.evaluations} evaluations, "
        f"error {result.error_estimate:.2e}"
    )
    return 0.5 * math.pi * result.value


def c2_quadrature(cut: CutoffSpec, tol: ToleranceSpec | None = None) -> float:
    """C₂ = -π∫ t·D_Λ(t, 0) dt."""
    result = integrate_semi_infinite(
        lambda t: t * cut.D(t, 0.0), 0.0, tol, scale=cut.scale
    )
    return -math.pi * result.value


def aspect_coefficient(cut: CutoffSpec, c2_quad: float) -> float:
    """c₃ = -(π/24)·d'(0)·∫t·d(t)dt, written through the C₂ quadrature."""
    return float(cut.derivative(0.0) * c2_quad / (24.0 * cut.d(0.0)))


def gaussian_counterterms(cut: CutoffSpec) -> tuple[float, float]:
    """Closed forms of the two quadratures for the Gaussian family:
    C₁ = π^(5/2)Λ³/16 and C₂ = -πΛ²/2."""
    if cut.family != "gaussian":
        raise UnsupportedArgumentError(
            f"closed-form counterterms exist for the gaussian family only, not {cut.family!r}"
        )
    return math.pi**2.5 * cut.scale**3 / 16.0, -0.5 * math.pi * cut.scale**2


def counterterm_residual(
    g: Geometry, cut: CutoffSpec, c1: float, c2: float, c3: float = 0.0
) -> float:
    """E_cutoff - c1·ab - c2·(a + b) - c3·(a/b + b/a)."""
    return math.fsum(
        [energy_cutoff(g, cut), -c1 * g.a * g.b, -c2 * (g.a + g.b), -c3 * aspect(g)]
    )


def fit_counterterms(
    geoms: Sequence[Geometry],
    cut: CutoffSpec,
    tol: ToleranceSpec | None = None,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    subtract_aspect: bool = True,
) -> FitReport:
    """Least-squares C₁, C₂ from E_cutoff - E_AR over ``geoms``.

    With ``subtract_aspect`` the predicted c₃·(a/b + b/a) is removed from
    each measurement first; it is zero for even cutoffs.

    Raises:
        IllConditionedError: With fewer than four distinct (ab, a+b) pairs,
            or a design matrix whose condition number reaches 1e6
    """
    distinct = {(g.a * g.b, g.a + g.b) for g in geoms}
    if len(distinct) < MIN_GEOMETRIES:
        raise IllConditionedError(
            f"counterterm fit needs {MIN_GEOMETRIES} distinct (ab, a+b) pairs, "
            f"got {len(distinct)}"
        )
    design = np.array([[g.a * g.b, g.a + g.b] for g in geoms])
    condition = float(np.linalg.cond(design))
    if not condition < MAX_CONDITION:
        raise IllConditionedError(
            f"counterterm design matrix condition number {condition:.3e} "
            f"not below {MAX_CONDITION:g}"
        )

    c1_quad = c1_quadrature(cut, tol)
    c2_quad = c2_quadrature(cut, tol)
    c3 = aspect_coefficient(cut, c2_quad) if subtract_aspect else 0.0

    cutoff_energies = [energy_cutoff(g, cut) for g in geoms]
    ar_energies = [energy_ar(g, ctrl=ctrl).total for g in geoms]
    measured = np.array(
        [
            math.fsum([e_cut, -e_ar, -c3 * aspect(g)])
            for g, e_cut, e_ar in zip(geoms, cutoff_energies, ar_energies)
        ]
    )
    (c1_fit, c2_fit), *_ = np.linalg.lstsq(design, measured, rcond=None)

    residuals = [
        (g, float(m - c1_fit * g.a * g.b - c2_fit * (g.a + g.b)))
        for g, m in zip(geoms, measured)
    ]
    report = FitReport(
        c1_fit=float(c1_fit),
        c2_fit=float(c2_fit),
        c1_quad=c1_quad,
        c2_quad=c2_quad,
        residuals=residuals,
        scale=cut.scale,
        c3_aspect=c3,
    )
    logger.info(
        f"counterterm fit Λ={cut.scale:g} ({cut.family}): C1 ratio {report.c1_ratio:.6f}, "
        f"C2 ratio {report.c2_ratio:.6f}, c3 {c3:.6f}, max residual {report.max_residual:.3e}"
    )
    return report
