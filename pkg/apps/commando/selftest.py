"""Invariant registry behind ``manage.py lab selftest``.

Each check evaluates an identity of the laboratory two independent ways and
raises CheckFailed when they disagree beyond the stated tolerance.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from apps.casimir.energy import ZETA3, energy_ar
from apps.casimir.force import (
    casimir_force,
    force_alt,
    force_asym_large_a,
    force_asym_small_a,
    force_fd_oracle,
    force_finite_L,
    force_infinite,
    parallel_lines_tension,
)
from apps.casimir.geometry import Geometry, PistonGeometry
from apps.casimir.tension import critical_ratio
from apps.cutofflab.counterterms import (
    counterterm_residual,
    fit_counterterms,
    gaussian_counterterms,
)
from apps.cutofflab.cutoff import CUTOFF_FAMILIES, CutoffSpec
from apps.cutofflab.identities import (
    ABEL_PLANA_CASES,
    abel_plana_check,
    identity_I_infinity,
    identity_sj3,
)
from apps.epstein.lattice import LatticeParams, z2_direct, z2_s3_fast
from apps.epstein.series import SeriesControl
from apps.specfun.functions import bessel_k, gamma, reflect_zeta, riemann_zeta
from apps.specfun.quadrature import ToleranceSpec, integrate_semi_infinite
from helpers import richardson_derivative

logger = logging.getLogger(__name__)

FINE = SeriesControl(rel_tol=1e-15)
ORACLE = SeriesControl(rel_tol=1e-10)
TIGHT = ToleranceSpec(rel_tol=1e-12)
EXACT = ToleranceSpec(rel_tol=1e-13)
CAMPAIGN = (
    Geometry(1.0, 1.0),
    Geometry(1.0, 2.0),
    Geometry(2.0, 1.0),
    Geometry(1.5, 1.5),
    Geometry(0.7, 1.3),
)


class CheckFailed(Exception):
    """An invariant was violated."""


@dataclass(frozen=True)
class Check:
    name: str
    func: Callable[[], None]
    slow: bool = False


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""


CHECKS: list[Check] = []


def check(name: str, slow: bool = False):
    """Register the decorated function as a self-test invariant."""

    def register(func):
        CHECKS.append(Check(name, func, slow))
        return func

    return register


def expect(condition: bool, detail: str) -> None:
    if not condition:
        raise CheckFailed(detail)


def _relative(x: float, y: float) -> float:
    return abs(x - y) / abs(y)


def run_checks(include_slow: bool = True) -> list[CheckOutcome]:
    """Run every registered check; errors count as failures."""
    outcomes = []
    for item in CHECKS:
        if item.slow and not include_slow:
            continue
        try:
            item.func()
        except CheckFailed as exc:
            logger.error(f"selftest {item.name} failed: {exc}")
            outcomes.append(CheckOutcome(item.name, False, str(exc)))
        except Exception as exc:
            logger.error(f"selftest {item.name} raised {exc!r}", exc_info=True)
            outcomes.append(CheckOutcome(item.name, False, f"{type(exc).__name__}: {exc}"))
        else:
            outcomes.append(CheckOutcome(item.name, True))
    return outcomes


# ==========================
# Special functions
# ==========================


@check("zeta(-1) = -1/12")
def _zeta_minus_one():
    value = riemann_zeta(-1.0)
    expect(abs(value + 1.0 / 12.0) <= 1e-12, f"zeta(-1) = {value!r}")


@check("zeta reflection round trip")
def _zeta_round_trip():
    for s in (3.5, 5.5, 7.5):
        value = riemann_zeta(s)
        back = reflect_zeta(1.0 - s, reflect_zeta(s, value))
        expect(abs(back - value) <= 1e-12 * abs(value), f"s = {s}: {back!r} vs {value!r}")


@check("gamma(1/2) = sqrt(pi)")
def _gamma_half():
    expect(abs(gamma(0.5) - math.sqrt(math.pi)) <= 1e-14, f"gamma(1/2) = {gamma(0.5)!r}")


@check("gamma recurrence")
def _gamma_recurrence():
    rng = np.random.default_rng(2024)
    for x in rng.uniform(0.1, 50.0, 100):
        upper = gamma(x + 1.0)
        expect(abs(upper - x * gamma(x)) <= 1e-12 * abs(upper), f"x = {x!r}")


@check("K0' = -K1")
def _bessel_derivative():
    for x in (0.5, 2.0, 8.0):
        slope = richardson_derivative(lambda t: bessel_k(0, t), x, max(1e-5, 1e-5 * x))
        k1 = bessel_k(1, x)
        expect(abs(slope + k1) <= 1e-7 * k1, f"x = {x}: {slope!r} vs {-k1!r}")


@check("quadrature exact on t^n e^-t")
def _quadrature_exactness():
    for degree in range(7):
        result = integrate_semi_infinite(lambda t, n=degree: t**n * math.exp(-t), 0.0, EXACT)
        exact = math.factorial(degree)
        expect(abs(result.value - exact) <= 1e-12 * exact, f"degree {degree}: {result.value!r}")


@check("Epstein homogeneity and symmetry")
def _epstein_fast_route():
    for a, b in ((1.0, 1.0), (1.0, 2.5)):
        base = z2_s3_fast(a, b)
        for scale in (0.5, 2.0, 7.0):
            scaled = z2_s3_fast(scale * a, scale * b)
            expect(
                _relative(scaled, base / scale**3) <= 1e-11,
                f"Z2({scale * a:g}, {scale * b:g}) is not Z2({a:g}, {b:g})/{scale:g}^3",
            )
    for ratio in np.geomspace(0.1, 10.0, 15):
        forward = z2_s3_fast(float(ratio), 1.0)
        backward = z2_s3_fast(1.0, float(ratio))
        expect(_relative(forward, backward) <= 1e-11, f"a/b = {ratio:g}: Z2(a, b) != Z2(b, a)")


@check("Epstein decreasing in a")
def _epstein_monotone():
    values = [z2_s3_fast(float(a), 1.0) for a in np.linspace(0.2, 5.0, 20)]
    expect(all(left > right for left, right in zip(values, values[1:])), "not decreasing")


@check("Epstein direct sum homogeneity", slow=True)
def _epstein_direct_homogeneity():
    base = z2_direct(LatticeParams(1.0, 1.0, 3.0), ORACLE)
    doubled = z2_direct(LatticeParams(2.0, 2.0, 3.0), ORACLE)
    expect(_relative(doubled, base / 8.0) <= 1e-10, f"{doubled!r} vs {base / 8.0!r}")


@check("Epstein fast route matches direct lattice sum", slow=True)
def _epstein_oracle():
    direct = z2_direct(LatticeParams(1.0, 1.0, 3.0), ORACLE)
    fast = z2_s3_fast(1.0, 1.0)
    expect(_relative(direct, fast) <= 1e-6, f"direct {direct!r} vs fast {fast!r}")


# ==========================
# Energy
# ==========================


@check("energy routes agree")
def _energy_routes():
    for ratio in np.geomspace(0.1, 10.0, 25):
        g = Geometry(float(ratio), 1.0)
        series = energy_ar(g, "bessel_series")
        zeta = energy_ar(g, "zeta_reflection")
        scale = abs(series.edge_term) + abs(series.bulk_term)
        expect(
            abs(series.total - zeta.total) <= 1e-10 * abs(series.total) + 1e-14 * scale,
            f"a/b = {ratio:g}: {series.total!r} vs {zeta.total!r}",
        )


@check("energy symmetry and scaling")
def _energy_symmetry():
    forward = energy_ar(Geometry(1.0, 4.0))
    backward = energy_ar(Geometry(4.0, 1.0))
    scale = abs(forward.edge_term) + abs(forward.bulk_term)
    expect(abs(forward.total - backward.total) <= 1e-12 * scale, "E(a, b) != E(b, a)")
    scaled = energy_ar(Geometry(3.0, 12.0))
    expect(
        abs(scaled.total - forward.total / 3.0) <= 1e-11 * scale / 3.0,
        "E(3a, 3b) != E(a, b)/3",
    )


@check("critical ratio in [2.73, 2.75]")
def _critical_ratio():
    root = critical_ratio(1e-6)
    expect(2.73 <= root <= 2.75, f"root {root!r}")


# ==========================
# Forces
# ==========================


@check("force routes agree and attract")
def _force_routes():
    for ratio in np.linspace(0.2, 2.0, 10):
        g = Geometry(float(ratio), 1.0)
        eq11 = force_infinite(g, FINE)
        eq14 = force_alt(g, FINE)
        expect(eq11.value < 0.0 and eq14.value < 0.0, f"a/b = {ratio:g}: repulsive force")
        bound = 1e-9 * abs(eq11.value) + eq11.tail_bound + eq14.tail_bound
        expect(
            abs(eq11.value - eq14.value) <= bound,
            f"a/b = {ratio:g}: eq11 {eq11.value!r} vs eq14 {eq14.value!r}",
        )


@check("exact force series attracts on [0.05, 20]")
def _force_sign():
    for ratio in np.geomspace(0.05, 20.0, 12):
        value = force_infinite(Geometry(float(ratio), 1.0)).value
        expect(value < 0.0, f"a/b = {ratio:g}: force_infinite = {value!r}")


@check("force scaling")
def _force_scaling():
    for a, b, factor in ((1.0, 1.3, 2.0), (0.4, 1.0, 3.0), (2.5, 1.0, 0.5)):
        base = casimir_force(Geometry(a, b)).value
        scaled = casimir_force(Geometry(factor * a, factor * b)).value
        expect(
            abs(scaled - base / factor**2) <= 1e-11 * abs(base) / factor**2,
            f"F({factor * a:g}, {factor * b:g}) = {scaled!r} vs {base / factor**2!r}",
        )


@check("force magnitude decreases with distance")
def _force_monotone():
    magnitudes = [
        abs(force_infinite(Geometry(float(a), 1.0)).value) for a in np.linspace(0.2, 4.0, 20)
    ]
    expect(
        all(near > far for near, far in zip(magnitudes, magnitudes[1:])),
        "|F| not decreasing in a",
    )


@check("finite-L antisymmetry")
def _finite_length():
    midpoint = force_finite_L(PistonGeometry(10.0, 5.0, 1.0)).value
    expect(abs(midpoint) <= 1e-12, f"F(L/2) = {midpoint!r}")
    left = force_finite_L(PistonGeometry(10.0, 3.0, 1.0)).value
    right = force_finite_L(PistonGeometry(10.0, 7.0, 1.0)).value
    expect(abs(left + right) <= 1e-12, f"F(a) = {left!r}, F(L-a) = {right!r}")


@check("analytic forces match finite differences")
def _finite_difference():
    for g in (Geometry(0.5, 1.0), Geometry(1.0, 1.0), Geometry(1.5, 1.0)):
        oracle = force_fd_oracle(g).value
        for route in (force_infinite, force_alt):
            value = route(g).value
            expect(
                _relative(value, oracle) <= 1e-7,
                f"{route.__name__} at a/b = {g.ratio:g}: {value!r} vs {oracle!r}",
            )


@check("asymptotic regimes")
def _asymptotes():
    small = Geometry(0.1, 1.0)
    exact = force_alt(small).value
    asymptote = force_asym_small_a(small).value
    expect(abs(exact - asymptote) <= 1e-10 * abs(exact), "small-a asymptote")

    large = Geometry(5.0, 1.0)
    quotient = force_infinite(large).value / force_asym_large_a(large).value
    expect(1.0 < quotient < 1.03, f"large-a quotient {quotient!r}")

    lines = parallel_lines_tension(1.0)
    for b, tolerance in ((100.0, 0.015), (200.0, 0.008)):
        per_length = force_alt(Geometry(1.0, b)).value / b
        expect(
            abs(per_length - lines) <= tolerance * abs(lines),
            f"b/a = {b:g}: {per_length!r} vs {lines!r}",
        )


# ==========================
# Cutoff identities
# ==========================


@check("I_infinity identity")
def _i_infinity():
    result = identity_I_infinity(Geometry(1.0, 1.0))
    expected = -ZETA3 / (8.0 * math.pi**2)
    expect(abs(result.right - expected) <= 1e-16, "closed form")
    expect(result.relative_discrepancy <= 1e-9, f"{result.left!r} vs {result.right!r}")


@check("S_j identity")
def _sj3():
    for j, g in ((1, Geometry(1.0, 1.0)), (3, Geometry(2.0, 1.0))):
        result = identity_sj3(j, g, TIGHT)
        expect(
            result.relative_discrepancy <= 1e-10,
            f"j = {j}: {result.left!r} vs {result.right!r}",
        )


@check("Abel-Plana cases")
def _abel_plana():
    for case in ABEL_PLANA_CASES:
        result = abel_plana_check(case)
        expect(
            result.relative_discrepancy <= 1e-10,
            f"{case}: {result.left!r} vs {result.right!r}",
        )


@check("cutoff conditions")
def _cutoff_conditions():
    for family in CUTOFF_FAMILIES:
        for t in (0.0, 1.0, 10.0):
            values = [CutoffSpec(scale, family).d(t) for scale in (10.0, 100.0, 1000.0)]
            expect(all(0.0 < v <= 1.0 for v in values), f"{family}: d({t}) outside (0, 1]")
            expect(
                values[0] <= values[1] <= values[2] and 1.0 - values[2] < 1e-3,
                f"{family}: d({t}) does not tend to 1",
            )

        cut = CutoffSpec(20.0, family)
        decay = [cut.d(t) for t in (0.0, 1.0, 10.0, 50.0, 200.0)]
        expect(
            all(near > far for near, far in zip(decay, decay[1:])),
            f"{family}: d not decreasing",
        )
        for z, w in ((0.3, 7.0), (12.0, 1.5)):
            expect(cut.D(z, w) == cut.D(w, z), f"{family}: D not symmetric")
        for t in (0.0, 3.0, 25.0):
            slope = richardson_derivative(cut.d, t, 1e-3)
            expect(abs(cut.derivative(t) - slope) <= 1e-10, f"{family}: d'({t}) = {slope!r}")

    tail = 1e5**4 * CutoffSpec(10.0).d(1e5)
    expect(_relative(tail, 1e4) <= 1e-3, f"default cutoff t^4·d(t) = {tail!r}")


@check("cutoff residual converges to the AR energy", slow=True)
def _cutoff_residual_sequence():
    g = Geometry(1.0, 1.0)
    target = energy_ar(g).total
    gaps = []
    for scale in (30.0, 40.0, 50.0, 60.0):
        cut = CutoffSpec(scale, "gaussian")
        c1, c2 = gaussian_counterterms(cut)
        gaps.append(abs(counterterm_residual(g, cut, c1, 0.25 * c2) - target))
    expect(all(near > far for near, far in zip(gaps, gaps[1:])), f"gaps {gaps!r}")
    expect(gaps[-1] < 0.01 * abs(target), f"gap {gaps[-1]!r} at scale 60")


@check("default counterterm fit at scale 50", slow=True)
def _default_fit():
    report = fit_counterterms(CAMPAIGN, CutoffSpec(50.0))
    expect(0.98 <= report.c1_ratio <= 1.02, f"C1 ratio {report.c1_ratio!r}")
    for g, residual in report.residuals:
        bound = 0.01 * abs(energy_ar(g).total)
        expect(abs(residual) <= bound, f"({g.a}, {g.b}) residual {residual!r}")


@check("C2 ratio stable across scales", slow=True)
def _c2_ratio_stability():
    ratios = [
        fit_counterterms(CAMPAIGN, CutoffSpec(scale)).c2_ratio for scale in (40.0, 50.0, 60.0)
    ]
    expect(all(_relative(r, ratios[0]) <= 0.02 for r in ratios[1:]), f"C2 ratios {ratios!r}")


@check("Gaussian counterterm fit", slow=True)
def _gaussian_fit():
    report = fit_counterterms(CAMPAIGN, CutoffSpec(30.0, "gaussian"))
    expect(abs(report.c1_ratio - 1.0) <= 1e-6, f"C1 ratio {report.c1_ratio!r}")
    expect(abs(report.c2_ratio - 0.25) <= 1e-3, f"C2 ratio {report.c2_ratio!r}")
    for g, residual in report.residuals:
        bound = 0.01 * abs(energy_ar(g).total)
        expect(abs(residual) <= bound, f"({g.a}, {g.b}) residual {residual!r}")
