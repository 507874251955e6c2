import math

import numpy as np
from django.test import SimpleTestCase, tag
from hypothesis import given, settings
from hypothesis import strategies as st

from apps.casimir.energy import (
    ZETA3,
    energy_ar,
    energy_derivative,
    spectral_energy,
    tension,
)
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
from apps.casimir.tension import critical_ratio, solve_critical_ratio
from apps.epstein.lattice import LatticeParams, z2_direct
from apps.epstein.series import SeriesControl
from helpers import ArgumentRangeError, DomainError, UnsupportedArgumentError

FINE = SeriesControl(rel_tol=1e-15)

lengths = st.floats(min_value=0.2, max_value=5.0)
scales = st.floats(min_value=0.5, max_value=4.0)


def relative(x, y):
    return abs(x - y) / abs(y)


def energy_scale(breakdown):
    """Magnitude against which energy round-off is measured; the total
    itself vanishes at the critical ratio."""
    return abs(breakdown.edge_term) + abs(breakdown.bulk_term)


class GeometryTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            Geometry(0.0, 1.0)
        with self.assertRaises(DomainError):
            Geometry(1.0, math.inf)
        with self.assertRaises(DomainError):
            PistonGeometry(10.0, 10.0, 1.0)
        with self.assertRaises(ArgumentRangeError):
            energy_ar(Geometry(1e-5, 1.0))

    def test_piston_compartments(self):
        pg = PistonGeometry(10.0, 3.0, 1.0)
        self.assertEqual(pg.left, Geometry(3.0, 1.0))
        self.assertEqual(pg.right, Geometry(7.0, 1.0))
        self.assertEqual(pg.mirrored().a, 7.0)


class EnergyTests(SimpleTestCase):
    def test_square_is_positive_and_routes_agree(self):
        series = energy_ar(Geometry(1.0, 1.0), "bessel_series")
        zeta = energy_ar(Geometry(1.0, 1.0), "zeta_reflection")
        self.assertGreater(series.total, 0.0)
        self.assertLessEqual(relative(zeta.total, series.total), 1e-10)

    def test_route_equivalence_on_log_grid(self):
        for ratio in np.geomspace(0.1, 10.0, 25):
            g = Geometry(float(ratio), 1.0)
            series = energy_ar(g, "bessel_series")
            zeta = energy_ar(g, "zeta_reflection")
            self.assertLessEqual(
                abs(series.total - zeta.total),
                1e-10 * abs(series.total) + 1e-14 * energy_scale(series),
                ratio,
            )

    def test_symmetry(self):
        e14 = energy_ar(Geometry(1.0, 4.0)).total
        e41 = energy_ar(Geometry(4.0, 1.0)).total
        self.assertLessEqual(relative(e14, e41), 1e-12)

    def test_scaling(self):
        base = energy_ar(Geometry(1.0, 1.7)).total
        scaled = energy_ar(Geometry(3.0, 5.1)).total
        self.assertLessEqual(relative(scaled, base / 3.0), 1e-12)

    def test_breakdown(self):
        for a, b in ((1.0, 1.0), (0.3, 1.0), (2.0, 0.7)):
            e = energy_ar(Geometry(a, b))
            self.assertEqual(e.route, "bessel_series")
            self.assertLessEqual(e.interaction_series, 0.0)
            parts = e.edge_term + e.bulk_term + e.interaction_series
            self.assertLessEqual(abs(e.total - parts), 1e-14 * energy_scale(e))
            self.assertGreaterEqual(e.tail_bound, 0.0)

    def test_zeta_route_breakdown(self):
        e = energy_ar(Geometry(1.0, 2.0), "zeta_reflection")
        self.assertEqual(e.interaction_series, 0.0)
        self.assertAlmostEqual(e.edge_term, math.pi / 48.0 * 1.5, delta=1e-14)

    def test_unknown_route(self):
        with self.assertRaises(UnsupportedArgumentError):
            energy_ar(Geometry(1.0, 1.0), "cutoff")

    def test_spectral_energy_continuation(self):
        g = Geometry(1.0, 1.3)
        self.assertLessEqual(
            relative(spectral_energy(g, -1.0), energy_ar(g).total), 1e-12
        )
        with self.assertRaises(UnsupportedArgumentError):
            spectral_energy(g, 1.5)

    def test_spectral_energy_convergent_sum(self):
        a, b, s = 1.0, 1.3, 4.0
        cut = 2000
        k = np.arange(1, cut + 1, dtype=float) / b
        rows = [
            np.sum(((j / a) ** 2 + k * k) ** (-s / 2)) for j in range(1, cut + 1)
        ]
        brute = 0.5 * math.pi * math.fsum(rows)
        self.assertLessEqual(relative(spectral_energy(Geometry(a, b), s), brute), 1e-5)

    def test_tension_sign_follows_energy(self):
        for ratio in (1.0, 2.0, 3.5):
            g = Geometry(1.0, ratio)
            e = energy_ar(g).total
            t = tension(g)
            self.assertEqual(math.copysign(1.0, t), math.copysign(1.0, e))
            self.assertAlmostEqual(t, e / (2.0 * ratio), delta=1e-16)

    @settings(max_examples=200, deadline=None)
    @given(lengths, lengths)
    def test_symmetry_property(self, a, b):
        forward = energy_ar(Geometry(a, b))
        backward = energy_ar(Geometry(b, a))
        self.assertLessEqual(
            abs(forward.total - backward.total), 1e-12 * energy_scale(forward)
        )

    @settings(max_examples=200, deadline=None)
    @given(lengths, lengths, scales)
    def test_scaling_property(self, a, b, factor):
        base = energy_ar(Geometry(a, b))
        scaled = energy_ar(Geometry(factor * a, factor * b))
        self.assertLessEqual(
            abs(scaled.total - base.total / factor),
            1e-11 * energy_scale(base) / factor,
        )


@tag("slow")
class EnergyOracleTests(SimpleTestCase):
    def test_zeta_route_against_direct_lattice_sum(self):
        for a, b in ((1.0, 1.0), (1.0, 2.0), (0.6, 1.0)):
            z = z2_direct(LatticeParams(a, b, 3.0), SeriesControl(rel_tol=1e-10))
            oracle = -a * b / (32.0 * math.pi) * z + math.pi / 48.0 * (1 / a + 1 / b)
            e = energy_ar(Geometry(a, b), "zeta_reflection")
            self.assertLessEqual(abs(e.total - oracle), 1e-6 * energy_scale(e))


class ForceTests(SimpleTestCase):
    def test_square(self):
        eq11 = force_infinite(Geometry(1.0, 1.0))
        eq14 = force_alt(Geometry(1.0, 1.0))
        self.assertLess(eq11.value, 0.0)
        self.assertEqual(eq11.route, "eq11")
        self.assertEqual(eq14.route, "eq14")
        self.assertLessEqual(relative(eq14.value, eq11.value), 1e-9)

    def test_route_equivalence(self):
        for ratio in np.linspace(0.2, 2.0, 10):
            g = Geometry(float(ratio), 1.0)
            eq11 = force_infinite(g, FINE)
            eq14 = force_alt(g, FINE)
            self.assertLess(eq11.value, 0.0)
            self.assertLess(eq14.value, 0.0)
            self.assertLessEqual(
                abs(eq11.value - eq14.value),
                1e-9 * abs(eq11.value) + eq11.tail_bound + eq14.tail_bound,
                ratio,
            )

    def test_route_equivalence_beyond_cancellation_floor(self):
        # for a ≫ b the eq14 value is a near-total cancellation of O(1/b²)
        # terms, so agreement is bounded by their rounding
        floor = 1e-14 * ZETA3 / (16.0 * math.pi)
        for ratio in (2.5, 3.5, 5.0):
            g = Geometry(ratio, 1.0)
            eq11 = force_infinite(g, FINE)
            eq14 = force_alt(g, FINE)
            self.assertLessEqual(
                abs(eq11.value - eq14.value),
                1e-9 * abs(eq11.value) + eq11.tail_bound + eq14.tail_bound + floor,
            )

    def test_scaling(self):
        base = force_infinite(Geometry(1.0, 1.3)).value
        doubled = force_infinite(Geometry(2.0, 2.6)).value
        self.assertLessEqual(relative(doubled, base / 4.0), 1e-11)

    def test_sign_of_exact_series(self):
        for ratio in np.geomspace(0.05, 20.0, 12):
            self.assertLess(force_infinite(Geometry(float(ratio), 1.0)).value, 0.0)
        for ratio in (0.1, 0.5, 1.0, 2.0):
            self.assertLess(force_alt(Geometry(ratio, 1.0)).value, 0.0)

    def test_advisories(self):
        self.assertIsNotNone(force_infinite(Geometry(0.04, 1.0)).advisory)
        self.assertIsNone(force_infinite(Geometry(1.0, 1.0)).advisory)
        self.assertIsNotNone(force_alt(Geometry(25.0, 1.0)).advisory)
        self.assertIsNone(force_alt(Geometry(1.0, 1.0)).advisory)

    def test_eq14_flags_cancellation(self):
        self.assertIsNone(force_alt(Geometry(2.0, 1.0)).advisory)
        far = force_alt(Geometry(300.0, 1.0))
        self.assertIn("cancellation-limited", far.advisory)
        self.assertIn("O(a/b) terms", far.advisory)
        self.assertEqual(force_infinite(Geometry(300.0, 1.0)).value, 0.0)

    def test_magnitude_decreases_with_distance(self):
        magnitudes = [
            abs(force_infinite(Geometry(float(a), 1.0)).value)
            for a in np.linspace(0.2, 4.0, 20)
        ]
        for near, far in zip(magnitudes, magnitudes[1:]):
            self.assertGreater(near, far)

    def test_auto_route(self):
        self.assertEqual(casimir_force(Geometry(2.0, 1.0)).route, "eq11")
        self.assertEqual(casimir_force(Geometry(0.5, 1.0)).route, "eq14")

    @settings(max_examples=200, deadline=None)
    @given(lengths, lengths, scales)
    def test_scaling_property(self, a, b, factor):
        base = casimir_force(Geometry(a, b)).value
        scaled = casimir_force(Geometry(factor * a, factor * b)).value
        self.assertLessEqual(abs(scaled - base / factor**2), 1e-11 * abs(base) / factor**2)


class FiniteLengthForceTests(SimpleTestCase):
    def test_midpoint(self):
        self.assertAlmostEqual(
            force_finite_L(PistonGeometry(10.0, 5.0, 1.0)).value, 0.0, delta=1e-12
        )

    def test_antisymmetry(self):
        left = force_finite_L(PistonGeometry(10.0, 3.0, 1.0)).value
        right = force_finite_L(PistonGeometry(10.0, 7.0, 1.0)).value
        self.assertAlmostEqual(left, -right, delta=1e-12)

    def test_long_box_limit(self):
        finite = force_finite_L(PistonGeometry(100.0, 1.0, 1.0)).value
        infinite = force_infinite(Geometry(1.0, 1.0)).value
        self.assertLessEqual(relative(finite, infinite), 1e-10)

    def test_derivative_branches_meet(self):
        below, _ = energy_derivative(1.0 - 1e-12, 1.0)
        at, _ = energy_derivative(1.0, 1.0)
        self.assertAlmostEqual(below, at, delta=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(min_value=2.0, max_value=20.0),
        st.floats(min_value=0.05, max_value=0.95),
        st.floats(min_value=0.5, max_value=2.0),
    )
    def test_antisymmetry_property(self, length, fraction, b):
        a = fraction * length
        forward = force_finite_L(PistonGeometry(length, a, b)).value
        backward = force_finite_L(PistonGeometry(length, length - a, b)).value
        scale = max(abs(forward), abs(energy_derivative(a, b)[0]))
        self.assertLessEqual(abs(forward + backward), 1e-12 * scale)


class FiniteDifferenceOracleTests(SimpleTestCase):
    def test_matches_finite_length_force(self):
        pg = PistonGeometry(10.0, 2.0, 1.0)
        oracle = force_fd_oracle(pg)
        self.assertEqual(oracle.route, "finite_difference")
        self.assertLessEqual(relative(oracle.value, force_finite_L(pg).value), 1e-7)

    def test_single_compartment_far_wall(self):
        oracle = force_fd_oracle(Geometry(3.0, 1.0)).value
        exact = force_infinite(Geometry(3.0, 1.0)).value
        self.assertAlmostEqual(oracle, exact, delta=1e-7)

    def test_antisymmetry(self):
        left = force_fd_oracle(PistonGeometry(10.0, 3.0, 1.0)).value
        right = force_fd_oracle(PistonGeometry(10.0, 7.0, 1.0)).value
        self.assertAlmostEqual(left, -right, delta=1e-9)

    def test_analytic_routes_match_oracle(self):
        geometries = [
            Geometry(0.2, 1.0),
            Geometry(0.35, 1.0),
            Geometry(0.5, 1.0),
            Geometry(0.7, 1.0),
            Geometry(0.85, 1.0),
            Geometry(1.0, 1.0),
            Geometry(1.2, 1.0),
            Geometry(1.5, 1.0),
            Geometry(0.5, 2.0),
            Geometry(1.0, 0.8),
        ]
        for g in geometries:
            oracle = force_fd_oracle(g).value
            self.assertGreater(abs(oracle), 1e-8)
            for route in (force_infinite, force_alt):
                value = route(g).value
                self.assertLessEqual(relative(value, oracle), 1e-7, (g, route))

    def test_finite_length_routes_match_oracle(self):
        for pg in (
            PistonGeometry(3.0, 0.6, 1.0),
            PistonGeometry(4.0, 1.3, 1.5),
            PistonGeometry(2.0, 0.4, 0.5),
        ):
            self.assertLessEqual(
                relative(force_finite_L(pg).value, force_fd_oracle(pg).value), 1e-7
            )


class AsymptoteTests(SimpleTestCase):
    def test_large_a(self):
        # leading correction to the single-term asymptote is +7/(8x), x = 2πa/b
        for ratio, upper in ((5.0, 1.03), (2.5, 1.06)):
            g = Geometry(ratio, 1.0)
            quotient = force_infinite(g).value / force_asym_large_a(g).value
            self.assertGreater(quotient, 1.0)
            self.assertLess(quotient, upper)
            x = 2.0 * math.pi * ratio
            self.assertAlmostEqual(quotient, 1.0 + 7.0 / (8.0 * x), delta=0.005)

    def test_large_a_scaling(self):
        base = force_asym_large_a(Geometry(2.0, 1.0)).value
        scaled = force_asym_large_a(Geometry(6.0, 3.0)).value
        self.assertLessEqual(relative(scaled, base / 9.0), 1e-13)

    def test_small_a(self):
        g = Geometry(0.1, 1.0)
        exact = force_alt(g).value
        asymptote = force_asym_small_a(g)
        self.assertEqual(asymptote.route, "asym_small_a")
        self.assertLessEqual(abs(exact - asymptote.value), 1e-10 * abs(exact))

    def test_small_a_fails_at_square(self):
        g = Geometry(1.0, 1.0)
        exact = force_alt(g).value
        self.assertGreater(relative(force_asym_small_a(g).value, exact), 0.01)
        self.assertIsNone(force_asym_small_a(g).advisory)
        self.assertIsNotNone(force_asym_small_a(Geometry(2.0, 1.0)).advisory)

    def test_parallel_lines_limit(self):
        a = 1.0
        lines = parallel_lines_tension(a)
        for b, tolerance in ((100.0, 0.015), (200.0, 0.008)):
            per_length = force_alt(Geometry(a, b)).value / b
            self.assertLessEqual(abs(per_length - lines), tolerance * abs(lines))
        # correction term alone reproduces the gap at b/a = 100
        per_length = force_alt(Geometry(a, 100.0)).value / 100.0
        correction = math.pi**2 * a / (6.0 * ZETA3 * 100.0)
        self.assertAlmostEqual(per_length / lines, 1.0 - correction, delta=1e-4)

    def test_parallel_lines_formula(self):
        self.assertLess(parallel_lines_tension(0.3), 0.0)
        self.assertLessEqual(
            relative(parallel_lines_tension(2.0), parallel_lines_tension(1.0) / 8.0),
            1e-15,
        )
        with self.assertRaises(DomainError):
            parallel_lines_tension(0.0)


class CriticalRatioTests(SimpleTestCase):
    def test_root(self):
        root = critical_ratio(1e-6)
        self.assertGreaterEqual(root, 2.73)
        self.assertLessEqual(root, 2.75)

    def test_sign_change_around_root(self):
        result = solve_critical_ratio(1e-8)
        lo, hi = result.bracket
        self.assertLessEqual(lo, result.root)
        self.assertLessEqual(result.root, hi)
        self.assertGreater(energy_ar(Geometry(1.0, result.root - 0.1)).total, 0.0)
        self.assertLess(energy_ar(Geometry(1.0, result.root + 0.1)).total, 0.0)
        self.assertGreater(result.iterations, 0)

    def test_square_has_positive_energy(self):
        self.assertGreater(energy_ar(Geometry(1.0, 1.0)).total, 0.0)

    def test_energy_monotone_on_bracket(self):
        values = [energy_ar(Geometry(1.0, r)).total for r in np.linspace(2.0, 4.0, 21)]
        for left, right in zip(values, values[1:]):
            self.assertGreater(left, right)

    def test_tolerance_range(self):
        with self.assertRaises(DomainError):
            critical_ratio(1e-12)
        with self.assertRaises(DomainError):
            critical_ratio(0.1)
