import math

import numpy as np
from django.test import SimpleTestCase, tag

from apps.epstein.lattice import (
    LatticeParams,
    reflect_epstein,
    s_aux,
    z2_continued,
    z2_direct,
    z2_s3_fast,
)
from apps.epstein.series import SeriesControl, double_series, geometric_tail
from helpers import (
    DomainError,
    PoleError,
    SeriesBudgetExceeded,
    UnsupportedArgumentError,
)

ORACLE = SeriesControl(rel_tol=1e-10)


def relative(x, y):
    return abs(x - y) / abs(y)


class SeriesControlTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            SeriesControl(rel_tol=0.0)
        with self.assertRaises(DomainError):
            SeriesControl(max_outer_terms=0)

    def test_geometric_tail(self):
        self.assertAlmostEqual(geometric_tail(0.25, 0.5), 0.25, delta=1e-15)
        self.assertEqual(geometric_tail(0.0, 1.0), 0.0)
        self.assertEqual(geometric_tail(1.0, 1.0), math.inf)

    def test_separable_exponential_series(self):
        result = double_series(lambda j, k: math.exp(-(j + k)), SeriesControl())
        exact = 1.0 / (math.e - 1.0) ** 2
        self.assertLessEqual(relative(result.value, exact), 2e-12)
        self.assertGreaterEqual(result.tail_bound, 0.0)
        self.assertLessEqual(result.tail_bound, 1e-11 * exact)
        self.assertGreater(result.terms, 1)

    def test_budget(self):
        ctrl = SeriesControl(max_outer_terms=5, max_inner_terms=5)
        with self.assertRaises(SeriesBudgetExceeded) as caught:
            double_series(lambda j, k: 1.0 / (j * k) ** 2, ctrl)
        self.assertIsNotNone(caught.exception.estimate)


class DirectSumTests(SimpleTestCase):
    def test_requires_convergent_argument(self):
        with self.assertRaises(DomainError):
            z2_direct(LatticeParams(1.0, 1.0, 2.0))
        with self.assertRaises(DomainError):
            LatticeParams(0.0, 1.0, 3.0)

    def test_radius_doubling_self_consistency(self):
        loose = z2_direct(LatticeParams(1.0, 1.0, 4.0), SeriesControl(rel_tol=1e-9))
        tight = z2_direct(LatticeParams(1.0, 1.0, 4.0), SeriesControl(rel_tol=1e-12))
        self.assertLessEqual(relative(loose, tight), 1e-8)

    def test_square_lattice_s4(self):
        # Σ'(j²+k²)^-2 = 4ζ(2)β(2), β(2) being Catalan's constant
        catalan = 0.915965594177219015054603514932384
        exact = 4.0 * (math.pi**2 / 6.0) * catalan
        value = z2_direct(LatticeParams(1.0, 1.0, 4.0), ORACLE)
        self.assertLessEqual(relative(value, exact), 1e-9)

    def test_homogeneity(self):
        base = z2_direct(LatticeParams(1.0, 1.0, 3.0), ORACLE)
        doubled = z2_direct(LatticeParams(2.0, 2.0, 3.0), ORACLE)
        self.assertLessEqual(relative(doubled, base / 8.0), 1e-10)

    def test_matches_fast_route_on_square(self):
        direct = z2_direct(LatticeParams(1.0, 1.0, 3.0), ORACLE)
        self.assertLessEqual(relative(direct, z2_s3_fast(1.0, 1.0)), 1e-6)

    def test_budget(self):
        with self.assertRaises(SeriesBudgetExceeded):
            z2_direct(
                LatticeParams(1.0, 1.0, 2.5),
                SeriesControl(rel_tol=1e-14, max_inner_terms=64),
            )


@tag("slow")
class RouteEquivalenceTests(SimpleTestCase):
    def test_fast_against_direct(self):
        for a, b in ((1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 1.5), (3.0, 1.0)):
            direct = z2_direct(LatticeParams(a, b, 3.0), ORACLE)
            fast = z2_s3_fast(a, b)
            self.assertLessEqual(relative(fast, direct), 1e-6, (a, b))


class AuxiliaryFunctionTests(SimpleTestCase):
    def test_routes_agree(self):
        bessel = s_aux(math.pi, 1.0, 3.0, route="bessel")
        direct = s_aux(math.pi, 1.0, 3.0, route="direct")
        self.assertLessEqual(relative(bessel, direct), 1e-9)

    def test_routes_agree_for_small_product(self):
        bessel = s_aux(0.3, 0.5, 3.0, route="bessel")
        direct = s_aux(0.3, 0.5, 3.0, route="direct")
        self.assertLessEqual(relative(bessel, direct), 1e-9)

    def test_bessel_correction_vanishes_for_large_product(self):
        m, a = 25.0, 1.0
        leading = math.pi * a / (m * m)
        self.assertLessEqual(relative(s_aux(m, a, 3.0), leading), 1e-15)

    def test_scaling(self):
        for route in ("bessel", "direct"):
            base = s_aux(1.3, 0.8, 3.0, route=route)
            scaled = s_aux(2.6, 0.4, 3.0, route=route)
            self.assertLessEqual(relative(scaled, base / 8.0), 1e-10, route)

    def test_direct_route_away_from_three(self):
        # S(m, a; 4) against the brute-force sum with a huge cut
        m, a, s = 2.0, 1.5, 4.0
        n = np.arange(-200_000, 200_001, dtype=float)
        brute = np.sum(((m / math.pi) ** 2 + (n / a) ** 2) ** (-s / 2))
        brute *= math.pi ** (-s / 2) * math.gamma(s / 2)
        self.assertLessEqual(relative(s_aux(m, a, s), brute), 1e-9)

    def test_unsupported(self):
        with self.assertRaises(UnsupportedArgumentError):
            s_aux(1.0, 1.0, 5.0, route="bessel")
        with self.assertRaises(UnsupportedArgumentError):
            s_aux(1.0, 1.0, 0.5)
        with self.assertRaises(DomainError):
            s_aux(-1.0, 1.0, 3.0)


class FastRouteTests(SimpleTestCase):
    def test_symmetry(self):
        self.assertLessEqual(
            relative(z2_s3_fast(1.0, 3.0), z2_s3_fast(3.0, 1.0)), 1e-11
        )
        for ratio in np.geomspace(0.1, 10.0, 15):
            self.assertLessEqual(
                relative(z2_s3_fast(ratio, 1.0), z2_s3_fast(1.0, ratio)), 1e-11
            )

    def test_homogeneity(self):
        for a, b in ((1.0, 1.0), (1.0, 2.5)):
            base = z2_s3_fast(a, b)
            for scale in (0.5, 2.0, 7.0):
                scaled = z2_s3_fast(scale * a, scale * b)
                self.assertLessEqual(relative(scaled, base / scale**3), 1e-11)

    def test_monotone_in_first_side(self):
        values = [z2_s3_fast(a, 1.0) for a in np.linspace(0.2, 5.0, 20)]
        for left, right in zip(values, values[1:]):
            self.assertGreater(left, right)

    def test_domain(self):
        with self.assertRaises(DomainError):
            z2_s3_fast(0.0, 1.0)


class ContinuationTests(SimpleTestCase):
    def test_minus_one_on_square(self):
        expected = -z2_s3_fast(1.0, 1.0) / (4.0 * math.pi**2)
        self.assertLessEqual(relative(z2_continued(1.0, 1.0, -1.0), expected), 1e-14)
        direct = z2_direct(LatticeParams(1.0, 1.0, 3.0), ORACLE)
        self.assertLessEqual(
            relative(z2_continued(1.0, 1.0, -1.0), -direct / (4.0 * math.pi**2)),
            1e-9,
        )

    def test_delegation(self):
        self.assertEqual(z2_continued(1.3, 0.7, 3.0), z2_s3_fast(1.3, 0.7))
        self.assertEqual(
            z2_continued(1.0, 1.0, 4.0), z2_direct(LatticeParams(1.0, 1.0, 4.0))
        )

    def test_round_trip(self):
        continued = z2_continued(1.0, 2.0, -1.0)
        back = reflect_epstein(1.0, 2.0, -1.0, continued)
        self.assertLessEqual(relative(back, z2_s3_fast(1.0, 0.5)), 1e-10)

    def test_reflection_special_points(self):
        with self.assertRaises(PoleError):
            reflect_epstein(1.0, 1.0, 2.0, 1.0)
        self.assertEqual(reflect_epstein(1.0, 1.0, 4.0, 1.0), 0.0)
        with self.assertRaises(UnsupportedArgumentError):
            reflect_epstein(1.0, 1.0, -2.0, 0.0)

    def test_unsupported_arguments(self):
        for s in (1.0, 0.5, -3.0, 2.0):
            with self.assertRaises(UnsupportedArgumentError):
                z2_continued(1.0, 1.0, s)
