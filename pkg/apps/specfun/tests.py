import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from apps.specfun.functions import (
    bessel_k,
    bessel_k1_prime,
    bessel_k_ex,
    gamma,
    reflect_zeta,
    riemann_zeta,
)
from apps.specfun.quadrature import (
    ToleranceSpec,
    integrate_finite,
    integrate_quadrant,
    integrate_semi_infinite,
)
from helpers import (
    ArgumentRangeError,
    DomainError,
    PoleError,
    QuadratureNonConvergence,
    UnsupportedArgumentError,
    central_difference,
    richardson_derivative,
)

TIGHT = ToleranceSpec(rel_tol=1e-13)


def fd_step(x):
    return max(1e-5, 1e-5 * abs(x))


def bessel_integral(order, x):
    """K_ν(x) = ∫₀^∞ exp(-x cosh t) cosh(νt) dt."""

    def integrand(t):
        if t > 50.0:
            return 0.0
        return math.exp(-x * math.cosh(t)) * math.cosh(order * t)

    return integrate_semi_infinite(integrand, 0.0, TIGHT).value


class GammaTests(SimpleTestCase):
    def test_closed_forms(self):
        self.assertAlmostEqual(gamma(1.0), 1.0, delta=1e-14)
        self.assertAlmostEqual(gamma(0.5), math.sqrt(math.pi), delta=1e-14)
        self.assertAlmostEqual(gamma(-0.5), -2.0 * math.sqrt(math.pi), delta=1e-13)
        self.assertAlmostEqual(gamma(5.0) / 24.0, 1.0, delta=1e-13)

    def test_poles_and_range(self):
        for x in (0.0, -1.0, -7.0):
            with self.assertRaises(PoleError):
                gamma(x)
        with self.assertRaises(ArgumentRangeError):
            gamma(171.0)
        with self.assertRaises(ArgumentRangeError):
            gamma(-170.5)

    def test_large_argument_is_finite(self):
        self.assertTrue(math.isfinite(gamma(170.0)))
        self.assertAlmostEqual(gamma(170.0) / math.factorial(169), 1.0, delta=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(min_value=0.1, max_value=50.0))
    def test_recurrence(self, x):
        upper = gamma(x + 1.0)
        self.assertLessEqual(abs(upper - x * gamma(x)), 1e-12 * abs(upper))


class ZetaTests(SimpleTestCase):
    def test_closed_forms(self):
        self.assertAlmostEqual(riemann_zeta(2.0), math.pi**2 / 6.0, delta=1e-14)
        self.assertAlmostEqual(riemann_zeta(4.0), math.pi**4 / 90.0, delta=1e-14)
        self.assertEqual(riemann_zeta(0.0), -0.5)
        self.assertAlmostEqual(riemann_zeta(-1.0), -1.0 / 12.0, delta=1e-12)
        self.assertAlmostEqual(riemann_zeta(-3.0), 1.0 / 120.0, delta=1e-13)

    def test_trivial_zeros(self):
        for s in (-2.0, -4.0, -10.0):
            self.assertEqual(riemann_zeta(s), 0.0)

    def test_zeta3_against_bracketed_partial_sum(self):
        n = 1_000_000
        k = np.arange(1, n + 1, dtype=float)
        partial = math.fsum((k**-3)[::-1])
        # Σ_{k>N} k^-3 lies between ∫_{N+1}^∞ and ∫_N^∞ of t^-3
        tail = 0.5 * (0.5 / (n + 1) ** 2 + 0.5 / n**2)
        oracle = partial + tail
        self.assertLessEqual(abs(riemann_zeta(3.0) - oracle), 1e-13 * oracle)

    def test_pole(self):
        with self.assertRaises(PoleError):
            riemann_zeta(1.0)

    def test_between_half_and_one(self):
        # ζ(1/2) = -1.4603545088095868...
        self.assertAlmostEqual(riemann_zeta(0.5), -1.4603545088095868, delta=1e-12)
        # continuity across the reflection switch
        self.assertAlmostEqual(
            riemann_zeta(0.5 - 1e-9), riemann_zeta(0.5 + 1e-9), delta=1e-7
        )

    def test_reflection_round_trip(self):
        for s in (3.5, 5.5, 7.5):
            value = riemann_zeta(s)
            there = reflect_zeta(s, value)
            back = reflect_zeta(1.0 - s, there)
            self.assertLessEqual(abs(back - value), 1e-12 * abs(value))

    def test_reflection_onto_trivial_zero(self):
        for s in (3.0, 5.0, 7.0):
            self.assertEqual(reflect_zeta(s, riemann_zeta(s)), 0.0)
        with self.assertRaises(UnsupportedArgumentError):
            reflect_zeta(-2.0, 0.0)

    def test_reflection_reproduces_minus_one_twelfth(self):
        self.assertAlmostEqual(
            reflect_zeta(2.0, math.pi**2 / 6.0), -1.0 / 12.0, delta=1e-12
        )


class BesselTests(SimpleTestCase):
    def test_against_integral_representation(self):
        for order in (0, 1):
            for x in (0.3, 1.0, 2.5, 6.0):
                oracle = bessel_integral(order, x)
                self.assertLessEqual(
                    abs(bessel_k(order, x) - oracle), 1e-12 * oracle, (order, x)
                )

    def test_reference_values(self):
        self.assertAlmostEqual(bessel_k(0, 1.0), 0.42102443824070834, delta=1e-14)
        self.assertAlmostEqual(bessel_k(1, 1.0), 0.6019072301972346, delta=1e-14)

    def test_small_argument(self):
        self.assertAlmostEqual(1e-6 * bessel_k(1, 1e-6), 1.0, delta=1e-5)

    def test_large_argument_leading_behavior(self):
        leading = math.sqrt(math.pi / 40.0) * math.exp(-20.0)
        self.assertAlmostEqual(bessel_k(1, 20.0) / leading, 1.0, delta=0.02)

    def test_switch_point_is_continuous(self):
        for order in (0, 1):
            below = bessel_k(order, 2.0)
            above = bessel_k(order, 2.0 + 1e-12)
            self.assertLessEqual(abs(below - above), 1e-11 * below)

    def test_ordering_and_monotonicity(self):
        grid = np.geomspace(1e-3, 600.0, 200)
        k0 = [bessel_k(0, x) for x in grid]
        k1 = [bessel_k(1, x) for x in grid]
        for i in range(len(grid)):
            self.assertGreater(k1[i], k0[i])
        for i in range(1, len(grid)):
            self.assertLess(k0[i], k0[i - 1])
            self.assertLess(k1[i], k1[i - 1])

    def test_underflow_flag(self):
        self.assertEqual(bessel_k_ex(1, 800.0), (0.0, True))
        value, underflowed = bessel_k_ex(0, 10.0)
        self.assertFalse(underflowed)
        self.assertGreater(value, 0.0)

    def test_domain_and_order(self):
        with self.assertRaises(DomainError):
            bessel_k(0, 0.0)
        with self.assertRaises(DomainError):
            bessel_k1_prime(-1.0)
        with self.assertRaises(UnsupportedArgumentError):
            bessel_k(2, 1.0)

    def test_k1_prime_against_finite_difference(self):
        fd = central_difference(lambda t: bessel_k(1, t), 1.0, 1e-5)
        self.assertAlmostEqual(bessel_k1_prime(1.0), fd, delta=1e-8)

    def test_k1_prime_negative(self):
        for x in (0.1, 1.0, 10.0):
            self.assertLess(bessel_k1_prime(x), 0.0)

    def test_k1_prime_large_argument(self):
        leading = -math.sqrt(math.pi / 60.0) * math.exp(-30.0)
        self.assertAlmostEqual(bessel_k1_prime(30.0) / leading, 1.0, delta=0.03)

    def test_k0_derivative_identity(self):
        for x in (0.5, 2.0, 8.0):
            fd = richardson_derivative(lambda t: bessel_k(0, t), x, fd_step(x))
            k1 = bessel_k(1, x)
            self.assertLessEqual(abs(fd + k1), 1e-7 * k1)


class QuadratureTests(SimpleTestCase):
    def test_exponential(self):
        result = integrate_semi_infinite(lambda t: math.exp(-t), 0.0)
        self.assertAlmostEqual(result.value, 1.0, delta=1e-10)
        self.assertGreaterEqual(result.error_estimate, 0.0)
        self.assertGreaterEqual(result.evaluations, 1)

    def test_polynomials_times_exponential(self):
        for degree in range(7):
            result = integrate_semi_infinite(
                lambda t, n=degree: t**n * math.exp(-t), 0.0, TIGHT
            )
            exact = math.factorial(degree)
            self.assertLessEqual(abs(result.value - exact), 1e-12 * exact, degree)

    def test_bose_weight_moment(self):
        def integrand(t):
            x = 2.0 * math.pi * t
            return t * t * math.exp(-x) / -math.expm1(-x)

        result = integrate_semi_infinite(integrand, 0.0, TIGHT)
        exact = riemann_zeta(3.0) / (4.0 * math.pi**3)
        self.assertLessEqual(abs(result.value - exact), 1e-10 * exact)

    def test_bessel_integral_on_shifted_domain(self):
        result = integrate_semi_infinite(
            lambda t: math.sqrt(t * t - 1.0) * math.exp(-2.0 * math.pi * t),
            1.0,
            TIGHT,
            scale=0.2,
        )
        exact = bessel_k(1, 2.0 * math.pi) / (2.0 * math.pi)
        self.assertLessEqual(abs(result.value - exact), 1e-10 * exact)

    def test_finite_interval(self):
        result = integrate_finite(math.sin, 0.0, math.pi, TIGHT)
        self.assertAlmostEqual(result.value, 2.0, delta=1e-12)
        reversed_result = integrate_finite(math.sin, math.pi, 0.0, TIGHT)
        self.assertAlmostEqual(reversed_result.value, -2.0, delta=1e-12)

    def test_quadrant_separable(self):
        result = integrate_quadrant(lambda u, v: math.exp(-u - v))
        self.assertAlmostEqual(result.value, 1.0, delta=1e-9)

    def test_quadrant_gaussian(self):
        result = integrate_quadrant(lambda u, v: math.exp(-u * u - v * v))
        self.assertAlmostEqual(result.value, math.pi / 4.0, delta=1e-9)

    def test_quadrant_cutoff_integrand_is_stable(self):
        scale = 10.0

        def damping(t):
            return (1.0 + (t + 1.0) ** 2 / scale**2) ** -2

        def integrand(u, v):
            return math.hypot(u, v) * damping(u) * damping(v)

        tol = ToleranceSpec(rel_tol=1e-10)
        coarse = integrate_quadrant(integrand, tol, scale=scale)
        fine = integrate_quadrant(integrand, tol.scaled(0.5), scale=scale)
        self.assertGreater(coarse.value, 0.0)
        self.assertLessEqual(abs(fine.value - coarse.value), 1e-8 * fine.value)

    def test_budget_exhaustion_carries_estimate(self):
        tol = ToleranceSpec(rel_tol=1e-14, max_evals=40)
        with self.assertRaises(QuadratureNonConvergence) as caught:
            integrate_semi_infinite(lambda t: 1.0 / (1.0 + t) ** 1.01, 0.0, tol)
        self.assertIsNotNone(caught.exception.estimate)
        self.assertGreater(caught.exception.error_bound, 0.0)

    def test_tolerance_validation(self):
        with self.assertRaises(DomainError):
            ToleranceSpec(rel_tol=1e-17)
        with self.assertRaises(DomainError):
            ToleranceSpec(abs_tol=-1.0)
        with self.assertRaises(DomainError):
            ToleranceSpec(max_evals=0)
        self.assertEqual(ToleranceSpec(rel_tol=1e-15).scaled(1e-3).rel_tol, 2.0**-50)
