import math
from unittest import mock

from django.test import SimpleTestCase, tag

from apps.casimir.energy import ZETA3, energy_ar
from apps.casimir.geometry import Geometry, PistonGeometry
from apps.cutofflab import modesum
from apps.cutofflab.counterterms import (
    aspect,
    aspect_coefficient,
    c1_quadrature,
    c2_quadrature,
    counterterm_residual,
    fit_counterterms,
    gaussian_counterterms,
)
from apps.cutofflab.cutoff import CutoffSpec
from apps.cutofflab.identities import (
    abel_plana_check,
    bose,
    identity_I_infinity,
    identity_sj3,
)
from apps.cutofflab.modesum import energy_cutoff, mode_sum, piston_total_energy
from apps.specfun.quadrature import ToleranceSpec
from helpers import (
    DomainError,
    IllConditionedError,
    SeriesBudgetExceeded,
    UnsupportedArgumentError,
    richardson_derivative,
)

CAMPAIGN = [
    Geometry(1.0, 1.0),
    Geometry(1.0, 2.0),
    Geometry(2.0, 1.0),
    Geometry(1.5, 1.5),
    Geometry(0.7, 1.3),
]
TIGHT = ToleranceSpec(rel_tol=1e-12)


def relative(x, y):
    return abs(x - y) / abs(y)


class CutoffSpecTests(SimpleTestCase):
    def test_conditions(self):
        for family in ("default", "gaussian"):
            for t in (0.0, 1.0, 10.0):
                gaps = []
                for scale in (10.0, 100.0, 1000.0):
                    value = CutoffSpec(scale, family).d(t)
                    self.assertGreater(value, 0.0)
                    self.assertLessEqual(value, 1.0)
                    gaps.append(1.0 - value)
                self.assertGreaterEqual(gaps[0], gaps[1])
                self.assertGreaterEqual(gaps[1], gaps[2])
                self.assertLess(gaps[2], 1e-3)

    def test_monotone_decay(self):
        for family in ("default", "gaussian"):
            cut = CutoffSpec(20.0, family)
            values = [cut.d(t) for t in (0.0, 1.0, 10.0, 50.0, 200.0)]
            for near, far in zip(values, values[1:]):
                self.assertGreater(near, far)

    def test_default_decays_like_inverse_fourth_power(self):
        cut = CutoffSpec(10.0)
        t = 1e5
        self.assertLessEqual(relative(t**4 * cut.d(t), 10.0**4), 1e-3)

    def test_symmetry(self):
        cut = CutoffSpec(15.0)
        for z, w in ((0.3, 7.0), (12.0, 1.5), (40.0, 0.0)):
            self.assertEqual(cut.D(z, w), cut.D(w, z))

    def test_derivative(self):
        for family in ("default", "gaussian"):
            cut = CutoffSpec(20.0, family)
            for t in (0.0, 3.0, 25.0):
                numeric = richardson_derivative(cut.d, t, 1e-3)
                self.assertAlmostEqual(cut.derivative(t), numeric, delta=1e-10)

    def test_validation(self):
        with self.assertRaises(DomainError):
            CutoffSpec(0.0)
        with self.assertRaises(DomainError):
            CutoffSpec(math.inf)
        with self.assertRaises(UnsupportedArgumentError):
            CutoffSpec(10.0, "lorentzian")
        self.assertEqual(CutoffSpec(10.0, "gaussian").with_scale(20.0).family, "gaussian")


class ModeSumTests(SimpleTestCase):
    def test_mode_box(self):
        self.assertEqual(mode_sum(Geometry(1.0, 1.0), CutoffSpec(10.0)).modes, (128, 128))
        self.assertEqual(mode_sum(Geometry(1.0, 2.0), CutoffSpec(20.0)).modes, (160, 320))

    def test_pieces(self):
        g = Geometry(1.0, 1.3)
        cut = CutoffSpec(20.0)
        pieces = mode_sum(g, cut)
        self.assertEqual(energy_cutoff(g, cut), 0.5 * math.pi * pieces.total)
        self.assertGreater(pieces.strip_j, 0.0)
        self.assertGreater(pieces.strip_k, 0.0)
        self.assertGreater(pieces.corner, 0.0)
        self.assertLessEqual(pieces.remainder, 1e-10 * pieces.total)

    def test_symmetry(self):
        cut = CutoffSpec(20.0)
        self.assertLessEqual(
            relative(
                energy_cutoff(Geometry(1.0, 2.0), cut), energy_cutoff(Geometry(2.0, 1.0), cut)
            ),
            1e-12,
        )

    def test_tail_repair_independent_of_box(self):
        g = Geometry(1.0, 1.3)
        cut = CutoffSpec(20.0)
        standard = energy_cutoff(g, cut)
        with mock.patch.object(modesum, "MODES_PER_SCALE", 12.0), mock.patch.object(
            modesum, "MIN_MODES", 192
        ):
            larger = energy_cutoff(g, cut)
        self.assertLessEqual(relative(standard, larger), 1e-10)

    def test_cubic_growth(self):
        g = Geometry(1.0, 1.0)
        energies = [energy_cutoff(g, CutoffSpec(scale)) for scale in (20.0, 40.0, 80.0)]
        first = energies[1] / energies[0]
        second = energies[2] / energies[1]
        self.assertLess(abs(second - 8.0), 0.8)
        self.assertLess(abs(second - 8.0), abs(first - 8.0))

    def test_budget(self):
        with self.assertRaises(SeriesBudgetExceeded):
            energy_cutoff(Geometry(1.0, 1.0), CutoffSpec(3000.0))

    def test_piston_total(self):
        cut = CutoffSpec(20.0, "gaussian")
        pg = PistonGeometry(3.0, 1.0, 1.0)
        expected = energy_cutoff(Geometry(1.0, 1.0), cut) + energy_cutoff(Geometry(2.0, 1.0), cut)
        self.assertLessEqual(relative(piston_total_energy(pg, cut), expected), 1e-15)


class PistonCutoffTests(SimpleTestCase):
    def ar_difference(self):
        def total(a):
            return energy_ar(Geometry(a, 1.0)).total + energy_ar(Geometry(3.0 - a, 1.0)).total

        return total(0.5) - total(1.5)

    def test_counterterms_drop_out_for_even_cutoff(self):
        cut = CutoffSpec(40.0, "gaussian")
        moved = piston_total_energy(PistonGeometry(3.0, 0.5, 1.0), cut) - piston_total_energy(
            PistonGeometry(3.0, 1.5, 1.0), cut
        )
        expected = self.ar_difference()
        self.assertLessEqual(abs(moved - expected), 0.01 * abs(expected))

    def test_default_cutoff_keeps_aspect_term(self):
        cut = CutoffSpec(40.0)
        c3 = aspect_coefficient(cut, c2_quadrature(cut))
        shift = c3 * (
            aspect(Geometry(0.5, 1.0))
            + aspect(Geometry(2.5, 1.0))
            - 2.0 * aspect(Geometry(1.5, 1.0))
        )
        moved = piston_total_energy(PistonGeometry(3.0, 0.5, 1.0), cut) - piston_total_energy(
            PistonGeometry(3.0, 1.5, 1.0), cut
        )
        self.assertLessEqual(abs(moved - self.ar_difference() - shift), 0.02 * abs(shift))


class CountertermQuadratureTests(SimpleTestCase):
    def test_gaussian_closed_forms(self):
        cut = CutoffSpec(20.0, "gaussian")
        c1, c2 = gaussian_counterterms(cut)
        self.assertLessEqual(relative(c1_quadrature(cut), c1), 1e-8)
        self.assertLessEqual(relative(c2_quadrature(cut), c2), 1e-10)
        with self.assertRaises(UnsupportedArgumentError):
            gaussian_counterterms(CutoffSpec(20.0))

    def test_signs(self):
        for scale in (10.0, 40.0):
            cut = CutoffSpec(scale)
            self.assertGreater(c1_quadrature(cut), 0.0)
            self.assertLess(c2_quadrature(cut), 0.0)

    def test_scaling(self):
        c1_ratio = c1_quadrature(CutoffSpec(100.0)) / c1_quadrature(CutoffSpec(50.0))
        c2_ratio = c2_quadrature(CutoffSpec(40.0)) / c2_quadrature(CutoffSpec(20.0))
        self.assertLessEqual(abs(c1_ratio - 8.0), 0.4)
        self.assertLessEqual(abs(c2_ratio - 4.0), 0.2)

    def test_refinement(self):
        cut = CutoffSpec(20.0)
        coarse = c1_quadrature(cut, ToleranceSpec(rel_tol=1e-10))
        fine = c1_quadrature(cut, ToleranceSpec(rel_tol=5e-11))
        self.assertLessEqual(relative(coarse, fine), 1e-8)
        coarse = c2_quadrature(cut, ToleranceSpec(rel_tol=1e-10))
        fine = c2_quadrature(cut, ToleranceSpec(rel_tol=5e-11))
        self.assertLessEqual(relative(coarse, fine), 1e-9)

    def test_aspect_coefficient(self):
        gaussian = CutoffSpec(50.0, "gaussian")
        self.assertEqual(aspect_coefficient(gaussian, c2_quadrature(gaussian)), 0.0)
        gaps = []
        for scale in (50.0, 1000.0):
            cut = CutoffSpec(scale)
            gaps.append(abs(aspect_coefficient(cut, c2_quadrature(cut)) - math.pi / 12.0))
        self.assertLess(gaps[1], gaps[0])
        self.assertLess(gaps[1], 0.005 * math.pi / 12.0)

    def test_gaussian_residual_approaches_ar_energy(self):
        g = Geometry(1.0, 1.0)
        target = energy_ar(g).total
        gaps = []
        for scale in (30.0, 40.0, 50.0, 60.0):
            cut = CutoffSpec(scale, "gaussian")
            c1, c2 = gaussian_counterterms(cut)
            gaps.append(abs(counterterm_residual(g, cut, c1, 0.25 * c2) - target))
        for near, far in zip(gaps, gaps[1:]):
            self.assertGreater(near, far)
        self.assertLess(gaps[-1], 0.01 * abs(target))


class FitTests(SimpleTestCase):
    def test_too_few_geometries(self):
        with self.assertRaises(IllConditionedError):
            fit_counterterms(CAMPAIGN[:3], CutoffSpec(20.0))
        with self.assertRaises(IllConditionedError):
            fit_counterterms([Geometry(1.0, 1.0)] * 5, CutoffSpec(20.0))

    def test_collinear_design(self):
        # 1/a + 1/b = 2 for every geometry, so (ab, a+b) are proportional
        geoms = [
            Geometry(1.0, 1.0),
            Geometry(0.75, 1.5),
            Geometry(0.6, 3.0),
            Geometry(2.0 / 3.0, 2.0),
        ]
        with self.assertRaises(IllConditionedError):
            fit_counterterms(geoms, CutoffSpec(20.0))

    def test_gaussian_fit(self):
        report = fit_counterterms(CAMPAIGN, CutoffSpec(30.0, "gaussian"))
        self.assertEqual(report.scale, 30.0)
        self.assertEqual(report.c3_aspect, 0.0)
        self.assertLessEqual(abs(report.c1_ratio - 1.0), 1e-6)
        self.assertLessEqual(abs(report.c2_ratio - 0.25), 1e-3)
        for g, residual in report.residuals:
            self.assertLessEqual(abs(residual), 0.01 * abs(energy_ar(g).total))


@tag("slow")
class FitCampaignTests(SimpleTestCase):
    def test_default_cutoff_at_fifty(self):
        report = fit_counterterms(CAMPAIGN, CutoffSpec(50.0))
        self.assertGreaterEqual(report.c1_ratio, 0.98)
        self.assertLessEqual(report.c1_ratio, 1.02)
        self.assertLessEqual(abs(report.c2_ratio - 0.25), 0.005)
        for g, residual in report.residuals:
            self.assertLessEqual(abs(residual), 0.01 * abs(energy_ar(g).total))

        bare = fit_counterterms(CAMPAIGN, CutoffSpec(50.0), subtract_aspect=False)
        self.assertGreater(bare.max_residual, 0.01)
        self.assertGreater(bare.max_residual, 10.0 * report.max_residual)

    def test_c2_ratio_stable_across_scales(self):
        ratios = [
            fit_counterterms(CAMPAIGN, CutoffSpec(scale)).c2_ratio
            for scale in (40.0, 50.0, 60.0)
        ]
        for ratio in ratios[1:]:
            self.assertLessEqual(relative(ratio, ratios[0]), 0.02)

    def test_residuals_shrink_with_scale(self):
        coarse = fit_counterterms(CAMPAIGN, CutoffSpec(25.0, "gaussian"))
        fine = fit_counterterms(CAMPAIGN, CutoffSpec(50.0, "gaussian"))
        self.assertLess(fine.max_residual, coarse.max_residual)
        for g, residual in fine.residuals:
            self.assertLessEqual(abs(residual), 0.01 * abs(energy_ar(g).total))


class IdentityTests(SimpleTestCase):
    def test_bose_factor(self):
        self.assertLessEqual(relative(bose(1e-8), 1e8 - 0.5), 1e-12)
        self.assertEqual(bose(800.0), 0.0)
        self.assertLessEqual(relative(bose(1.0), 1.0 / math.expm1(1.0)), 1e-15)

    def test_i_infinity(self):
        check = identity_I_infinity(Geometry(1.0, 1.0))
        self.assertAlmostEqual(check.right, -ZETA3 / (8.0 * math.pi**2), delta=1e-16)
        self.assertLessEqual(check.relative_discrepancy, 1e-9)
        self.assertLessEqual(relative(check.cross_check, check.left), 1e-8)

    def test_i_infinity_closed_form_scaling(self):
        base = identity_I_infinity(Geometry(1.0, 1.0)).right
        other = identity_I_infinity(Geometry(2.0, 3.0)).right
        self.assertLessEqual(relative(other, 0.75 * base), 1e-15)

    def test_sj3(self):
        for j, g in ((1, Geometry(1.0, 1.0)), (3, Geometry(2.0, 1.0))):
            check = identity_sj3(j, g, TIGHT)
            self.assertLess(check.right, 0.0)
            self.assertLessEqual(check.relative_discrepancy, 1e-10, j)

    def test_sj3_exponential_suppression(self):
        near = identity_sj3(1, Geometry(1.0, 2.0), TIGHT)
        far = identity_sj3(1, Geometry(1.0, 5.0), TIGHT)
        for side in ("left", "right"):
            ratio = getattr(far, side) / getattr(near, side)
            scaled = ratio / math.exp(-6.0 * math.pi)
            self.assertGreater(scaled, 0.6, side)
            self.assertLess(scaled, 0.65, side)

    def test_sj3_validation(self):
        with self.assertRaises(DomainError):
            identity_sj3(0, Geometry(1.0, 1.0))

    def test_abel_plana(self):
        exp_case = abel_plana_check("exp_decay")
        self.assertAlmostEqual(exp_case.left, 1.0 / (1.0 - math.exp(-1.0)), delta=1e-15)
        self.assertLessEqual(exp_case.relative_discrepancy, 1e-10)
        rational = abel_plana_check("rational")
        self.assertAlmostEqual(rational.left, math.pi**2 / 6.0, delta=1e-15)
        self.assertLessEqual(rational.relative_discrepancy, 1e-10)

    def test_abel_plana_linearity(self):
        single = abel_plana_check("exp_decay")
        double = abel_plana_check("exp_decay", amplitude=2.0)
        self.assertEqual(double.left, 2.0 * single.left)
        self.assertLessEqual(relative(double.right, 2.0 * single.right), 1e-15)

    def test_unknown_case(self):
        with self.assertRaises(UnsupportedArgumentError):
            abel_plana_check("harmonic")
