import json
import math
import tempfile
from dataclasses import fields
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from apps.casimir.geometry import ForceValue, Geometry
from apps.commando import selftest
from apps.commando.cli import run
from apps.commando.records import (
    CriticalRatioRecord,
    FitRecord,
    OutputRecord,
    PistonForceRecord,
    SweepSpec,
    build_record,
    fit_records,
    from_csv,
    to_csv,
    to_json,
)
from apps.cutofflab.counterterms import FitReport
from apps.epstein.series import SeriesControl
from helpers import ArgumentRangeError, ConvergenceError, DomainError, SeriesBudgetExceeded


def relative(x, y):
    return abs(x - y) / abs(y)


class LabRunMixin:
    def lab(self, *argv):
        out, err = StringIO(), StringIO()
        code = run(list(argv), stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()


class SweepSpecTests(SimpleTestCase):
    def test_linear_and_log_grids(self):
        linear = SweepSpec(1.0, 3.0, 5)
        self.assertEqual(linear.ratios(), [1.0, 1.5, 2.0, 2.5, 3.0])
        log = SweepSpec(0.1, 10.0, 3, spacing="log").ratios()
        self.assertAlmostEqual(log[1], 1.0, delta=1e-15)
        geometries = SweepSpec(1.0, 2.0, 2, b_fixed=2.0).geometries()
        self.assertEqual(geometries, [Geometry(2.0, 2.0), Geometry(4.0, 2.0)])

    def test_validation(self):
        with self.assertRaises(DomainError):
            SweepSpec(2.0, 1.0, 5)
        with self.assertRaises(DomainError):
            SweepSpec(1.0, 2.0, 1)
        with self.assertRaises(DomainError):
            SweepSpec(1.0, 2.0, 5, spacing="cubic")
        with self.assertRaises(DomainError):
            SweepSpec(1.0, 2.0, 5, b_fixed=0.0)
        with self.assertRaises(ArgumentRangeError):
            SweepSpec(1e-5, 2.0, 5)


class RecordTests(SimpleTestCase):
    def test_record_fields(self):
        record = build_record(Geometry(2.0, 1.0), SeriesControl())
        self.assertEqual(record.ratio, 2.0)
        self.assertEqual(record.energy_route, "bessel_series")
        self.assertEqual(record.preferred_force_route, "eq11")
        self.assertEqual(record.advisories, "")
        self.assertLess(record.force_eq11, 0.0)
        self.assertGreaterEqual(record.force_eq11_tail_bound, 0.0)

    def test_advisories_are_joined(self):
        record = build_record(Geometry(0.04, 1.0), SeriesControl())
        self.assertIn("prefer eq14", record.advisories)
        self.assertEqual(record.preferred_force_route, "eq14")

    def test_thin_box_skips_eq11(self):
        record = build_record(Geometry(1e-3, 1.0), SeriesControl())
        self.assertEqual(record.preferred_force_route, "eq14")
        self.assertIsNone(record.force_eq11)
        self.assertIsNone(record.force_eq11_tail_bound)
        self.assertLess(record.force_eq14, 0.0)
        self.assertIn("eq11 did not converge", record.advisories)
        self.assertEqual(from_csv(to_csv([record]), OutputRecord), [record])
        self.assertIsNone(json.loads(to_json([record]))[0]["force_eq11"])

    def test_long_box_skips_eq14(self):
        record = build_record(Geometry(1e3, 1.0), SeriesControl())
        self.assertEqual(record.preferred_force_route, "eq11")
        self.assertEqual(record.force_eq11, 0.0)
        self.assertIsNone(record.force_eq14)
        self.assertIn("eq14 did not converge", record.advisories)
        self.assertEqual(from_csv(to_csv([record]), OutputRecord), [record])

    def test_preferred_route_failure_propagates(self):
        failing = mock.Mock(side_effect=SeriesBudgetExceeded("budget"))
        with mock.patch("apps.commando.records.force_alt", failing):
            with self.assertRaises(SeriesBudgetExceeded):
                build_record(Geometry(0.5, 1.0), SeriesControl())

    def test_fit_rows_per_geometry(self):
        geoms = [Geometry(1.0, 1.0), Geometry(1.0, 2.0)]
        report = FitReport(
            c1_fit=2.0,
            c1_quad=2.0,
            c2_fit=-0.25,
            c2_quad=-1.0,
            residuals=[(geoms[0], 1e-4), (geoms[1], -3e-4)],
            scale=30.0,
        )
        rows = fit_records(report, "gaussian")
        self.assertEqual([(row.a, row.b) for row in rows], [(1.0, 1.0), (1.0, 2.0)])
        self.assertEqual([row.residual for row in rows], [1e-4, -3e-4])
        self.assertEqual({row.max_residual for row in rows}, {3e-4})
        self.assertEqual(rows[0].c2_ratio, 0.25)
        self.assertEqual(from_csv(to_csv(rows), FitRecord), rows)

    def test_csv_round_trip(self):
        records = [
            build_record(Geometry(ratio, 1.0), SeriesControl()) for ratio in (0.3, 1.0, 2.7)
        ]
        text = to_csv(records)
        self.assertTrue(text.startswith("a,b,ratio,energy_total,"))
        self.assertNotIn("\r", text)
        self.assertEqual(from_csv(text, OutputRecord), records)

    def test_csv_round_trip_of_integer_fields(self):
        record = CriticalRatioRecord(2.7355, 2.7354, 2.7356, 14, 1e-6, 2.74)
        self.assertEqual(from_csv(to_csv([record]), CriticalRatioRecord), [record])

    def test_non_finite_values_are_refused(self):
        record = CriticalRatioRecord(math.nan, 2.0, 4.0, 1, 1e-6, 2.74)
        with self.assertRaises(ConvergenceError):
            to_csv([record])
        with self.assertRaises(ConvergenceError):
            to_json([record])


class SelftestRegistryTests(SimpleTestCase):
    def test_names_are_unique(self):
        names = [item.name for item in selftest.CHECKS]
        self.assertEqual(len(names), len(set(names)))
        self.assertTrue(any(item.slow for item in selftest.CHECKS))

    def test_quick_checks_pass(self):
        outcomes = selftest.run_checks(include_slow=False)
        self.assertTrue(outcomes)
        self.assertEqual([o.name for o in outcomes if not o.passed], [])

    def test_errors_count_as_failures(self):
        def raising():
            raise SeriesBudgetExceeded("budget")

        checks = [selftest.Check("raises", raising)]
        with mock.patch.object(selftest, "CHECKS", checks):
            with self.assertLogs("apps.commando", "ERROR"):
                (outcome,) = selftest.run_checks()
        self.assertFalse(outcome.passed)
        self.assertIn("SeriesBudgetExceeded", outcome.detail)

    def test_unexpected_exceptions_count_as_failures(self):
        def dividing():
            return 1.0 / 0.0

        checks = [selftest.Check("divides", dividing), selftest.Check("passes", lambda: None)]
        with mock.patch.object(selftest, "CHECKS", checks):
            with self.assertLogs("apps.commando", "ERROR"):
                failed, passed = selftest.run_checks()
        self.assertFalse(failed.passed)
        self.assertIn("ZeroDivisionError", failed.detail)
        self.assertTrue(passed.passed)

    def test_registry_covers_module_invariants(self):
        slow = {item.name: item.slow for item in selftest.CHECKS}
        for name in (
            "gamma recurrence",
            "K0' = -K1",
            "quadrature exact on t^n e^-t",
            "Epstein homogeneity and symmetry",
            "Epstein decreasing in a",
            "force scaling",
            "force magnitude decreases with distance",
            "cutoff conditions",
        ):
            self.assertFalse(slow[name], name)
        for name in (
            "Epstein direct sum homogeneity",
            "cutoff residual converges to the AR energy",
            "default counterterm fit at scale 50",
            "C2 ratio stable across scales",
        ):
            self.assertTrue(slow[name], name)


class LabCommandTests(LabRunMixin, SimpleTestCase):
    def test_force_routes_agree_on_square(self):
        code, out, _ = self.lab("force", "--a", "1", "--b", "1", "--format", "json")
        self.assertEqual(code, 0)
        (record,) = json.loads(out)
        self.assertLess(record["force_eq11"], 0.0)
        self.assertLess(record["force_eq14"], 0.0)
        self.assertLessEqual(relative(record["force_eq14"], record["force_eq11"]), 1e-9)

    def test_critical_ratio(self):
        code, out, _ = self.lab("critical-ratio", "--format", "json")
        self.assertEqual(code, 0)
        (record,) = json.loads(out)
        self.assertAlmostEqual(record["root"], 2.74, delta=0.01)
        self.assertEqual(record["reference"], 2.74)
        self.assertLessEqual(record["bracket_low"], record["root"])
        self.assertLessEqual(record["root"], record["bracket_high"])

    def test_finite_box_midpoint(self):
        code, out, _ = self.lab("force", "--a", "5", "--b", "1", "--L", "10")
        self.assertEqual(code, 0)
        (record,) = from_csv(out, PistonForceRecord)
        self.assertEqual(record.L, 10.0)
        self.assertAlmostEqual(record.force_finite_L, 0.0, delta=1e-12)
        self.assertAlmostEqual(record.force_finite_difference, 0.0, delta=1e-12)

    def test_energy_routes(self):
        _, series_out, _ = self.lab("energy", "--a", "1.5", "--b", "1")
        _, zeta_out, _ = self.lab("energy", "--a", "1.5", "--b", "1", "--route", "zeta")
        (series,) = from_csv(series_out, OutputRecord)
        (zeta,) = from_csv(zeta_out, OutputRecord)
        self.assertEqual(zeta.energy_route, "zeta_reflection")
        self.assertLessEqual(relative(zeta.energy_total, series.energy_total), 1e-10)

    def test_sweep_csv_round_trip(self):
        code, out, _ = self.lab(
            "sweep", "--ratio-min", "0.5", "--ratio-max", "2",
            "--points", "5", "--spacing", "log", "--format", "csv",
        )
        self.assertEqual(code, 0)
        grid = SweepSpec(0.5, 2.0, 5, spacing="log")
        expected = [build_record(g, SeriesControl()) for g in grid.geometries()]
        self.assertEqual(from_csv(out, OutputRecord), expected)

    def test_sweep_order_does_not_depend_on_workers(self):
        argv = ("sweep", "--ratio-min", "0.2", "--ratio-max", "3", "--points", "6")
        _, serial, _ = self.lab(*argv, "--workers", "1")
        _, parallel, _ = self.lab(*argv, "--workers", "4")
        self.assertEqual(serial, parallel)

    def test_sweep_json(self):
        code, out, _ = self.lab(
            "sweep", "--ratio-min", "0.5", "--ratio-max", "4",
            "--points", "4", "--format", "json",
        )
        self.assertEqual(code, 0)
        self.assertNotIn("NaN", out)
        rows = json.loads(out)
        self.assertEqual(len(rows), 4)
        self.assertEqual(list(rows[0]), [field.name for field in fields(OutputRecord)])
        ratios = [row["ratio"] for row in rows]
        self.assertEqual(ratios, sorted(ratios))

    def test_output_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "energy.csv"
            code, out, _ = self.lab("energy", "--a", "1", "--b", "2", "--output", str(target))
            self.assertEqual(code, 0)
            self.assertIn("Wrote 1 records", out)
            (record,) = from_csv(target.read_text(encoding="utf-8"), OutputRecord)
        self.assertEqual(record.b, 2.0)

    def test_gaussian_cutoff_verification(self):
        code, out, _ = self.lab(
            "cutoff-verify", "--lambdas", "30", "--family", "gaussian", "--format", "json"
        )
        self.assertEqual(code, 0)
        rows = json.loads(out)
        self.assertEqual(
            [(row["a"], row["b"]) for row in rows],
            [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (1.5, 1.5), (0.7, 1.3)],
        )
        self.assertEqual({row["scale"] for row in rows}, {30.0})
        self.assertEqual(max(abs(row["residual"]) for row in rows), rows[0]["max_residual"])
        self.assertLessEqual(abs(rows[0]["c1_ratio"] - 1.0), 1e-6)
        self.assertLessEqual(abs(rows[0]["c2_ratio"] - 0.25), 1e-3)

    def test_sweep_across_the_admissible_range(self):
        code, out, _ = self.lab(
            "sweep", "--ratio-min", "1e-3", "--ratio-max", "1e3",
            "--points", "7", "--spacing", "log", "--format", "json",
        )
        self.assertEqual(code, 0)
        rows = json.loads(out)
        self.assertEqual(len(rows), 7)
        self.assertIsNone(rows[0]["force_eq11"])
        self.assertLess(rows[0]["force_eq14"], 0.0)
        self.assertIsNone(rows[-1]["force_eq14"])
        for row in rows:
            self.assertIsNotNone(row[f"force_{row['preferred_force_route']}"])

    def test_selftest_quick(self):
        code, out, _ = self.lab("selftest", "--skip-slow")
        self.assertEqual(code, 0)
        self.assertIn("PASS  critical ratio in [2.73, 2.75]", out)
        self.assertNotIn("FAIL", out)


class LabExitCodeTests(LabRunMixin, SimpleTestCase):
    def test_unknown_flag(self):
        code, _, err = self.lab("force", "--a", "1", "--b", "1", "--bogus", "2")
        self.assertEqual(code, 1)
        self.assertEqual(len(err.splitlines()), 1)

    def test_unknown_subcommand(self):
        code, _, _ = self.lab("plot")
        self.assertEqual(code, 1)

    def test_out_of_range_geometry(self):
        with self.assertLogs("apps.commando", "ERROR"):
            code, out, err = self.lab("energy", "--a", "1e-5", "--b", "1")
        self.assertEqual(code, 1)
        self.assertEqual(out, "")
        self.assertIn("outside", err)

    def test_invalid_inputs(self):
        for argv in (
            ("force", "--a", "-1", "--b", "1"),
            ("force", "--a", "12", "--b", "1", "--L", "10"),
            ("sweep", "--ratio-min", "2", "--ratio-max", "1", "--points", "3"),
            ("critical-ratio", "--tol", "0.5"),
            ("energy", "--a", "1", "--b", "1", "--rel-tol", "2"),
            ("cutoff-verify", "--lambdas", "20,abc"),
        ):
            with self.assertLogs("apps.commando", "ERROR"):
                code, _, _ = self.lab(*argv)
            self.assertEqual(code, 1, argv)

    def test_non_convergence(self):
        failing = mock.Mock(side_effect=SeriesBudgetExceeded("budget", estimate=1.0))
        with mock.patch("apps.commando.records.force_infinite", failing):
            with self.assertLogs("apps.commando", "ERROR"):
                code, out, err = self.lab("force", "--a", "1", "--b", "1")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("non-convergence", err)

    def test_non_finite_output(self):
        nan_force = ForceValue(value=math.nan, route="asym_large_a")
        with mock.patch("apps.commando.records.force_asym_large_a", return_value=nan_force):
            with self.assertLogs("apps.commando", "ERROR"):
                code, out, _ = self.lab("force", "--a", "1", "--b", "1", "--format", "json")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")

    def test_selftest_failure(self):
        def failing():
            selftest.expect(False, "forced")

        checks = [selftest.Check("forced failure", failing)]
        with mock.patch.object(selftest, "CHECKS", checks):
            with self.assertLogs("apps.commando", "ERROR"):
                code, out, _ = self.lab("selftest")
        self.assertEqual(code, 3)
        self.assertIn("FAIL  forced failure: forced", out)

    def test_call_command_raises_with_return_code(self):
        with self.assertRaises(CommandError) as ctx, self.assertLogs("apps.commando", "ERROR"):
            call_command("lab", "critical-ratio", "--tol", "1e-12", stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
