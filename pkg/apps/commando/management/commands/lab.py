"""Django management command driving the Casimir piston laboratory."""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.casimir.force import force_fd_oracle, force_finite_L
from apps.casimir.geometry import Geometry, PistonGeometry
from apps.casimir.tension import solve_critical_ratio
from apps.commando.records import (
    OUTPUT_FORMATS,
    SPACINGS,
    CriticalRatioRecord,
    PistonForceRecord,
    SweepSpec,
    build_record,
    fit_records,
    render,
)
from apps.commando.selftest import run_checks
from apps.cutofflab.counterterms import fit_counterterms
from apps.cutofflab.cutoff import CUTOFF_FAMILIES, CutoffSpec
from apps.epstein.series import SeriesControl
from apps.specfun.quadrature import ToleranceSpec
from helpers import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# command-line route names
ENERGY_ROUTE_NAMES = {"series": "bessel_series", "zeta": "zeta_reflection"}

EXIT_INPUT_ERROR = 1
EXIT_NON_CONVERGENCE = 2
EXIT_SELFTEST_FAILURE = 3


class Command(BaseCommand):
    """Evaluate Casimir energies, forces and the cutoff campaign."""

    help = (
        "Casimir piston laboratory for a 2D Dirichlet scalar field. "
        "Natural units (hbar = c = 1): lengths in the unit of the inputs, "
        "energies in 1/length, forces in 1/length^2."
    )

    def add_arguments(self, parser):
        """Register one subparser per laboratory operation."""
        subparsers = parser.add_subparsers(
            dest="subcommand", required=True, metavar="subcommand"
        )

        energy = subparsers.add_parser("energy", help="Energy and forces of one a×b box")
        self._add_geometry_arguments(energy)
        energy.add_argument(
            "--route",
            choices=sorted(ENERGY_ROUTE_NAMES),
            default="series",
            help="Energy route: Bessel double series or Epstein zeta reflection",
        )
        self._add_output_arguments(energy)

        force = subparsers.add_parser("force", help="Piston force by every applicable route")
        self._add_geometry_arguments(force)
        force.add_argument(
            "--L",
            type=float,
            default=None,
            help="Box length; omit for the semi-infinite (L -> infinity) piston",
        )
        self._add_output_arguments(force)

        sweep = subparsers.add_parser("sweep", help="Records over a grid of aspect ratios a/b")
        sweep.add_argument("--ratio-min", type=float, required=True)
        sweep.add_argument("--ratio-max", type=float, required=True)
        sweep.add_argument("--points", type=int, required=True)
        sweep.add_argument("--spacing", choices=SPACINGS, default="linear")
        sweep.add_argument("--b", type=float, default=1.0, help="Fixed side b")
        sweep.add_argument(
            "--workers",
            type=int,
            default=None,
            help="Worker threads (default: LAB_SWEEP_WORKERS)",
        )
        self._add_output_arguments(sweep)

        critical = subparsers.add_parser(
            "critical-ratio", help="Aspect ratio at which the tension changes sign"
        )
        critical.add_argument("--tol", type=float, default=1e-6)
        self._add_output_arguments(critical)

        cutoff = subparsers.add_parser(
            "cutoff-verify", help="Counterterm fit of the cutoff energy per scale"
        )
        cutoff.add_argument(
            "--lambdas",
            default=None,
            help='Comma-separated cutoff scales, e.g. "20,40,60" (default: LAB_CUTOFF_LAMBDAS)',
        )
        cutoff.add_argument("--family", choices=CUTOFF_FAMILIES, default="default")
        self._add_output_arguments(cutoff)

        selftest = subparsers.add_parser("selftest", help="Check the laboratory invariants")
        selftest.add_argument(
            "--skip-slow",
            action="store_true",
            help="Skip the lattice-sum and counterterm-fit checks",
        )

    def handle(self, *args: Any, **options: Any) -> None:
        """Dispatch to the subcommand and map failures to exit codes.

        Raises:
            CommandError: With returncode 1 for invalid input, 2 for
                numerical non-convergence and 3 for a failing self-test
        """
        subcommand = options["subcommand"]
        handler = getattr(self, f"_handle_{subcommand.replace('-', '_')}")
        try:
            handler(options)
        except ConvergenceError as exc:
            logger.error(f"lab {subcommand} did not converge: {exc}", exc_info=True)
            raise CommandError(
                f"numerical non-convergence: {exc}", returncode=EXIT_NON_CONVERGENCE
            ) from exc
        except (ValueError, OSError) as exc:
            logger.error(f"lab {subcommand} rejected its input: {exc}", exc_info=True)
            raise CommandError(
                f"invalid input: {exc}", returncode=EXIT_INPUT_ERROR
            ) from exc

    # ==========================
    # Subcommands
    # ==========================

    def _handle_energy(self, options: dict[str, Any]) -> None:
        g = Geometry(options["a"], options["b"])
        route = ENERGY_ROUTE_NAMES[options["route"]]
        self._emit([build_record(g, self._series_control(options), route)], options)

    def _handle_force(self, options: dict[str, Any]) -> None:
        ctrl = self._series_control(options)
        if options["L"] is None:
            g = Geometry(options["a"], options["b"])
            self._emit([build_record(g, ctrl)], options)
            return

        pg = PistonGeometry(options["L"], options["a"], options["b"])
        exact = force_finite_L(pg, ctrl)
        oracle = force_fd_oracle(pg, ctrl)
        record = PistonForceRecord(
            L=pg.L,
            a=pg.a,
            b=pg.b,
            force_finite_L=exact.value,
            force_finite_L_tail_bound=exact.tail_bound,
            force_finite_difference=oracle.value,
            force_finite_difference_error=oracle.tail_bound,
        )
        self._emit([record], options)

    def _handle_sweep(self, options: dict[str, Any]) -> None:
        grid = SweepSpec(
            ratio_min=options["ratio_min"],
            ratio_max=options["ratio_max"],
            points=options["points"],
            spacing=options["spacing"],
            b_fixed=options["b"],
        )
        workers = self._option_or_setting(options, "workers", "LAB_SWEEP_WORKERS")
        if workers < 1:
            raise DomainError(f"workers must be at least 1, got {workers}")
        evaluate = partial(build_record, ctrl=self._series_control(options))

        logger.info(f"sweep of {grid.points} points on {workers} workers")
        # map() yields in grid order whatever the completion order
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(evaluate, grid.geometries()))
        self._emit(records, options)

    def _handle_critical_ratio(self, options: dict[str, Any]) -> None:
        result = solve_critical_ratio(options["tol"], self._series_control(options))
        record = CriticalRatioRecord(
            root=result.root,
            bracket_low=result.bracket[0],
            bracket_high=result.bracket[1],
            iterations=result.iterations,
            tol=options["tol"],
            reference=settings.LAB_CRITICAL_RATIO_REFERENCE,
        )
        self._emit([record], options)

    def _handle_cutoff_verify(self, options: dict[str, Any]) -> None:
        scales = self._parse_scales(options["lambdas"])
        geometries = [Geometry(a, b) for a, b in settings.LAB_CUTOFF_GEOMETRIES]
        ctrl = self._series_control(options)
        tol = self._tolerance(options)

        records = []
        for scale in scales:
            report = fit_counterterms(
                geometries, CutoffSpec(scale, options["family"]), tol, ctrl
            )
            records.extend(fit_records(report, options["family"]))
        self._emit(records, options)

    def _handle_selftest(self, options: dict[str, Any]) -> None:
        outcomes = run_checks(include_slow=not options["skip_slow"])
        for outcome in outcomes:
            if outcome.passed:
                self.stdout.write(self.style.SUCCESS(f"PASS  {outcome.name}"))
            else:
                self.stdout.write(self.style.ERROR(f"FAIL  {outcome.name}: {outcome.detail}"))

        failed = sum(not outcome.passed for outcome in outcomes)
        self.stdout.write("=" * 60)
        if failed:
            raise CommandError(
                f"{failed} of {len(outcomes)} self-test checks failed",
                returncode=EXIT_SELFTEST_FAILURE,
            )
        self.stdout.write(self.style.SUCCESS(f"All {len(outcomes)} self-test checks passed"))

    # ==========================
    # Helpers
    # ==========================

    def _add_geometry_arguments(self, parser) -> None:
        parser.add_argument("--a", type=float, required=True, help="Piston distance a")
        parser.add_argument("--b", type=float, required=True, help="Transverse side b")

    def _add_output_arguments(self, parser) -> None:
        parser.add_argument("--format", choices=OUTPUT_FORMATS, default="csv")
        parser.add_argument(
            "--output", default=None, help="Write to FILE instead of standard output"
        )
        parser.add_argument(
            "--rel-tol",
            type=float,
            default=None,
            help="Relative tolerance for series and quadrature (default: settings)",
        )

    def _option_or_setting(self, options: dict[str, Any], name: str, setting: str) -> Any:
        if options[name] is None:
            return getattr(settings, setting)
        return options[name]

    def _series_control(self, options: dict[str, Any]) -> SeriesControl:
        return SeriesControl(
            rel_tol=self._option_or_setting(options, "rel_tol", "LAB_SERIES_REL_TOL"),
            max_outer_terms=settings.LAB_SERIES_MAX_TERMS,
            max_inner_terms=settings.LAB_SERIES_MAX_TERMS,
        )

    def _tolerance(self, options: dict[str, Any]) -> ToleranceSpec:
        return ToleranceSpec(
            rel_tol=self._option_or_setting(options, "rel_tol", "LAB_QUAD_REL_TOL"),
            max_evals=settings.LAB_QUAD_MAX_EVALS,
        )

    def _parse_scales(self, text: str | None) -> list[float]:
        """Parse "20,40,60" into cutoff scales.

        Raises:
            DomainError: If an entry is not a number
        """
        if text is None:
            return list(settings.LAB_CUTOFF_LAMBDAS)
        try:
            scales = [float(item) for item in text.split(",") if item.strip()]
        except ValueError:
            raise DomainError(f"--lambdas must be comma-separated numbers, got {text!r}")
        if not scales:
            raise DomainError("--lambdas names no cutoff scale")
        return scales

    def _emit(self, records: list, options: dict[str, Any]) -> None:
        """Render ``records`` and send them to --output or standard output."""
        text = render(records, options["format"])
        if options["output"] is None:
            self.stdout.write(text, ending="")
            return

        out_path = Path(options["output"])
        out_path.write_text(text, encoding="utf-8", newline="")
        self.stdout.write(
            self.style.SUCCESS(f"Wrote {len(records)} records to {out_path}")
        )
