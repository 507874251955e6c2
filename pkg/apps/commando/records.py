"""Flat records emitted by the ``lab`` command and their CSV/JSON encodings.

Floats are written with ``repr``, the shortest decimal string that parses
back to the same double, so emitted files round-trip exactly.
"""

import csv
import io
import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, fields
from typing import TypeVar

import numpy as np

from apps.casimir.energy import energy_ar
from apps.casimir.force import (
    force_alt,
    force_asym_large_a,
    force_asym_small_a,
    force_infinite,
)
from apps.casimir.geometry import RATIO_MAX, RATIO_MIN, ForceValue, Geometry
from apps.cutofflab.counterterms import FitReport
from apps.epstein.series import SeriesControl
from helpers import ArgumentRangeError, ConvergenceError, DomainError, SeriesBudgetExceeded

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json")
SPACINGS = ("linear", "log")

Record = TypeVar("Record")


# ==========================
# Sweep grid
# ==========================


@dataclass(frozen=True)
class SweepSpec:
    """Grid of aspect ratios a/b at fixed b."""

    ratio_min: float
    ratio_max: float
    points: int
    spacing: str = "linear"
    b_fixed: float = 1.0

    def __post_init__(self):
        if not self.ratio_min < self.ratio_max:
            raise DomainError(
                f"ratio-min must be below ratio-max, got {self.ratio_min} and {self.ratio_max}"
            )
        if self.points < 2:
            raise DomainError(f"a sweep needs at least 2 points, got {self.points}")
        if self.spacing not in SPACINGS:
            raise DomainError(f"unknown spacing {self.spacing!r}, expected one of {SPACINGS}")
        if not (self.b_fixed > 0.0 and math.isfinite(self.b_fixed)):
            raise DomainError(f"b must be a positive finite length, got {self.b_fixed}")
        if self.ratio_min < RATIO_MIN or self.ratio_max > RATIO_MAX:
            raise ArgumentRangeError(
                f"sweep ratios must lie in [{RATIO_MIN:g}, {RATIO_MAX:g}], "
                f"got [{self.ratio_min:g}, {self.ratio_max:g}]"
            )

    def ratios(self) -> list[float]:
        if self.spacing == "log":
            grid = np.geomspace(self.ratio_min, self.ratio_max, self.points)
        else:
            grid = np.linspace(self.ratio_min, self.ratio_max, self.points)
        return [float(r) for r in grid]

    def geometries(self) -> list[Geometry]:
        return [Geometry(r * self.b_fixed, self.b_fixed) for r in self.ratios()]


# ==========================
# Records
# ==========================


@dataclass(frozen=True)
class OutputRecord:
    """Energy and every L → ∞ force route at one geometry.

    ``preferred_force_route`` names the exact series whose Bessel arguments
    stay above 2π; ``advisories`` joins the warnings of routes evaluated
    outside their fast regime with ``;``. The other exact series is left
    empty (None) when it exhausts its term budget.
    """

    a: float
    b: float
    ratio: float
    energy_total: float
    energy_tail_bound: float
    force_eq11: float | None
    force_eq11_tail_bound: float | None
    force_eq14: float | None
    force_eq14_tail_bound: float | None
    force_asym_small: float
    force_asym_large: float
    energy_route: str
    preferred_force_route: str
    advisories: str = ""


@dataclass(frozen=True)
class PistonForceRecord:
    """Finite-box piston force next to its finite-difference oracle."""

    L: float
    a: float
    b: float
    force_finite_L: float
    force_finite_L_tail_bound: float
    force_finite_difference: float
    force_finite_difference_error: float


@dataclass(frozen=True)
class CriticalRatioRecord:
    root: float
    bracket_low: float
    bracket_high: float
    iterations: int
    tol: float
    reference: float


@dataclass(frozen=True)
class FitRecord:
    """One (scale, geometry) row of the cutoff-verification campaign.

    The fitted coefficients repeat on every row of a scale; ``residual`` is
    the fit leftover at (a, b).
    """

    scale: float
    family: str
    a: float
    b: float
    residual: float
    c1_fit: float
    c2_fit: float
    c1_quadrature: float
    c2_quadrature: float
    c1_ratio: float
    c2_ratio: float
    c3_aspect: float
    max_residual: float


def build_record(
    g: Geometry, ctrl: SeriesControl, energy_route: str = "bessel_series"
) -> OutputRecord:
    """Evaluate the energy and every applicable force route at ``g``.

    The preferred exact series must converge. The other one is a cross
    check; if it runs out of terms its fields stay None and the reason is
    added to ``advisories``.

    Raises:
        ConvergenceError: If the energy or the preferred route fails
    """
    energy = energy_ar(g, energy_route, ctrl)
    routes: dict[str, ForceValue | None] = {}
    skipped = []
    if g.a >= g.b:
        preferred, fallback = ("eq11", force_infinite), ("eq14", force_alt)
    else:
        preferred, fallback = ("eq14", force_alt), ("eq11", force_infinite)

    routes[preferred[0]] = preferred[1](g, ctrl)
    try:
        routes[fallback[0]] = fallback[1](g, ctrl)
    except SeriesBudgetExceeded as exc:
        logger.warning(f"{fallback[0]} skipped at a/b = {g.ratio:g}: {exc}")
        routes[fallback[0]] = None
        skipped.append(f"{fallback[0]} did not converge at a/b = {g.ratio:g}")

    eq11, eq14 = routes["eq11"], routes["eq14"]
    advisories = [route.advisory for route in (eq11, eq14) if route and route.advisory]
    return OutputRecord(
        a=g.a,
        b=g.b,
        ratio=g.ratio,
        energy_total=energy.total,
        energy_tail_bound=energy.tail_bound,
        force_eq11=None if eq11 is None else eq11.value,
        force_eq11_tail_bound=None if eq11 is None else eq11.tail_bound,
        force_eq14=None if eq14 is None else eq14.value,
        force_eq14_tail_bound=None if eq14 is None else eq14.tail_bound,
        force_asym_small=force_asym_small_a(g).value,
        force_asym_large=force_asym_large_a(g).value,
        energy_route=energy.route,
        preferred_force_route=preferred[0],
        advisories=";".join(advisories + skipped),
    )


def fit_records(report: FitReport, family: str) -> list[FitRecord]:
    """Flatten a counterterm fit into one row per geometry."""
    return [
        FitRecord(
            scale=report.scale,
            family=family,
            a=g.a,
            b=g.b,
            residual=residual,
            c1_fit=report.c1_fit,
            c2_fit=report.c2_fit,
            c1_quadrature=report.c1_quad,
            c2_quadrature=report.c2_quad,
            c1_ratio=report.c1_ratio,
            c2_ratio=report.c2_ratio,
            c3_aspect=report.c3_aspect,
            max_residual=report.max_residual,
        )
        for g, residual in report.residuals
    ]


def require_finite(record) -> None:
    """Raise ConvergenceError if any float field of ``record`` is NaN or ±inf."""
    for field in fields(record):
        value = getattr(record, field.name)
        if isinstance(value, float) and not math.isfinite(value):
            raise ConvergenceError(
                f"non-finite {field.name} = {value!r} in {type(record).__name__}",
                estimate=value,
            )


# ==========================
# Encoders
# ==========================


def _encode(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def to_csv(records: Sequence) -> str:
    """Header row of field names followed by one row per record, LF endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if records:
        writer.writerow([field.name for field in fields(records[0])])
    for record in records:
        require_finite(record)
        writer.writerow([_encode(getattr(record, field.name)) for field in fields(record)])
    return buffer.getvalue()


def to_json(records: Sequence) -> str:
    """Flat array of objects keyed by field name; NaN and ±inf are refused."""
    for record in records:
        require_finite(record)
    return json.dumps([asdict(record) for record in records], indent=2, allow_nan=False) + "\n"


def render(records: Sequence, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(records)
    if fmt == "json":
        return to_json(records)
    raise DomainError(f"unknown output format {fmt!r}, expected one of {OUTPUT_FORMATS}")


def _optional_float(raw: str) -> float | None:
    return None if raw == "" else float(raw)


def _decoder(field_type):
    if field_type == float | None:
        return _optional_float
    return field_type


def from_csv(text: str, record_type: type[Record]) -> list[Record]:
    """Parse CSV produced by :func:`to_csv` back into ``record_type``."""
    converters = {field.name: _decoder(field.type) for field in fields(record_type)}
    rows: Iterable[dict[str, str]] = csv.DictReader(io.StringIO(text))
    return [
        record_type(**{name: converters[name](raw) for name, raw in row.items()})
        for row in rows
    ]
