"""Truncation control for the exponentially convergent double series.

Every Bessel double sum in the laboratory has the form
Σ_{j≥1} Σ_{k≥1} t(j, k) with |t| decaying exponentially in both indices.
``double_series`` sums it row by row and certifies the discarded remainder
with a geometric bound built from the observed decay ratio.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

from helpers import DomainError, SeriesBudgetExceeded

logger = logging.getLogger(__name__)

# inner loop stops at rel_tol·|partial|·INNER_STOP_FACTOR
INNER_STOP_FACTOR = 1e-2


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for lattice and Bessel double sums.

    Attributes:
        rel_tol: Target relative accuracy of the accumulated value
        max_outer_terms: Budget for the outer index (rows, or lattice radius
            doublings for the direct sum)
        max_inner_terms: Budget for the inner index within a row
    """

    rel_tol: float = 1e-12
    max_outer_terms: int = 2000
    max_inner_terms: int = 2000

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_outer_terms < 1 or self.max_inner_terms < 1:
            raise DomainError("term budgets must be at least 1")


@dataclass(frozen=True)
class SeriesResult:
    value: float
    tail_bound: float
    terms: int


def geometric_tail(last: float, previous: float) -> float:
    """Bound on Σ_{n>N} |t_n| from the last two terms, assuming the ratio
    |t_N/t_{N-1}| does not increase further."""
    last = abs(last)
    previous = abs(previous)
    if last == 0.0:
        return 0.0
    if previous == 0.0:
        return last
    ratio = last / previous
    if ratio >= 1.0:
        return math.inf
    return last * ratio / (1.0 - ratio)


def _sum_row(
    term: Callable[[int, int], float],
    j: int,
    scale: float,
    ctrl: SeriesControl,
) -> tuple[list[float], float]:
    """Σ_k term(j, k) for one row; returns the terms and a tail bound."""
    values: list[float] = []
    previous = 0.0
    for k in range(1, ctrl.max_inner_terms + 1):
        value = term(j, k)
        values.append(value)
        if value == 0.0:
            return values, 0.0
        magnitude = max(scale, abs(math.fsum(values)))
        if k > 1 and abs(value) < ctrl.rel_tol * magnitude * INNER_STOP_FACTOR:
            return values, geometric_tail(value, previous)
        previous = value
    partial = math.fsum(values)
    raise SeriesBudgetExceeded(
        f"row j={j} did not converge within {ctrl.max_inner_terms} terms",
        estimate=partial,
        error_bound=abs(values[-1]),
    )


def double_series(
    term: Callable[[int, int], float],
    ctrl: SeriesControl,
    scale: float = 0.0,
) -> SeriesResult:
    """Certified Σ_{j,k≥1} term(j, k).

    Rows are summed until their leading term falls below
    rel_tol·max(scale, |partial|); ``scale`` lets callers measure the
    truncation against the full quantity the series belongs to rather than
    against the (possibly tiny) series alone.

    Raises:
        SeriesBudgetExceeded: If either index budget runs out first.
    """
    accumulated: list[float] = []
    tail = 0.0
    terms = 0
    previous_lead = 0.0
    for j in range(1, ctrl.max_outer_terms + 1):
        row, row_tail = _sum_row(term, j, scale, ctrl)
        terms += len(row)
        accumulated.extend(row)
        tail += row_tail
        lead = row[0]
        if lead == 0.0:
            break
        magnitude = max(scale, abs(math.fsum(accumulated)))
        if j > 1 and abs(lead) < ctrl.rel_tol * magnitude:
            # unsummed rows: geometric bound on their leading terms, doubled
            # to cover the row bodies
            tail += 2.0 * geometric_tail(lead, previous_lead)
            break
        previous_lead = lead
    else:
        raise SeriesBudgetExceeded(
            f"double series did not converge within {ctrl.max_outer_terms} rows",
            estimate=math.fsum(accumulated),
            error_bound=abs(previous_lead),
        )

    value = math.fsum(accumulated)
    logger.debug(f"double series: {terms} terms, tail bound {tail:.3e}")
    return SeriesResult(value=value, tail_bound=tail, terms=terms)
