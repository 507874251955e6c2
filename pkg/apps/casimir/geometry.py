"""Value types shared by the energy, force and tension computations.

Lengths are in the caller's unit with ħ = c = 1: energies come out in
1/length, forces in 1/length².
"""

import math
from dataclasses import dataclass
from typing import Literal

from helpers import ArgumentRangeError, DomainError

RATIO_MIN = 1e-4
RATIO_MAX = 1e4

EnergyRoute = Literal["zeta_reflection", "bessel_series"]
ForceRoute = Literal[
    "eq11", "eq14", "finite_difference", "asym_large_a", "asym_small_a", "finite_L"
]
ENERGY_ROUTES = ("zeta_reflection", "bessel_series")


def _require_length(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite length, got {value}")


@dataclass(frozen=True)
class Geometry:
    """One rectangular Dirichlet compartment with sides a (horizontal,
    the piston distance) and b (vertical)."""

    a: float
    b: float

    def __post_init__(self):
        _require_length("a", self.a)
        _require_length("b", self.b)

    @property
    def ratio(self) -> float:
        return self.a / self.b

    def swapped(self) -> "Geometry":
        return Geometry(self.b, self.a)

    def scaled(self, factor: float) -> "Geometry":
        return Geometry(factor * self.a, factor * self.b)

    def require_admissible(self) -> None:
        """Reject aspect ratios whose exponential factors are meaningless in
        double precision."""
        if not RATIO_MIN <= self.ratio <= RATIO_MAX:
            raise ArgumentRangeError(
                f"aspect ratio a/b = {self.ratio:g} outside [{RATIO_MIN:g}, {RATIO_MAX:g}]"
            )


@dataclass(frozen=True)
class PistonGeometry:
    """An L×b box split by a piston at distance a from the left wall."""

    L: float
    a: float
    b: float

    def __post_init__(self):
        _require_length("L", self.L)
        _require_length("b", self.b)
        if not 0.0 < self.a < self.L:
            raise DomainError(
                f"piston position must satisfy 0 < a < L, got a={self.a}, L={self.L}"
            )

    @property
    def left(self) -> Geometry:
        return Geometry(self.a, self.b)

    @property
    def right(self) -> Geometry:
        return Geometry(self.L - self.a, self.b)

    def mirrored(self) -> "PistonGeometry":
        return PistonGeometry(self.L, self.L - self.a, self.b)


@dataclass(frozen=True)
class EnergyBreakdown:
    edge_term: float
    bulk_term: float
    interaction_series: float
    total: float
    route: EnergyRoute
    tail_bound: float = 0.0


@dataclass(frozen=True)
class ForceValue:
    """A piston force with its certified truncation remainder.

    ``advisory`` is set when the route was evaluated outside the regime in
    which it converges quickly or approximates well.
    """

    value: float
    route: ForceRoute
    tail_bound: float = 0.0
    advisory: str | None = None
