"""Smooth cutoff functions for the regularized mode sum.

A cutoff damps the mode sum with D_Λ(z, w) = d(z)·d(w), where d is positive,
decreasing on [0, ∞), tends to 1 pointwise as Λ → ∞ and decays at least
like t⁻⁴.
"""

import math
from dataclasses import dataclass

import numpy as np

from helpers import DomainError, UnsupportedArgumentError

CUTOFF_FAMILIES = ("default", "gaussian")


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff of scale Λ from one of the supported families.

    ``default``: d(t) = [1 + (t+1)²/Λ²]⁻²
    ``gaussian``: d(t) = exp(-t²/Λ²)

    The evaluators accept floats or numpy arrays.
    """

    scale: float
    family: str = "default"

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise DomainError(f"cutoff scale must be positive and finite, got {self.scale}")
        if self.family not in CUTOFF_FAMILIES:
            raise UnsupportedArgumentError(
                f"unknown cutoff family {self.family!r}, expected one of {CUTOFF_FAMILIES}"
            )

    def d(self, t):
        if self.family == "gaussian":
            return np.exp(-((t / self.scale) ** 2))
        u = ((t + 1.0) / self.scale) ** 2
        return 1.0 / (1.0 + u) ** 2

    def derivative(self, t):
        if self.family == "gaussian":
            return -2.0 * t / self.scale**2 * self.d(t)
        u = ((t + 1.0) / self.scale) ** 2
        return -4.0 * (t + 1.0) / (self.scale**2 * (1.0 + u) ** 3)

    def D(self, z, w):
        return self.d(z) * self.d(w)

    def with_scale(self, scale: float) -> "CutoffSpec":
        return CutoffSpec(scale, self.family)
