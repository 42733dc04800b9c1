"""
Smooth radial cutoffs.

A single quintic ramp S(t) = 10t^3 - 15t^4 + 6t^5 drives every plateau
function in the package: the data cutoff chi, the Littlewood-Paley symbol
and the bump virial weight. S has vanishing first and second derivatives at
both ends, so every cutoff built from it is C^2 across its joins.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from ..exceptions import RangeError
from ..validators import ParameterValidator

SMOOTHSTEP = Polynomial([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])
_RAMP_DERIVATIVES = [SMOOTHSTEP.deriv(k) for k in range(5)]


def smooth_cutoff(rho, derivative: int = 0) -> np.ndarray:
    """
    chi(rho) = 1 on [0, 1], 1 - S(rho - 1) on [1, 2], 0 beyond.

    Args:
        rho: Non-negative argument (array-like)
        derivative: Order of the derivative in rho (0..4)
    """
    if not 0 <= derivative <= 4:
        raise RangeError(f"derivative order must be in 0..4, got {derivative}")
    rho = np.asarray(rho, dtype=float)
    ramp = (rho > 1.0) & (rho < 2.0)
    out = np.where(ramp, -_RAMP_DERIVATIVES[derivative](rho - 1.0), 0.0)
    if derivative == 0:
        out = np.where(ramp, 1.0 + out, np.where(rho <= 1.0, 1.0, 0.0))
    return out


@dataclass(frozen=True)
class CutoffSpec:
    """chi_R(x) = chi(|x| / R): equal to 1 on |x| <= R and 0 on |x| >= 2R."""

    R: float

    def __post_init__(self):
        ParameterValidator.positive("cutoff radius", self.R)

    def __call__(self, r) -> np.ndarray:
        return smooth_cutoff(np.asarray(r, dtype=float) / self.R)

    def derivative(self, r) -> np.ndarray:
        return smooth_cutoff(np.asarray(r, dtype=float) / self.R, 1) / self.R

    @property
    def support_radius(self) -> float:
        return 2.0 * self.R
