"""
Conserved and variational functionals.

Notation for the norm quantities of a field phi:
    g = ||grad phi||^2,  p = ||phi||_6^6,  q = ||phi||_4^4,  l2 = ||phi||_2^2

    M   = l2 / 2
    E   = g/2 - p/6 + q/4          E^c = g/2 - p/6
    K   = 2g - 2p + 3q/2           (d/dlam of E along the (3,-2) flow)
    K^Q = 2g,  K^N = -2p + 3q/2,   K^c = 2g - 2p
    H   = E - K/6 = (g + p)/6

Every function accepts a RadialField (grid quadrature) or an AnalyticProfile
(exact norms).
"""

import logging
import math
from dataclasses import dataclass
from functools import singledispatch
from typing import Union

from pydantic import BaseModel, ConfigDict

from ..exceptions import InternalConsistencyError, PreconditionError
from .grid import RadialField, boundary_mass_fraction, gradient_norm_sq, power_norm, scale_field
from .profiles import AnalyticProfile

logger = logging.getLogger(__name__)

MU_BAR = 6.0
MU_UNDERLINE = 0.0

IDENTITY_TOLERANCE = 1e-10

FieldLike = Union[RadialField, AnalyticProfile]


@dataclass(frozen=True)
class NormQuantities:
    l2: float
    grad: float
    l4: float
    l6: float
    boundary_mass_fraction: float = 0.0

    def scaled(self, lam: float, amplitude_exponent: int = 3) -> "NormQuantities":
        """Exact norms of e^{a lam} phi(e^{2 lam} x)."""
        a = amplitude_exponent
        return NormQuantities(
            l2=self.l2 * math.exp((2 * a - 6) * lam),
            grad=self.grad * math.exp((2 * a - 2) * lam),
            l4=self.l4 * math.exp((4 * a - 6) * lam),
            l6=self.l6 * math.exp((6 * a - 6) * lam),
            boundary_mass_fraction=self.boundary_mass_fraction,
        )


@singledispatch
def norm_quantities(obj) -> NormQuantities:
    raise TypeError(f"cannot evaluate functionals of {type(obj).__name__}")


@norm_quantities.register
def _(field: RadialField) -> NormQuantities:
    return NormQuantities(
        l2=power_norm(field, 2),
        grad=gradient_norm_sq(field),
        l4=power_norm(field, 4),
        l6=power_norm(field, 6),
        boundary_mass_fraction=boundary_mass_fraction(field),
    )


@norm_quantities.register
def _(profile: AnalyticProfile) -> NormQuantities:
    norms = profile.norms()
    return NormQuantities(l2=norms.l2, grad=norms.grad, l4=norms.l4, l6=norms.l6)


# ── Scalar functionals ────────────────────────────────────────────────────────


def _energy(n: NormQuantities) -> float:
    return 0.5 * n.grad - n.l6 / 6.0 + 0.25 * n.l4


def _k(n: NormQuantities) -> float:
    return 2.0 * n.grad - 2.0 * n.l6 + 1.5 * n.l4


def mass(obj: FieldLike) -> float:
    return 0.5 * norm_quantities(obj).l2


def energy(obj: FieldLike) -> float:
    return _energy(norm_quantities(obj))


def critical_energy(obj: FieldLike) -> float:
    n = norm_quantities(obj)
    return 0.5 * n.grad - n.l6 / 6.0


def k_functional(obj: FieldLike) -> float:
    return _k(norm_quantities(obj))


def k_quadratic(obj: FieldLike) -> float:
    return 2.0 * norm_quantities(obj).grad


def k_nonlinear(obj: FieldLike) -> float:
    n = norm_quantities(obj)
    return -2.0 * n.l6 + 1.5 * n.l4


def k_critical(obj: FieldLike) -> float:
    n = norm_quantities(obj)
    return 2.0 * n.grad - 2.0 * n.l6


def h_functional(obj: FieldLike) -> float:
    n = norm_quantities(obj)
    return (n.grad + n.l6) / 6.0


def k_along_flow(norms: NormQuantities, lam: float) -> float:
    """K(phi^lam_{3,-2}) = 2 e^{4 lam} g - 2 e^{12 lam} p + 1.5 e^{6 lam} q."""
    return (
        2.0 * math.exp(4.0 * lam) * norms.grad
        - 2.0 * math.exp(12.0 * lam) * norms.l6
        + 1.5 * math.exp(6.0 * lam) * norms.l4
    )


def k_along_flow_derivative(norms: NormQuantities, lam: float) -> float:
    return (
        8.0 * math.exp(4.0 * lam) * norms.grad
        - 24.0 * math.exp(12.0 * lam) * norms.l6
        + 9.0 * math.exp(6.0 * lam) * norms.l4
    )


# ── Report ────────────────────────────────────────────────────────────────────


class FunctionalReport(BaseModel):
    """All conserved and variational scalars of one field."""

    model_config = ConfigDict(frozen=True)

    mass: float
    energy: float
    critical_energy: float
    K: float
    K_Q: float
    K_N: float
    K_c: float
    H: float
    l2_norm_sq: float
    grad_norm_sq: float
    l4_norm_4: float
    l6_norm_6: float
    boundary_mass_fraction: float

    @classmethod
    def from_norms(cls, n: NormQuantities) -> "FunctionalReport":
        k_q = 2.0 * n.grad
        k_n = -2.0 * n.l6 + 1.5 * n.l4
        return cls(
            mass=0.5 * n.l2,
            energy=_energy(n),
            critical_energy=0.5 * n.grad - n.l6 / 6.0,
            K=k_q + k_n,
            K_Q=k_q,
            K_N=k_n,
            K_c=2.0 * n.grad - 2.0 * n.l6,
            H=(n.grad + n.l6) / 6.0,
            l2_norm_sq=n.l2,
            grad_norm_sq=n.grad,
            l4_norm_4=n.l4,
            l6_norm_6=n.l6,
            boundary_mass_fraction=n.boundary_mass_fraction,
        )

    @property
    def scale(self) -> float:
        return max(1e-300, self.grad_norm_sq + self.l6_norm_6 + self.l4_norm_4)

    def identity_residuals(self) -> dict:
        """Relative residuals of the three algebraic identities."""
        g, p, q = self.grad_norm_sq, self.l6_norm_6, self.l4_norm_4
        s = self.scale
        return {
            "energy": abs(self.energy - (0.5 * g - p / 6.0 + 0.25 * q)) / s,
            "structure": abs(MU_BAR * self.energy - self.K - (g + p)) / s,
            "free_energy": abs(self.H - (self.energy - self.K / MU_BAR)) / s,
        }

    def check_identities(self, tolerance: float = IDENTITY_TOLERANCE) -> None:
        for name, residual in self.identity_residuals().items():
            if residual > tolerance:
                raise InternalConsistencyError(name, residual, tolerance)


def functional_report(obj: FieldLike, check: bool = True) -> FunctionalReport:
    """Fill a FunctionalReport and enforce its identities."""
    report = FunctionalReport.from_norms(norm_quantities(obj))
    if check:
        report.check_identities()
    if report.boundary_mass_fraction > 1e-6:
        logger.warning(
            "Boundary shell carries %.3e of the mass; domain may be too small",
            report.boundary_mass_fraction,
        )
    return report


# ── Scaling derivative ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ScalingDerivativeCheck:
    k: float
    finite_difference: float
    delta: float

    @property
    def discrepancy(self) -> float:
        return abs(self.k - self.finite_difference)


def scaling_derivative_check(obj: FieldLike, delta: float) -> ScalingDerivativeCheck:
    """
    Compare K with the centered difference of lam -> E(phi^lam_{3,-2}) at 0.

    The rescalings are applied to the field itself (exactly for analytic
    inputs, by resampling otherwise), not through the norm scaling laws.
    """
    if not 0.0 < delta <= 0.1:
        raise PreconditionError(f"delta must lie in (0, 0.1], got {delta}")
    if isinstance(obj, AnalyticProfile):
        plus, minus = obj.scaled(delta, 3), obj.scaled(-delta, 3)
    else:
        plus, minus = scale_field(obj, delta, 3), scale_field(obj, -delta, 3)
    fd = (energy(plus) - energy(minus)) / (2.0 * delta)
    return ScalingDerivativeCheck(k=k_functional(obj), finite_difference=fd, delta=delta)
