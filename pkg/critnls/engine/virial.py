"""
Localized virial quantities.

For a radial weight phi(r) and a radial solution u:

    V     = int phi |u|^2
    V'    = 2 Im int phi'(r) conj(u) u_r
    V''   = 4 int phi'' |u_r|^2 - int Δ^2 phi |u|^2
            - (4/3) int Δphi |u|^6 + int Δphi |u|^4

with Δphi = phi'' + 2 phi'/r and Δ^2 phi = phi'''' + 4 phi'''/r. For
phi = r^2 the last line collapses to 4K.

Weight families
    quadratic            phi = r^2
    quadratic_truncated  phi_R = R^2 phi(r/R); phi = rho^2 on [0, 1], constant
                         on [3, inf); on [1, 3] phi'' = 2 - 2S(t) - 280 t^3 (1-t)^3,
                         t = (rho - 1)/2, which keeps phi'' <= 2, matches C^2 at
                         both joins and returns phi' to 0 at rho = 3
    bump_truncated       phi_R = R^2 chi(r^2 / R^2) with the smooth cutoff chi
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import InternalConsistencyError, PreconditionError, RangeError
from .cutoff import SMOOTHSTEP, smooth_cutoff
from .grid import RadialField, RadialGrid, gradient_density, radial_derivative

if TYPE_CHECKING:
    from .diagnostics import TrajectoryRecord

logger = logging.getLogger(__name__)


class WeightFamily(str, enum.Enum):
    QUADRATIC = "quadratic"
    QUADRATIC_TRUNCATED = "quadratic_truncated"
    BUMP_TRUNCATED = "bump_truncated"


# phi'' on the transition, as a polynomial in t = (rho - 1) / 2
_T = Polynomial([0.0, 1.0])
_PSI = 2.0 - 2.0 * SMOOTHSTEP - 280.0 * _T**3 * (1.0 - _T) ** 3
# d/drho = (1/2) d/dt; phi' = 2 + int_1^rho phi'', phi = 1 + int_1^rho phi'
_DPHI = 2.0 + 2.0 * _PSI.integ()
_PHI = 1.0 + 2.0 * _DPHI.integ()
_D3PHI = 0.5 * _PSI.deriv()
_D4PHI = 0.25 * _PSI.deriv(2)
PLATEAU = float(_PHI(1.0))


def _quadratic_profile(rho: np.ndarray):
    """(phi, phi', phi'', phi''', phi'''') of the unit truncated weight."""
    t = np.clip((rho - 1.0) / 2.0, 0.0, 1.0)
    inner = rho <= 1.0
    outer = rho >= 3.0
    phi = np.where(inner, rho * rho, np.where(outer, PLATEAU, _PHI(t)))
    d1 = np.where(inner, 2.0 * rho, np.where(outer, 0.0, _DPHI(t)))
    d2 = np.where(inner, 2.0, np.where(outer, 0.0, _PSI(t)))
    d3 = np.where(inner | outer, 0.0, _D3PHI(t))
    d4 = np.where(inner | outer, 0.0, _D4PHI(t))
    return phi, d1, d2, d3, d4


@dataclass(frozen=True)
class WeightSet:
    """Samples of phi_R and its radial derivatives on a grid."""

    R: float
    family: WeightFamily
    grid: RadialGrid
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    laplacian: np.ndarray
    bilaplacian: np.ndarray

    @property
    def phi_max(self) -> float:
        return float(np.max(self.phi)) if self.phi.size else 0.0


def truncated_weight(R: Optional[float], family, grid: RadialGrid) -> WeightSet:
    """
    Build a weight family on the grid and verify its invariants.

    Raises:
        RangeError: If the weight's support does not fit inside r_max
        InternalConsistencyError: If a sampled invariant fails
    """
    family = WeightFamily(family)
    r = grid.r

    if family is WeightFamily.QUADRATIC:
        phi = r * r
        d1, d2 = 2.0 * r, np.full_like(r, 2.0)
        d3 = d4 = np.zeros_like(r)
        R_value = math.inf
    elif family is WeightFamily.QUADRATIC_TRUNCATED:
        if R is None or not R > 0 or 3.0 * R >= grid.r_max:
            raise RangeError(f"quadratic_truncated weight needs 0 < 3R < r_max, R={R}")
        rho = r / R
        phi, d1, d2, d3, d4 = _quadratic_profile(rho)
        phi, d1, d3, d4 = R * R * phi, R * d1, d3 / R, d4 / (R * R)
        R_value = float(R)
    else:
        if R is None or not R > 0 or 2.0 * R >= grid.r_max:
            raise RangeError(f"bump_truncated weight needs 0 < 2R < r_max, R={R}")
        s = (r / R) ** 2
        c1, c2, c3, c4 = (smooth_cutoff(s, k) for k in range(1, 5))
        phi = R * R * smooth_cutoff(s)
        d1 = 2.0 * r * c1
        d2 = 2.0 * c1 + 4.0 * s * c2
        d3 = 12.0 * r / R**2 * c2 + 8.0 * r**3 / R**4 * c3
        d4 = 12.0 / R**2 * c2 + 48.0 * r**2 / R**4 * c3 + 16.0 * r**4 / R**6 * c4
        R_value = float(R)

    laplacian = d2 + 2.0 * d1 / r
    bilaplacian = d4 + 4.0 * d3 / r
    weights = WeightSet(
        R=R_value,
        family=family,
        grid=grid,
        phi=phi,
        dphi=d1,
        d2phi=d2,
        laplacian=laplacian,
        bilaplacian=bilaplacian,
    )
    _verify(weights)
    return weights


def _verify(w: WeightSet) -> None:
    if w.family is WeightFamily.BUMP_TRUNCATED:
        return
    r = w.grid.r
    scale = max(1.0, w.R * w.R) if math.isfinite(w.R) else 1.0
    core = r <= w.R
    checks = {
        "phi = r^2 on r <= R": np.max(np.abs(w.phi[core] - r[core] ** 2), initial=0.0)
        / scale,
        "laplacian = 6 on r <= R": np.max(np.abs(w.laplacian[core] - 6.0), initial=0.0),
        "bilaplacian = 0 on r <= R": np.max(np.abs(w.bilaplacian[core]), initial=0.0),
        "phi'' <= 2": max(0.0, float(np.max(w.d2phi)) - 2.0),
    }
    if math.isfinite(w.R):
        flat = r >= 3.0 * w.R
        checks["derivatives vanish on r >= 3R"] = float(
            np.max(
                np.abs(np.concatenate([w.dphi[flat], w.d2phi[flat], w.bilaplacian[flat]])),
                initial=0.0,
            )
        )
    for name, residual in checks.items():
        if residual > 1e-9:
            raise InternalConsistencyError(name, float(residual), 1e-9)


# ── Virial functionals ────────────────────────────────────────────────────────


def _check_grid(field_: RadialField, weights: WeightSet) -> None:
    if field_.grid != weights.grid:
        raise RangeError("weight and field live on different grids")


def virial_value(field_: RadialField, weights: WeightSet) -> float:
    _check_grid(field_, weights)
    g = weights.grid
    return float(np.dot(g.weights, weights.phi * np.abs(field_.values) ** 2))


def virial_first_derivative(field_: RadialField, weights: WeightSet) -> float:
    _check_grid(field_, weights)
    g = weights.grid
    pairing = np.imag(np.conj(field_.values) * radial_derivative(field_))
    return float(2.0 * np.dot(g.weights, weights.dphi * pairing))


def virial_second_derivative(
    field_: RadialField, weights: WeightSet, grad_density: Optional[np.ndarray] = None
) -> float:
    _check_grid(field_, weights)
    g = weights.grid
    if grad_density is None:
        grad_density = gradient_density(field_)
    mod2 = np.abs(field_.values) ** 2
    density = (
        4.0 * weights.d2phi * grad_density
        - weights.bilaplacian * mod2
        - (4.0 / 3.0) * weights.laplacian * mod2**3
        + weights.laplacian * mod2**2
    )
    return float(np.dot(g.weights, density))


# ── Blow-up certificate ───────────────────────────────────────────────────────


def sharpest_epsilon(d2v: float, energy: float, grad: float, l4: float) -> float:
    """
    Smallest eps >= 0 with d2v <= 48E - (16 - eps) g - 6q + eps^2.

    With D = d2v - 48E + 16g + 6q this is the positive root of
    eps^2 + g eps - D = 0, and 0 when D <= 0.
    """
    D = d2v - 48.0 * energy + 16.0 * grad + 6.0 * l4
    if D <= 0:
        return 0.0
    return (-grad + math.sqrt(grad * grad + 4.0 * D)) / 2.0


class CertificateViolation(BaseModel):
    t: float
    criterion: str
    value: float
    bound: float


class BlowupCertificate(BaseModel):
    """Per-sample blow-up certificate for a K- trajectory."""

    model_config = ConfigDict(populate_by_name=True)

    delta1: float
    R: Optional[float] = None
    samples_checked: int
    violations: List[CertificateViolation] = Field(default_factory=list)
    window: Optional[List[float]] = None
    passed: bool = Field(False, serialization_alias="pass")
    epsilon_required: float = 0.0
    formula_window: Optional[List[float]] = None
    formula_gap: Optional[float] = None

    def to_json_dict(self) -> dict:
        return self.model_dump(by_alias=True)


def _span(times: List[float]) -> Optional[List[float]]:
    return [min(times), max(times)] if times else None


def blowup_certificate(
    record: "TrajectoryRecord", m: float, transient_fraction: float = 0.05
) -> BlowupCertificate:
    """
    Check K <= -6(m - E), ||grad u||^2 > 3m and V_R'' <= -24 delta1 m on every
    recorded sample after the initial transient, for the best virial radius.

    V_R'' is measured by second differences of the recorded V_R series, so the
    two end samples carry no window check. The formula values of V_R'' are
    reported next to it (``formula_window``, ``formula_gap``) but never decide.

    Raises:
        PreconditionError: If the record does not start in K- below m
    """
    if not record.reports:
        raise PreconditionError("empty trajectory")
    first = record.reports[0]
    if first.energy >= m:
        raise PreconditionError(
            "certificate needs E(u0) < m", details={"E": first.energy, "m": m}
        )
    if first.K >= 0:
        raise PreconditionError("certificate needs K(u0) < 0", details={"K": first.K})

    delta1 = 1.0 - first.energy / m
    bound_v = -24.0 * delta1 * m
    start = int(math.ceil(transient_fraction * len(record.reports)))
    indices = range(start, len(record.reports))
    if not record.virial_radii:
        raise PreconditionError("trajectory has no virial radius")

    best: Optional[BlowupCertificate] = None
    for R in record.virial_radii:
        measured = record.measured_second_derivative(R)
        formula = record.virial_accel[R]
        violations: List[CertificateViolation] = []
        window: List[float] = []
        formula_window: List[float] = []
        gaps: List[float] = []
        eps_needed = 0.0
        for i in indices:
            t = record.times[i]
            rep = record.reports[i]
            bound_k = -6.0 * (m - rep.energy)
            tol = 1e-9 * max(1.0, abs(m - rep.energy))
            if rep.K > bound_k + tol:
                violations.append(
                    CertificateViolation(t=t, criterion="K <= -6(m-E)", value=rep.K, bound=bound_k)
                )
            if not rep.grad_norm_sq > 3.0 * m:
                violations.append(
                    CertificateViolation(
                        t=t, criterion="grad2 > 3m", value=rep.grad_norm_sq, bound=3.0 * m
                    )
                )
            if formula[i] <= bound_v:
                formula_window.append(t)
            d2v = measured[i]
            if d2v is None:
                continue
            gaps.append(abs(d2v - formula[i]))
            if d2v <= bound_v:
                window.append(t)
            else:
                violations.append(
                    CertificateViolation(
                        t=t, criterion="d2VR <= -24 delta1 m", value=d2v, bound=bound_v
                    )
                )
            eps_needed = max(
                eps_needed,
                sharpest_epsilon(d2v, rep.energy, rep.grad_norm_sq, rep.l4_norm_4),
            )
        candidate = BlowupCertificate(
            delta1=delta1,
            R=R,
            samples_checked=len(indices),
            violations=violations,
            window=_span(window),
            passed=not violations and bool(window),
            epsilon_required=eps_needed,
            formula_window=_span(formula_window),
            formula_gap=max(gaps) if gaps else None,
        )
        if best is None or len(candidate.violations) < len(best.violations):
            best = candidate
        if candidate.passed:
            break

    logger.info(
        "[Virial] certificate R=%s passed=%s violations=%d",
        best.R,
        best.passed,
        len(best.violations),
    )
    return best


def virial_rate_ratio(record: "TrajectoryRecord", R: float) -> float:
    """max_t |V_R'| / (R sqrt(2M) sqrt(sup ||grad u||^2)) over the record."""
    if not record.reports:
        return 0.0
    mass = max(rep.mass for rep in record.reports)
    grad = max(rep.grad_norm_sq for rep in record.reports)
    denom = R * math.sqrt(2.0 * mass) * math.sqrt(grad)
    if denom == 0.0:
        return 0.0
    return max(abs(v) for v in record.virial_rate[R]) / denom
