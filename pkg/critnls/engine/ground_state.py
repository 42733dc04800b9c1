"""
Ground state W, the threshold m, and threshold-adjacent data.

W(r) = (1 + r^2/3)^{-1/2} solves -ΔW = W^5 with
||grad W||^2 = ||W||_6^6 = 3^{3/2} pi^2 / 4, hence

    m = E^c(W) = ||grad W||^2 / 3 = sqrt(3) pi^2 / 4,   C*_3 = (3m)^{-1/3}.

Threshold-adjacent data: phi = theta lam^{-1/2} chi_R(x/lam) W(x/lam) with
theta = 1 + eps. Negative eps lands in K+, positive eps in K-.
"""

import enum
import logging
import math
from typing import Optional, Sequence, Tuple, Union

from pydantic import BaseModel
from scipy import optimize

from ..exceptions import BracketError, CalibrationError, ConstructionError, PreconditionError, RangeError
from ..validators import ParameterValidator
from .cutoff import CutoffSpec
from .functionals import (
    FieldLike,
    FunctionalReport,
    functional_report,
    k_along_flow,
    k_along_flow_derivative,
    norm_quantities,
)
from .grid import RadialField, RadialGrid, make_grid, sample, scale_field
from .profiles import AnalyticProfile, AubinTalentiBubble

logger = logging.getLogger(__name__)

M_CLOSED_FORM = math.sqrt(3.0) * math.pi**2 / 4.0
SOBOLEV_CONSTANT = (3.0 * M_CLOSED_FORM) ** (-1.0 / 3.0)

THRESHOLD_TOLERANCE = 1e-8
SOBOLEV_RELATION_TOLERANCE = 1e-10
R_CANDIDATES = tuple(2.0**k for k in range(4, 13))
NODES_PER_DILATION = 16
RESOLUTION_TOLERANCE = 1e-4
ZERO_K_TOLERANCE = 1e-10
BRACKET = (-5.0, 0.0)

__all__ = [
    "CutoffSpec",
    "M_CLOSED_FORM",
    "Membership",
    "ThresholdCertificate",
    "aubin_talenti",
    "classify",
    "k_data_profile",
    "make_k_data",
    "reference_grid",
    "rescale_to_zero_k",
    "threshold_m",
]


def reference_grid() -> RadialGrid:
    """Grid on which the threshold is calibrated."""
    return make_grid(100.0, 16383)


def aubin_talenti(grid: RadialGrid) -> RadialField:
    """Samples of W with exact tails beyond r_max."""
    return sample(AubinTalentiBubble(), grid)


class ThresholdCertificate(BaseModel):
    m_closed_form: float
    m_quadrature: float
    sobolev_constant: float
    discrepancy: float
    sobolev_relation_error: float
    r_max: float
    n: int


def threshold_m(grid: Optional[RadialGrid] = None) -> ThresholdCertificate:
    """
    Compute m = E^c(W) by quadrature and certify it against the closed form.

    Raises:
        CalibrationError: If either certificate bound fails
    """
    grid = grid or reference_grid()
    norms = norm_quantities(aubin_talenti(grid))
    m_quad = 0.5 * norms.grad - norms.l6 / 6.0
    sobolev = norms.l6 ** (1.0 / 6.0) / math.sqrt(norms.grad)
    discrepancy = abs(m_quad - M_CLOSED_FORM)
    relation_error = abs(sobolev**-3 / 3.0 - M_CLOSED_FORM) / M_CLOSED_FORM

    logger.info(
        "[GroundState] m_quadrature=%.15g discrepancy=%.3e sobolev=%.15g",
        m_quad,
        discrepancy,
        sobolev,
    )
    if discrepancy > THRESHOLD_TOLERANCE:
        raise CalibrationError("m", discrepancy, THRESHOLD_TOLERANCE)
    if relation_error > SOBOLEV_RELATION_TOLERANCE:
        raise CalibrationError(
            "m = (1/3) C^-3", relation_error, SOBOLEV_RELATION_TOLERANCE
        )
    return ThresholdCertificate(
        m_closed_form=M_CLOSED_FORM,
        m_quadrature=m_quad,
        sobolev_constant=sobolev,
        discrepancy=discrepancy,
        sobolev_relation_error=relation_error,
        r_max=grid.r_max,
        n=grid.n,
    )


# ── Threshold-adjacent data ───────────────────────────────────────────────────


def k_data_profile(
    eps: float, R: float, dilation: Optional[float] = None
) -> AubinTalentiBubble:
    """theta lam^{-1/2} chi_R(x/lam) W(x/lam), theta = 1 + eps, lam = |eps|^3 by default."""
    ParameterValidator.epsilon(eps)
    lam = abs(eps) ** 3 if dilation is None else ParameterValidator.positive("dilation", dilation)
    CutoffSpec(R)
    return AubinTalentiBubble(
        amplitude=(1.0 + eps) / math.sqrt(lam), dilation=lam, cutoff=float(R)
    )


def adapted_grid(profile: AnalyticProfile, max_nodes: int = 2**20) -> RadialGrid:
    """Grid holding the profile's support twice over with NODES_PER_DILATION nodes per dilation."""
    r_max = 2.0 * profile.support_radius
    needed = NODES_PER_DILATION * r_max / profile.dilation
    size = 2 ** max(12, math.ceil(math.log2(needed)))
    if size > max_nodes:
        raise RangeError(
            f"resolving dilation {profile.dilation:.3e} on r_max={r_max:.3e} needs "
            f"{size} nodes (limit {max_nodes})",
            details={"nodes": size},
        )
    return make_grid(r_max, size - 1)


def _violated_conditions(eps: float, report: FunctionalReport, m: float) -> list:
    failed = []
    if report.energy >= m:
        failed.append("E < m")
    if eps < 0 and report.K <= 0:
        failed.append("K > 0")
    if eps > 0 and report.K >= 0:
        failed.append("K < 0")
    return failed


def make_k_data(
    eps: float,
    R: Optional[float] = None,
    grid: Optional[RadialGrid] = None,
    dilation: Optional[float] = None,
    candidates: Sequence[float] = R_CANDIDATES,
) -> RadialField:
    """
    Manufacture K+ (eps < 0) or K- (eps > 0) data below the threshold.

    Without ``R`` the cutoff is searched upward through ``candidates``; the
    field is returned at the first R whose grid functionals verify the sign
    conditions. Without ``grid`` each candidate gets an adapted grid.

    Raises:
        ConstructionError: Naming the violated condition at the last R tried
    """
    ParameterValidator.epsilon(eps)
    radii = [float(R)] if R is not None else list(candidates)
    last_failure = None
    for radius in radii:
        profile = k_data_profile(eps, radius, dilation)
        target = grid
        if target is None:
            try:
                target = adapted_grid(profile)
            except RangeError as exc:
                last_failure = ("resolution", exc.message)
                break
        if profile.support_radius > target.r_max:
            last_failure = (
                "support inside grid",
                f"support {profile.support_radius:.4g} exceeds r_max {target.r_max:.4g}",
            )
            break

        field = sample(profile, target)
        report = functional_report(field)
        exact = profile.norms().grad
        mismatch = abs(report.grad_norm_sq - exact) / exact
        if mismatch > RESOLUTION_TOLERANCE:
            last_failure = (
                "resolution",
                f"grid gradient differs from the exact value by {mismatch:.2e}",
            )
            break

        failed = _violated_conditions(eps, report, M_CLOSED_FORM)
        if not failed:
            logger.info(
                "[GroundState] eps=%+.4g data at R=%g: E=%.10g K=%.6g",
                eps,
                radius,
                report.energy,
                report.K,
            )
            return field
        logger.debug("[GroundState] eps=%+.4g rejected at R=%g: %s", eps, radius, failed)
        last_failure = (" and ".join(failed), f"sign conditions not met at R={radius:g}")

    condition, reason = last_failure or ("E < m", "no cutoff radius tried")
    raise ConstructionError(
        condition,
        f"Construction failed for eps={eps:+g}: {reason} (violated: {condition})",
        details={"eps": eps, "R": radii[-1]},
    )


def cutoff_radius(field: RadialField) -> Optional[float]:
    profile = field.profile
    return getattr(profile, "cutoff", None)


# ── Scaling flow ──────────────────────────────────────────────────────────────


def rescale_to_zero_k(obj: FieldLike) -> Tuple[float, FieldLike]:
    """
    Find lam0 <= 0 with K(phi^{lam0}_{3,-2}) = 0.

    Root finding runs on the exponential polynomial in lam: bisection to
    1e-12 on [-5, 0], then one Newton step.

    Raises:
        PreconditionError: If the field is zero or K >= 0
        BracketError: If the bracket has no sign change
    """
    norms = norm_quantities(obj)
    if norms.grad == 0.0 and norms.l6 == 0.0:
        raise PreconditionError("rescale_to_zero_k needs a nonzero field")
    k0 = k_along_flow(norms, 0.0)
    if abs(k0) <= ZERO_K_TOLERANCE * norms.grad:
        return 0.0, obj
    if k0 > 0:
        raise PreconditionError(
            "rescale_to_zero_k needs K < 0", details={"K": k0}
        )

    lower, upper = BRACKET
    f_lower = k_along_flow(norms, lower)
    if f_lower <= 0:
        raise BracketError(lower, upper, f_lower, k0)
    lam0 = optimize.bisect(
        lambda lam: k_along_flow(norms, lam), lower, upper, xtol=1e-12, maxiter=200
    )
    slope = k_along_flow_derivative(norms, lam0)
    if slope != 0.0:
        polished = lam0 - k_along_flow(norms, lam0) / slope
        if lower < polished < upper:
            lam0 = polished

    residual = abs(k_along_flow(norms, lam0))
    if residual > ZERO_K_TOLERANCE * norms.grad:
        logger.warning("K residual %.3e after root polish at lam0=%.15g", residual, lam0)

    if isinstance(obj, AnalyticProfile):
        return lam0, obj.scaled(lam0, 3)
    return lam0, scale_field(obj, lam0, 3)


# ── Classification ────────────────────────────────────────────────────────────


class Membership(str, enum.Enum):
    K_PLUS = "K_plus"
    K_MINUS = "K_minus"
    ABOVE_THRESHOLD = "above_threshold"
    ZERO = "zero"


def classify(obj: Union[FieldLike, FunctionalReport], m: float = M_CLOSED_FORM) -> Membership:
    report = obj if isinstance(obj, FunctionalReport) else functional_report(obj)
    if report.grad_norm_sq == 0.0 and report.l6_norm_6 == 0.0 and report.l4_norm_4 == 0.0:
        return Membership.ZERO
    if report.energy >= m:
        return Membership.ABOVE_THRESHOLD
    return Membership.K_PLUS if report.K >= 0 else Membership.K_MINUS
