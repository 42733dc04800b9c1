"""
Seeded randomized verification of the variational inequalities.

Every check runs on exact analytic norms, so a failure means a broken
identity or inequality rather than a quadrature artifact. The test family
mixes truncated, dilated Aubin-Talenti bubbles around the threshold with
signed Gaussian mixtures, optionally rescaled along the (3,-2) or (1,-2)
flows, and keeps members below the threshold (E < m).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..exceptions import CritNLSError, UsageError
from .functionals import FunctionalReport, NormQuantities, norm_quantities
from .ground_state import M_CLOSED_FORM, SOBOLEV_CONSTANT, rescale_to_zero_k
from .profiles import AnalyticProfile, AubinTalentiBubble, GaussianMixture

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-12
MINIMIZATION_SLACK = 1e-6
FLOW_LIMIT = 12.0
MONOTONE_GRID = np.linspace(-1.0, 1.0, 21)
ATTEMPTS_PER_FIELD = 50


class LemmaTally(BaseModel):
    checked: int = 0
    passed: int = 0
    worst_margin: Optional[float] = None

    def record(self, margin: float) -> None:
        """A check passes when its margin is non-negative."""
        self.checked += 1
        if margin >= 0.0:
            self.passed += 1
        if self.worst_margin is None or margin < self.worst_margin:
            self.worst_margin = float(margin)

    @property
    def ok(self) -> bool:
        return self.passed == self.checked


class VariationalSuiteReport(BaseModel):
    seed: int
    count: int
    generated: int
    lemmas: Dict[str, LemmaTally] = Field(default_factory=dict)
    inf_mass_plus_energy_at_zero_K: Optional[float] = None
    all_passed: bool = False

    def failures(self) -> List[str]:
        return sorted(name for name, tally in self.lemmas.items() if not tally.ok)


def random_profile(rng: np.random.Generator) -> AnalyticProfile:
    """One member of the randomized test family."""
    if rng.random() < 0.4:
        eps = float(rng.uniform(-0.25, 0.25))
        lam = max(abs(eps) ** 3, 1e-9)
        R = 2.0 ** int(rng.integers(4, 13))
        profile: AnalyticProfile = AubinTalentiBubble(
            amplitude=(1.0 + eps) / math.sqrt(lam), dilation=lam, cutoff=R
        )
    else:
        k = int(rng.integers(1, 4))
        profile = GaussianMixture(
            weights=tuple(float(w) for w in rng.uniform(-3.0, 3.0, size=k)),
            widths=tuple(float(s) for s in rng.uniform(0.3, 3.0, size=k)),
        )
    flow = rng.random()
    if flow < 1.0 / 3.0:
        profile = profile.scaled(float(rng.uniform(-0.5, 0.5)), 3)
    elif flow < 2.0 / 3.0:
        profile = profile.scaled(float(rng.uniform(-0.5, 0.5)), 1)
    return profile


@dataclass
class _Suite:
    m: float

    def __post_init__(self):
        names = (
            "energy_identity",
            "structure_identity",
            "free_energy_identity",
            "positivity_near_zero",
            "sharp_sobolev",
            "k_critical_below_k",
            "minimization_H",
            "free_energy_equivalence",
            "uniform_bound",
            "scaling_laws",
            "monotone_H_along_flow",
            "one_minus_two_invariance",
            "zero_k_rescaling",
        )
        self.lemmas: Dict[str, LemmaTally] = {name: LemmaTally() for name in names}
        self.zero_k_values: List[float] = []

    def tally(self, name: str, margin: float) -> None:
        self.lemmas[name].record(margin)

    def run(self, profile: AnalyticProfile) -> None:
        n = norm_quantities(profile)
        rep = FunctionalReport.from_norms(n)
        g, p, q = n.grad, n.l6, n.l4
        m = self.m
        scale = rep.scale

        # algebraic identities
        residuals = {
            "energy_identity": abs(rep.energy - (0.5 * g - p / 6.0 + 0.25 * q)),
            "structure_identity": abs(6.0 * rep.energy - rep.K - (g + p)),
            "free_energy_identity": abs(rep.H - (rep.energy - rep.K / 6.0)),
        }
        for name, residual in residuals.items():
            self.tally(name, IDENTITY_TOLERANCE - residual / scale)

        # ||phi||_6 <= C*_3 ||grad phi||_2
        self.tally("sharp_sobolev", SOBOLEV_CONSTANT * math.sqrt(g) * (1 + 1e-12) - p ** (1 / 6))

        # g < 3m forces K > 0; checked on the field and on a rescaling with g = m
        if g < 3.0 * m:
            self.tally("positivity_near_zero", rep.K)
        lam_small = 0.25 * math.log(m / g) if g > m else 0.0
        small = n.scaled(lam_small, 3)
        self.tally("positivity_near_zero", FunctionalReport.from_norms(small).K)

        self.tally("k_critical_below_k", rep.K - rep.K_c)

        if rep.K <= 0.0:
            self.tally("minimization_H", rep.H - (m - MINIMIZATION_SLACK))

        tol = 1e-9 * max(1.0, abs(m - rep.energy))
        if rep.K >= 0.0:
            upper = 0.5 * g + 0.25 * q
            self.tally(
                "free_energy_equivalence",
                min(rep.energy - rep.H, upper - rep.energy) + tol,
            )
        if rep.energy < m:
            if rep.K < 0.0:
                margin = -6.0 * (m - rep.energy) - rep.K
            else:
                margin = rep.K - min(6.0 * (m - rep.energy), (2.0 / 3.0) * g + 0.5 * q)
            self.tally("uniform_bound", margin + tol)

        self._scaling_checks(profile, n, rep)

        if rep.K < 0.0:
            try:
                _, rescaled = rescale_to_zero_k(profile)
            except CritNLSError as exc:
                logger.warning("[Variational] zero-K rescaling failed: %s", exc.message)
                self.tally("zero_k_rescaling", -1.0)
            else:
                at_zero = FunctionalReport.from_norms(norm_quantities(rescaled))
                self.tally("zero_k_rescaling", at_zero.energy - (m - MINIMIZATION_SLACK))
                self.zero_k_values.append(at_zero.mass + at_zero.energy)

    def _scaling_checks(
        self, profile: AnalyticProfile, n: NormQuantities, rep: FunctionalReport
    ) -> None:
        # exact rescaled norms against the exponential laws
        lam = 0.3
        exact = profile.scaled(lam, 3).norms()
        laws = n.scaled(lam, 3)
        worst = max(
            abs(exact.grad - laws.grad) / max(laws.grad, 1e-300),
            abs(exact.l6 - laws.l6) / max(laws.l6, 1e-300),
            abs(exact.l4 - laws.l4) / max(laws.l4, 1e-300),
        )
        self.tally("scaling_laws", IDENTITY_TOLERANCE * 100 - worst)

        # H along the (3,-2) flow never decreases
        hs = [FunctionalReport.from_norms(n.scaled(float(t), 3)).H for t in MONOTONE_GRID]
        steps = [b - a + 1e-12 * max(abs(a), abs(b)) for a, b in zip(hs, hs[1:])]
        self.tally("monotone_H_along_flow", min(steps))

        # (1,-2) flow: H invariant, K -> K^c
        far = FunctionalReport.from_norms(norm_quantities(profile.scaled(FLOW_LIMIT, 1)))
        h_gap = abs(far.H - rep.H) - 1e-12 * max(rep.H, 1.0)
        k_gap = abs(far.K - rep.K_c) - 1e-9 * max(abs(rep.K_c), rep.scale)
        self.tally("one_minus_two_invariance", -max(h_gap, k_gap))


def verify_variational(
    seed: int, count: int, m: float = M_CLOSED_FORM
) -> VariationalSuiteReport:
    """
    Run every lemma check over ``count`` seeded sub-threshold fields.

    Raises:
        UsageError: If count < 1
    """
    if count < 1:
        raise UsageError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    suite = _Suite(m)
    accepted = 0
    generated = 0
    budget = ATTEMPTS_PER_FIELD * count
    while accepted < count and generated < budget:
        profile = random_profile(rng)
        generated += 1
        if FunctionalReport.from_norms(norm_quantities(profile)).energy >= m:
            continue
        suite.run(profile)
        accepted += 1

    if accepted < count:
        logger.warning(
            "[Variational] only %d of %d sub-threshold fields after %d draws",
            accepted,
            count,
            generated,
        )
    report = VariationalSuiteReport(
        seed=seed,
        count=accepted,
        generated=generated,
        lemmas=suite.lemmas,
        inf_mass_plus_energy_at_zero_K=min(suite.zero_k_values) if suite.zero_k_values else None,
    )
    report.all_passed = accepted == count and not report.failures()
    logger.info(
        "[Variational] seed=%d fields=%d all_passed=%s", seed, accepted, report.all_passed
    )
    return report
