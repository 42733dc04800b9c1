"""
Scattering-side observables and verdict logic.

A TrajectoryRecord collects, at every recorded sample, the FunctionalReport,
the virial series for each weight radius, exterior energies, the running
space-time accumulators st5 = int ||u||_5^5 dt and st10 = int ||u||_10^10 dt,
and the boundary-mass fraction. Verdicts are finite-time proxies: a run is
ScatteredLike when its potential energy has drained and st5 has stopped
growing, BlewUp when a blow-up stop is backed by the virial certificate (or by
monotone gradient growth at a dt_floor stop), and Undetermined otherwise.
"""

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from ..exceptions import FieldValidationError, PreconditionError
from .functionals import FunctionalReport, NormQuantities
from .grid import RadialField, gradient_density, integrate

logger = logging.getLogger(__name__)

STOP_REASONS = ("t_end", "gradient_blowup", "dt_floor", "non_finite", "step_budget")
BLOWUP_STOPS = frozenset({"gradient_blowup", "dt_floor", "non_finite"})
RESOLUTION_STOPS = frozenset({"dt_floor"})

PROXY_NOTE = (
    "Finite-time numerical proxy: thresholds (decay_factor, rate_floor, "
    "late_fraction) are tunable policy, not a proof of scattering or blow-up."
)


def _label(R: float) -> str:
    return format(R, "g")


@dataclass
class TrajectoryRecord:
    """Samples of one trajectory; mutated only by the owning evolution loop."""

    virial_radii: List[float] = field(default_factory=list)
    exterior_radii: List[float] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    reports: List[FunctionalReport] = field(default_factory=list)
    virial_values: Dict[float, List[float]] = field(default_factory=dict)
    virial_rate: Dict[float, List[float]] = field(default_factory=dict)
    virial_accel: Dict[float, List[float]] = field(default_factory=dict)
    exterior: Dict[float, List[float]] = field(default_factory=dict)
    moment2: List[float] = field(default_factory=list)
    st5: List[float] = field(default_factory=list)
    st10: List[float] = field(default_factory=list)
    bmf: List[float] = field(default_factory=list)
    dts: List[float] = field(default_factory=list)
    st5_total: float = 0.0
    st10_total: float = 0.0
    stop_reason: Optional[str] = None
    stop_time: Optional[float] = None

    def __post_init__(self):
        self.virial_radii = [float(R) for R in self.virial_radii]
        self.exterior_radii = [float(R) for R in self.exterior_radii]
        for R in self.virial_radii:
            self.virial_values.setdefault(R, [])
            self.virial_rate.setdefault(R, [])
            self.virial_accel.setdefault(R, [])
        for R in self.exterior_radii:
            self.exterior.setdefault(R, [])

    def __len__(self) -> int:
        return len(self.times)

    def add_sample(
        self,
        t: float,
        report: FunctionalReport,
        virial: Dict[float, Tuple[float, float, float]],
        exterior: Dict[float, float],
        moment2: float,
        dt: float,
    ) -> None:
        """
        Append one sample.

        Args:
            virial: R -> (V_R, dV_R/dt, d2V_R/dt2 by the virial formula)
            exterior: R -> exterior energy
        """
        if self.times and not t > self.times[-1]:
            raise FieldValidationError(
                f"sample times must increase strictly ({t} after {self.times[-1]})"
            )
        self.times.append(float(t))
        self.reports.append(report)
        for R in self.virial_radii:
            value, rate, accel = virial[R]
            self.virial_values[R].append(float(value))
            self.virial_rate[R].append(float(rate))
            self.virial_accel[R].append(float(accel))
        for R in self.exterior_radii:
            self.exterior[R].append(float(exterior[R]))
        self.moment2.append(float(moment2))
        self.st5.append(self.st5_total)
        self.st10.append(self.st10_total)
        self.bmf.append(report.boundary_mass_fraction)
        self.dts.append(float(dt))

    # ── Derived series ───────────────────────────────────────────────────────

    @staticmethod
    def second_difference(times: List[float], values: List[float]) -> List[Optional[float]]:
        """Three-point second derivative on a nonuniform mesh; None at both ends."""
        out: List[Optional[float]] = [None] * len(values)
        for i in range(1, len(values) - 1):
            h1 = times[i] - times[i - 1]
            h2 = times[i + 1] - times[i]
            out[i] = (
                2.0
                * (h1 * values[i + 1] - (h1 + h2) * values[i] + h2 * values[i - 1])
                / (h1 * h2 * (h1 + h2))
            )
        return out

    @staticmethod
    def centered_difference(times: List[float], values: List[float]) -> List[Optional[float]]:
        out: List[Optional[float]] = [None] * len(values)
        for i in range(1, len(values) - 1):
            h1 = times[i] - times[i - 1]
            h2 = times[i + 1] - times[i]
            out[i] = (
                h1 * h1 * values[i + 1]
                - (h1 * h1 - h2 * h2) * values[i]
                - h2 * h2 * values[i - 1]
            ) / (h1 * h2 * (h1 + h2))
        return out

    def measured_second_derivative(self, R: Optional[float] = None) -> List[Optional[float]]:
        """d2V_R/dt2 from the recorded V_R (untruncated moment when R is None)."""
        series = self.moment2 if R is None else self.virial_values[float(R)]
        return self.second_difference(self.times, series)

    def measured_first_derivative(self, R: float) -> List[Optional[float]]:
        return self.centered_difference(self.times, self.virial_values[float(R)])

    def gradient_series(self) -> List[float]:
        return [rep.grad_norm_sq for rep in self.reports]

    def potential_series(self) -> List[float]:
        return [rep.l6_norm_6 + rep.l4_norm_4 for rep in self.reports]

    # ── Table form ───────────────────────────────────────────────────────────

    def columns(self) -> List[str]:
        header = ["t", "M", "E", "Ec", "K", "H", "grad2", "L4", "L6"]
        header += [f"VR@{_label(R)}" for R in self.virial_radii]
        header += [f"d2VR@{_label(R)}" for R in self.virial_radii]
        header += [f"extE@{_label(R)}" for R in self.exterior_radii]
        header += ["st5", "st10", "bmf"]
        header += [f"dVR@{_label(R)}" for R in self.virial_radii]
        header += ["V2", "dt"]
        return header

    def to_table(self) -> Tuple[List[str], List[List[float]]]:
        rows = []
        for i, (t, rep) in enumerate(zip(self.times, self.reports)):
            row = [
                t,
                rep.mass,
                rep.energy,
                rep.critical_energy,
                rep.K,
                rep.H,
                rep.grad_norm_sq,
                rep.l4_norm_4,
                rep.l6_norm_6,
            ]
            row += [self.virial_values[R][i] for R in self.virial_radii]
            row += [self.virial_accel[R][i] for R in self.virial_radii]
            row += [self.exterior[R][i] for R in self.exterior_radii]
            row += [self.st5[i], self.st10[i], self.bmf[i]]
            row += [self.virial_rate[R][i] for R in self.virial_radii]
            row += [self.moment2[i], self.dts[i]]
            rows.append(row)
        return self.columns(), rows

    @classmethod
    def from_table(cls, header: List[str], rows: List[List[float]]) -> "TrajectoryRecord":
        """Rebuild a record from ``to_table`` output (stop reason not included)."""

        def radii(prefix: str) -> List[float]:
            return [float(h[len(prefix):]) for h in header if h.startswith(prefix)]

        record = cls(virial_radii=radii("VR@"), exterior_radii=radii("extE@"))
        if record.columns() != list(header):
            raise FieldValidationError("trajectory header does not match any record layout")
        idx = {name: i for i, name in enumerate(header)}
        for row in rows:
            norms = NormQuantities(
                l2=2.0 * row[idx["M"]],
                grad=row[idx["grad2"]],
                l4=row[idx["L4"]],
                l6=row[idx["L6"]],
                boundary_mass_fraction=row[idx["bmf"]],
            )
            record.st5_total = row[idx["st5"]]
            record.st10_total = row[idx["st10"]]
            record.add_sample(
                t=row[idx["t"]],
                report=FunctionalReport.from_norms(norms),
                virial={
                    R: (
                        row[idx[f"VR@{_label(R)}"]],
                        row[idx[f"dVR@{_label(R)}"]],
                        row[idx[f"d2VR@{_label(R)}"]],
                    )
                    for R in record.virial_radii
                },
                exterior={R: row[idx[f"extE@{_label(R)}"]] for R in record.exterior_radii},
                moment2=row[idx["V2"]],
                dt=row[idx["dt"]],
            )
        return record


# ── Observables ───────────────────────────────────────────────────────────────


def exterior_energy(
    field_: RadialField, R: float, grad_density: Optional[np.ndarray] = None
) -> float:
    """
    int_{|x| >= R} (|grad u|^2 + |u|^4 + |u|^6) dx.

    Nodes with r_j >= R contribute their full weight, so the value is
    nonincreasing in R; analytic tails beyond r_max count while R < r_max.
    """
    grid = field_.grid
    if not 0.0 <= R <= grid.r_max:
        raise PreconditionError(f"exterior radius must lie in [0, r_max], got {R}")
    if R >= grid.r_max:
        return 0.0
    mod2 = np.abs(field_.values) ** 2
    if grad_density is None:
        grad_density = gradient_density(field_)
    density = grad_density + mod2**2 + mod2**3
    mask = grid.r >= R
    total = float(np.dot(grid.weights[mask], density[mask]))
    if field_.extends_beyond_grid:
        ub = abs(field_.boundary_value) ** 2
        db = float(abs(field_.profile.derivative(grid.r_max)) ** 2)
        tail = field_.tail()
        total += grid.boundary_weight * (db + ub**2 + ub**3)
        total += tail.grad + tail.l4 + tail.l6
    return total


def _power_integral(field_: RadialField, power: int) -> float:
    return integrate(np.abs(field_.values) ** power, field_.grid)


def strichartz_accumulate(
    record: TrajectoryRecord, field_: RadialField, dt_elapsed: float
) -> TrajectoryRecord:
    """st5 += dt ||u||_5^5 and st10 += dt ||u||_10^10."""
    if dt_elapsed < 0:
        raise PreconditionError("dt_elapsed must be non-negative")
    if dt_elapsed == 0 or field_.is_zero:
        return record
    record.st5_total += dt_elapsed * _power_integral(field_, 5)
    record.st10_total += dt_elapsed * _power_integral(field_, 10)
    return record


# ── Verdicts ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class VerdictThresholds:
    decay_factor: float = 10.0
    rate_floor: float = 1e-4
    late_fraction: float = 0.2
    transient_fraction: float = 0.05
    monotone_window: int = 5


class VerdictKind(str, enum.Enum):
    SCATTERED_LIKE = "ScatteredLike"
    BLEW_UP = "BlewUp"
    UNDETERMINED = "Undetermined"


class Verdict(BaseModel):
    kind: VerdictKind
    stop_reason: Optional[str] = None
    evidence: Dict[str, Any]
    note: str = PROXY_NOTE
    certificate: Optional[Dict[str, Any]] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def late_st5_rate(record: TrajectoryRecord, late_fraction: float) -> float:
    """Growth rate of st5 per unit time over the final fraction of the run."""
    if len(record) < 2:
        return 0.0
    t0, t1 = record.times[0], record.times[-1]
    start = t1 - late_fraction * (t1 - t0)
    i = next(k for k, t in enumerate(record.times) if t >= start)
    i = min(i, len(record) - 2)
    span = t1 - record.times[i]
    return (record.st5[-1] - record.st5[i]) / span if span > 0 else 0.0


def gradient_monotone(record: TrajectoryRecord, window: int) -> bool:
    """Last ``window`` gradient samples non-decreasing and above the initial one."""
    g = record.gradient_series()
    if len(g) < window:
        return False
    tail = g[-window:]
    return all(b >= a for a, b in zip(tail, tail[1:])) and g[-1] > g[0]


def scattering_verdict(
    record: TrajectoryRecord,
    thresholds: Optional[VerdictThresholds] = None,
    m: Optional[float] = None,
) -> Verdict:
    """Classify a completed record. Pure function of the record and thresholds."""
    from .ground_state import M_CLOSED_FORM
    from .virial import blowup_certificate, virial_rate_ratio

    th = thresholds or VerdictThresholds()
    m = M_CLOSED_FORM if m is None else m
    if not record.reports:
        raise PreconditionError("verdict needs at least one sample")

    potential = record.potential_series()
    grad = record.gradient_series()
    rate = late_st5_rate(record, th.late_fraction)
    evidence: Dict[str, Any] = {
        "potential_initial": potential[0],
        "potential_final": potential[-1],
        "decay_required": th.decay_factor,
        "st5_late_rate": rate,
        "rate_floor": th.rate_floor,
        "gradient_initial": grad[0],
        "gradient_peak": max(grad),
        "samples": len(record),
        "stop_time": record.stop_time if record.stop_time is not None else record.times[-1],
    }
    if record.virial_radii:
        evidence["virial_rate_ratio"] = {
            _label(R): virial_rate_ratio(record, R) for R in record.virial_radii
        }

    stop = record.stop_reason
    certificate = None
    if stop in BLOWUP_STOPS:
        try:
            certificate = blowup_certificate(record, m, th.transient_fraction)
            evidence["certificate_passed"] = certificate.passed
            evidence["epsilon_required"] = certificate.epsilon_required
        except PreconditionError as exc:
            evidence["certificate_passed"] = False
            evidence["certificate_skipped"] = exc.message
        monotone = gradient_monotone(record, th.monotone_window)
        evidence["gradient_monotone"] = monotone
        if (certificate is not None and certificate.passed) or (
            stop in RESOLUTION_STOPS and monotone
        ):
            kind = VerdictKind.BLEW_UP
        else:
            kind = VerdictKind.UNDETERMINED
    elif stop == "t_end":
        decayed = potential[-1] <= potential[0] / th.decay_factor
        quiet = rate < th.rate_floor
        evidence["potential_decayed"] = decayed
        evidence["st5_rate_below_floor"] = quiet
        kind = VerdictKind.SCATTERED_LIKE if decayed and quiet else VerdictKind.UNDETERMINED
    else:
        kind = VerdictKind.UNDETERMINED

    verdict = Verdict(
        kind=kind,
        stop_reason=stop,
        evidence=evidence,
        certificate=certificate.to_json_dict() if certificate is not None else None,
    )
    logger.info("[Verdict] %s (stop=%s)", kind.value, stop)
    return verdict


def write_report(record: TrajectoryRecord, verdict: Verdict, out_dir) -> List[Path]:
    """Emit trajectory.csv and verdict.json into ``out_dir``."""
    from ..persistence import write_json, write_table_csv

    out = Path(out_dir)
    header, rows = record.to_table()
    paths = [
        write_table_csv(out / "trajectory.csv", header, rows),
        write_json(out / "verdict.json", verdict.to_json_dict()),
    ]
    logger.info("[Persist] Trajectory report written to %s", out)
    return paths


def read_trajectory(path) -> TrajectoryRecord:
    from ..persistence import read_table_csv

    header, rows = read_table_csv(path)
    return TrajectoryRecord.from_table(header, rows)
