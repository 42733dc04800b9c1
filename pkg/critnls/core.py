"""
critnls facade: threshold certificate, data manufacture, evolution,
dichotomy sweeps, bubble extraction and the variational suite.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from . import persistence
from .config import SimConfig
from .exceptions import CritNLSError, UsageError
from .engine.diagnostics import TrajectoryRecord, Verdict, write_report
from .engine.evolve import evolve
from .engine.functionals import FunctionalReport, functional_report
from .engine.ground_state import (
    M_CLOSED_FORM,
    R_CANDIDATES,
    ThresholdCertificate,
    classify,
    cutoff_radius,
    make_k_data,
    threshold_m,
)
from .engine.grid import RadialField, RadialGrid, power_norm, sample
from .engine.littlewood_paley import BubbleReport, extract_bubble
from .engine.profiles import AubinTalentiBubble, Gaussian, GaussianMixture
from .engine.variational import VariationalSuiteReport, verify_variational
from .logging_config import RunLoggingContext

logger = logging.getLogger(__name__)

DILATION_RULES = ("cubic", "quadratic")


def evolution_dilation(eps: float, rule: str = "cubic", factor: float = 1.0) -> float:
    """Dilation of the threshold-adjacent datum: factor |eps|^3 or factor eps^2."""
    if rule not in DILATION_RULES:
        raise UsageError(f"dilation_rule must be one of {DILATION_RULES}, got {rule!r}")
    power = 3 if rule == "cubic" else 2
    return factor * abs(eps) ** power


def member_directory(eps: float) -> str:
    return f"eps_{eps:+g}"


def signed_members(eps_list: Sequence[float]) -> List[float]:
    """Both signs of every entry, de-duplicated and ascending."""
    magnitudes = {abs(float(e)) for e in eps_list}
    return sorted({s * e for e in magnitudes for s in (-1.0, 1.0)})


def scale_to_dilation(
    config: SimConfig, dilation: float, grid: bool = False, time: bool = False
) -> SimConfig:
    """
    Read lengths in units of ``dilation`` and times in units of ``dilation``^2.

    ``grid`` scales r_max and every virial and exterior radius; ``time`` scales
    dt0, t_end, blowup_dt_floor and (inversely) the damping rate.
    """
    changes: Dict[str, Any] = {}
    if grid:
        changes.update(
            r_max=config.r_max * dilation,
            virial_R_list=[R * dilation for R in config.virial_R_list],
            exterior_R_list=[R * dilation for R in config.exterior_R_list],
        )
    if time:
        unit = dilation**2
        changes.update(
            dt0=config.dt0 * unit,
            t_end=config.t_end * unit,
            blowup_dt_floor=config.blowup_dt_floor * unit,
            absorb_strength=config.absorb_strength / unit,
        )
    return config.with_overrides(**changes) if changes else config


class DichotomyRun(BaseModel):
    eps: float
    classification: Optional[str] = None
    verdict: Optional[str] = None
    stop_reason: Optional[str] = None
    peak_gradient: Optional[float] = None
    stop_time: Optional[float] = None
    R: Optional[float] = None
    dilation: Optional[float] = None
    certificate_passed: Optional[bool] = None
    error: Optional[Dict[str, Any]] = None


class DichotomySummary(BaseModel):
    runs: List[DichotomyRun] = Field(default_factory=list)

    @property
    def failed(self) -> List[float]:
        return [run.eps for run in self.runs if run.error is not None]


def _run_member(payload: Tuple[float, Dict[str, Any], Dict[str, Any], Optional[str]]) -> Dict[str, Any]:
    """Process-pool worker: one eps, its own record, its own subdirectory."""
    eps, config_dict, options, out_dir = payload
    config = SimConfig.from_dict(config_dict)
    with RunLoggingContext(member_directory(eps)):
        row: Dict[str, Any] = {"eps": eps}
        try:
            dilation = evolution_dilation(eps, options["dilation_rule"], options["dilation_factor"])
            row["dilation"] = dilation
            config = scale_to_dilation(
                config,
                dilation,
                grid=options["grid_in_dilation_units"],
                time=options["time_in_dilation_units"],
            )
            field = make_k_data(eps, R=options.get("R"), grid=config.make_grid(), dilation=dilation)
            row["R"] = cutoff_radius(field)
            row["classification"] = classify(field).value
            if options["rate_floor_relative"]:
                config = config.with_overrides(
                    rate_floor=config.rate_floor * power_norm(field, 5)
                )
            record, verdict = evolve(field, config)
        except CritNLSError as exc:
            logger.warning("[Dichotomy] eps=%+g failed: %s", eps, exc.message)
            row["error"] = exc.to_dict()
            return row

        row.update(
            verdict=verdict.kind.value,
            stop_reason=verdict.stop_reason,
            peak_gradient=max(record.gradient_series()),
            stop_time=record.stop_time,
            certificate_passed=verdict.evidence.get("certificate_passed"),
        )
        if out_dir is not None:
            target = Path(out_dir) / member_directory(eps)
            persistence.write_field_csv(target / "field.csv", field)
            write_report(record, verdict, target)
        return row


class DichotomyLab:
    """
    Entry point for every workflow of the toolkit.

    Examples:
        >>> lab = DichotomyLab(SimConfig(r_max=40.0, n=2047))
        >>> cert = lab.threshold()
        >>> field = lab.manufacture(0.1)
        >>> record, verdict = lab.run(field)
    """

    def __init__(self, config: Optional[SimConfig] = None):
        self.config = config or SimConfig()
        self.config.validate()
        self._certificate: Optional[ThresholdCertificate] = None
        self._stats: Dict[str, Any] = {
            "runs": 0,
            "sweeps": 0,
            "fields_manufactured": 0,
            "bubbles_extracted": 0,
            "variational_fields": 0,
            "verdicts": {},
            "seconds_evolving": 0.0,
        }
        logger.info(
            "DichotomyLab initialized (r_max=%g, n=%d)", self.config.r_max, self.config.n
        )

    # ── Threshold ────────────────────────────────────────────────────────────

    def threshold(self, grid: Optional[RadialGrid] = None) -> ThresholdCertificate:
        if grid is not None:
            return threshold_m(grid)
        if self._certificate is None:
            self._certificate = threshold_m()
        return self._certificate

    @property
    def m(self) -> float:
        return M_CLOSED_FORM

    # ── Data ─────────────────────────────────────────────────────────────────

    def manufacture(
        self,
        eps: float,
        R: Optional[float] = None,
        dilation: Optional[float] = None,
        grid: Optional[RadialGrid] = None,
    ) -> RadialField:
        field = make_k_data(eps, R=R, grid=grid, dilation=dilation, candidates=R_CANDIDATES)
        self._stats["fields_manufactured"] += 1
        return field

    def report(self, field: RadialField) -> FunctionalReport:
        return functional_report(field)

    # ── Evolution ────────────────────────────────────────────────────────────

    def run(
        self, field: RadialField, config: Optional[SimConfig] = None
    ) -> Tuple[TrajectoryRecord, Verdict]:
        started = time.perf_counter()
        record, verdict = evolve(field, config or self.config, self.m)
        self._stats["runs"] += 1
        self._stats["seconds_evolving"] += time.perf_counter() - started
        kinds = self._stats["verdicts"]
        kinds[verdict.kind.value] = kinds.get(verdict.kind.value, 0) + 1
        return record, verdict

    def sweep(
        self,
        eps_list: Sequence[float],
        R: Optional[float] = None,
        dilation_rule: str = "quadratic",
        dilation_factor: float = 0.5,
        time_in_dilation_units: bool = True,
        grid_in_dilation_units: bool = True,
        rate_floor_relative: bool = True,
        workers: int = 1,
        out_dir=None,
    ) -> DichotomySummary:
        """
        Evolve threshold-adjacent data at +|eps| and -|eps| for every entry.

        Each member's datum concentrates at its own dilation lam, so by default
        the grid and radii are read in units of lam, times in units of lam^2,
        and rate_floor as a fraction of ||u0||_5^5. Results merge in order of
        eps. With ``out_dir`` each member writes field.csv, trajectory.csv and
        verdict.json under ``eps_<eps>/`` and summary.json lands at the top.
        """
        if not eps_list:
            raise UsageError("eps_list must not be empty")
        if workers < 1:
            raise UsageError("workers must be >= 1")
        if any(e == 0 for e in eps_list):
            raise UsageError("eps = 0 has no sign; the sweep needs nonzero entries")
        evolution_dilation(0.1, dilation_rule, dilation_factor)
        options = {
            "R": R,
            "dilation_rule": dilation_rule,
            "dilation_factor": dilation_factor,
            "time_in_dilation_units": time_in_dilation_units,
            "grid_in_dilation_units": grid_in_dilation_units,
            "rate_floor_relative": rate_floor_relative,
        }
        ordered = signed_members(eps_list)
        out = str(out_dir) if out_dir is not None else None
        payloads = [(eps, self.config.to_dict(), options, out) for eps in ordered]

        if workers == 1:
            rows = [_run_member(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_run_member, payloads))

        summary = DichotomySummary(runs=[DichotomyRun(**row) for row in rows])
        self._stats["sweeps"] += 1
        for run in summary.runs:
            if run.verdict is not None:
                self._stats["runs"] += 1
                kinds = self._stats["verdicts"]
                kinds[run.verdict] = kinds.get(run.verdict, 0) + 1
        if out is not None:
            persistence.write_json(Path(out) / "summary.json", summary.model_dump())
        logger.info(
            "[Dichotomy] %d members, verdicts: %s",
            len(summary.runs),
            [(run.eps, run.verdict) for run in summary.runs],
        )
        return summary

    # ── Analysis ─────────────────────────────────────────────────────────────

    def bubble(
        self, field: RadialField, reference: Optional[RadialField] = None
    ) -> BubbleReport:
        report = extract_bubble(field, reference)
        self._stats["bubbles_extracted"] += 1
        return report

    def variational(self, seed: int, count: int) -> VariationalSuiteReport:
        report = verify_variational(seed, count, self.m)
        self._stats["variational_fields"] += report.count
        return report

    def get_stats(self) -> Dict[str, Any]:
        """Counters of everything this lab has computed."""
        stats = dict(self._stats)
        stats["verdicts"] = dict(self._stats["verdicts"])
        stats["config"] = self.config.to_dict()
        stats["m"] = self.m
        stats["threshold_certified"] = self._certificate is not None
        stats["seconds_evolving"] = round(stats["seconds_evolving"], 6)
        return stats


def initial_field(spec, grid: RadialGrid) -> RadialField:
    """Sample the ``initial`` section of a config file on ``grid``."""
    kind = spec.kind
    if kind == "gaussian":
        return sample(Gaussian(amplitude=spec.amplitude, dilation=spec.width), grid)
    if kind == "gaussian_mixture":
        profile = GaussianMixture(
            weights=tuple(spec.weights),
            widths=tuple(spec.widths),
            amplitude=spec.amplitude,
            dilation=spec.dilation,
        )
        return sample(profile, grid)
    if kind == "aubin_talenti":
        profile = AubinTalentiBubble(
            amplitude=spec.amplitude, dilation=spec.dilation, cutoff=spec.cutoff
        )
        return sample(profile, grid)
    if kind == "k_data":
        return make_k_data(spec.eps, R=spec.R, grid=grid, dilation=spec.dilation)
    if kind == "field_csv":
        field = persistence.read_field_csv(spec.path, r_max=grid.r_max)
        if field.grid != grid:
            raise UsageError(
                f"{spec.path} holds {field.grid.n} nodes; the config grid has {grid.n}"
            )
        return field
    raise UsageError(f"unknown initial data kind {kind!r}")
