"""
Time integration of  i u_t + Δu = -|u|^4 u + |u|^2 u  for radial data.

One step is the Strang composition N(dt/2) L(dt) N(dt/2):

    L(τ)  exact free flow on the sine basis of v = r u
          (mode k multiplied by exp(-i κ_k^2 τ)); L^2-unitary
    N(τ)  exact pointwise phase u exp(iτ(|u|^4 [f1] - |u|^2 [f2]));
          |u_j| unchanged

so mass is conserved to roundoff. The wall at r_max is Dirichlet; an optional
smooth damping layer can be switched on for long dispersive runs.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..config import SimConfig
from ..exceptions import (
    BlowUpSignal,
    FieldValidationError,
    PreconditionError,
    TimeStepFloorError,
)
from . import spectral
from .cutoff import SMOOTHSTEP
from .diagnostics import (
    TrajectoryRecord,
    Verdict,
    exterior_energy,
    scattering_verdict,
    strichartz_accumulate,
)
from .functionals import FunctionalReport, norm_quantities
from .grid import RadialField, RadialGrid, gradient_density
from .virial import (
    WeightFamily,
    WeightSet,
    truncated_weight,
    virial_first_derivative,
    virial_second_derivative,
    virial_value,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolveState:
    t: float
    field: RadialField
    step_count: int = 0
    dt_current: float = 0.0


def absorbing_layer(grid: RadialGrid, width: float, strength: float) -> np.ndarray:
    """Damping rate sigma(r): 0 inside (1 - width) r_max, rising smoothly to ``strength``."""
    start = (1.0 - width) * grid.r_max
    t = np.clip((grid.r - start) / (width * grid.r_max), 0.0, 1.0)
    return strength * SMOOTHSTEP(t)


def linear_propagator(
    field: RadialField, tau: float, absorber: Optional[np.ndarray] = None
) -> RadialField:
    """Exact free Schrödinger flow over time ``tau`` (optionally damped near r_max)."""
    grid = field.grid
    if tau == 0.0 and absorber is None:
        return field
    k = grid.wavenumbers
    values = spectral.apply_radial_multiplier(
        field.values, grid.r, np.exp(-1j * k * k * tau)
    )
    if absorber is not None:
        values = values * np.exp(-absorber * tau)
    return field.with_values(values)


def nonlinear_phase(
    field: RadialField, tau: float, f1_on: bool = True, f2_on: bool = True
) -> RadialField:
    """Pointwise solution of i u_t = f1(u) + f2(u) with frozen modulus."""
    if not (f1_on or f2_on) or tau == 0.0:
        return field
    mod2 = np.abs(field.values) ** 2
    rate = np.zeros_like(mod2)
    if f1_on:
        rate += mod2 * mod2
    if f2_on:
        rate -= mod2
    return field.with_values(field.values * np.exp(1j * tau * rate))


def step(
    state: EvolveState,
    dt: float,
    f1_on: bool = True,
    f2_on: bool = True,
    absorber: Optional[np.ndarray] = None,
) -> EvolveState:
    """
    One Strang step.

    Raises:
        PreconditionError: If dt <= 0
        BlowUpSignal: If the step produced non-finite samples
    """
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    half = 0.5 * dt
    try:
        field = nonlinear_phase(state.field, half, f1_on, f2_on)
        field = linear_propagator(field, dt, absorber)
        field = nonlinear_phase(field, half, f1_on, f2_on)
    except FieldValidationError as exc:
        # RadialField rejects non-finite samples
        raise BlowUpSignal(state.t + dt, state.step_count + 1) from exc
    return EvolveState(
        t=state.t + dt, field=field, step_count=state.step_count + 1, dt_current=dt
    )


def adapt_dt(state: EvolveState, config: SimConfig) -> float:
    """
    dt = min(dt0, c_adapt / max_j(|u_j|^4 + |u_j|^2)).

    Raises:
        TimeStepFloorError: If the gradient-capped step drops below blowup_dt_floor
    """
    if config.adapt == "none":
        return config.dt0
    mod2 = np.abs(state.field.values) ** 2
    peak = float(np.max(mod2 * mod2 + mod2)) if mod2.size else 0.0
    dt = config.dt0 if peak == 0.0 else min(config.dt0, config.c_adapt / peak)
    if dt < config.blowup_dt_floor:
        raise TimeStepFloorError(dt, config.blowup_dt_floor)
    return dt


class _Observer:
    """Evaluates every recorded observable of one trajectory."""

    def __init__(self, grid: RadialGrid, config: SimConfig):
        self.weights: Dict[float, WeightSet] = {
            float(R): truncated_weight(R, WeightFamily.QUADRATIC_TRUNCATED, grid)
            for R in config.virial_R_list
        }
        self.moment = truncated_weight(None, WeightFamily.QUADRATIC, grid)
        self.exterior_radii = [float(R) for R in config.exterior_R_list]

    def new_record(self) -> TrajectoryRecord:
        return TrajectoryRecord(
            virial_radii=list(self.weights), exterior_radii=self.exterior_radii
        )

    def __call__(self, record: TrajectoryRecord, state: EvolveState) -> FunctionalReport:
        field = state.field
        report = FunctionalReport.from_norms(norm_quantities(field))
        density = gradient_density(field)
        virial = {
            R: (
                virial_value(field, w),
                virial_first_derivative(field, w),
                virial_second_derivative(field, w, density),
            )
            for R, w in self.weights.items()
        }
        exterior = {
            R: exterior_energy(field, R, density) for R in self.exterior_radii
        }
        record.add_sample(
            t=state.t,
            report=report,
            virial=virial,
            exterior=exterior,
            moment2=virial_value(field, self.moment),
            dt=state.dt_current,
        )
        return report


def _virial_concave(record: TrajectoryRecord, window: int) -> bool:
    """``window`` consecutive negative measured second differences of some V_R."""
    series = [record.measured_second_derivative(R) for R in record.virial_radii]
    if not series:
        series = [record.measured_second_derivative(None)]
    for d2 in series:
        defined = [v for v in d2 if v is not None]
        if len(defined) >= window and all(v < 0 for v in defined[-window:]):
            return True
    return False


def evolve(
    field: RadialField, config: SimConfig, m: Optional[float] = None
) -> Tuple[TrajectoryRecord, Verdict]:
    """
    Integrate to t_end or to a blow-up stop and classify the run.

    Stop reasons: t_end, gradient_blowup (||grad u||^2 >= factor^2 ||grad u0||^2
    together with a concave V_R window), dt_floor, non_finite, step_budget.
    Only a dt_floor stop may be called BlewUp without a passing certificate.
    """
    config.validate()
    grid = field.grid
    observe = _Observer(grid, config)
    record = observe.new_record()
    absorber = (
        absorbing_layer(grid, config.absorb_width, config.absorb_strength)
        if config.absorbing
        else None
    )

    # evolution works on plain samples; analytic provenance does not survive a step
    state = EvolveState(t=0.0, field=RadialField(grid, field.values), dt_current=0.0)
    g0 = observe(record, state).grad_norm_sq
    growth_bound = config.blowup_gradient_factor**2 * g0
    t_end = config.t_end
    last_observed = 0
    stop = "t_end"

    logger.info(
        "[Evolve] start r_max=%g n=%d dt0=%g t_end=%g adapt=%s grad0=%.6e",
        grid.r_max,
        grid.n,
        config.dt0,
        t_end,
        config.adapt,
        g0,
    )

    while state.t < t_end * (1.0 - 1e-14):
        if state.step_count >= config.max_steps:
            stop = "step_budget"
            break
        try:
            dt = adapt_dt(state, config)
        except TimeStepFloorError as exc:
            logger.info("[Evolve] dt floor at t=%r: %s", state.t, exc.message)
            stop = "dt_floor"
            break
        dt = min(dt, t_end - state.t)
        try:
            new_state = step(state, dt, config.f1_on, config.f2_on, absorber)
        except BlowUpSignal as exc:
            logger.info("[Evolve] %s", exc.message)
            stop = "non_finite"
            break
        strichartz_accumulate(record, new_state.field, dt)
        state = new_state

        finished = not state.t < t_end * (1.0 - 1e-14)
        if state.step_count % config.output_every == 0 or finished:
            report = observe(record, state)
            last_observed = state.step_count
            logger.debug(
                "[Evolve] t=%.6f step=%d dt=%.3e grad2=%.6e K=%.6e",
                state.t,
                state.step_count,
                dt,
                report.grad_norm_sq,
                report.K,
            )
            if (
                g0 > 0.0
                and report.grad_norm_sq >= growth_bound
                and _virial_concave(record, config.negative_window)
            ):
                stop = "gradient_blowup"
                break

    if state.step_count != last_observed and state.t > record.times[-1]:
        observe(record, state)

    record.stop_reason = stop
    record.stop_time = state.t
    verdict = scattering_verdict(record, config.thresholds(), m)
    logger.info(
        "[Evolve] stop=%s t=%.6g steps=%d verdict=%s",
        stop,
        state.t,
        state.step_count,
        verdict.kind.value,
    )
    return record, verdict


def evolve_mass_drift(record: TrajectoryRecord) -> float:
    """max_t |M(t) - M(0)| / M(0) over the recorded samples."""
    masses = [rep.mass for rep in record.reports]
    if not masses or masses[0] == 0.0:
        return 0.0
    return max(abs(mv - masses[0]) for mv in masses) / masses[0]


def evolve_energy_drift(record: TrajectoryRecord) -> float:
    energies = [rep.energy for rep in record.reports]
    if not energies or energies[0] == 0.0:
        return 0.0
    return max(abs(e - energies[0]) for e in energies) / abs(energies[0])
