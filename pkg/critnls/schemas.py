"""
Pydantic models for config files (``schema: 1``).

Every file mirrors SimConfig field-for-field; ``initial`` describes the
initial datum of an ``evolve`` run, ``eps_list`` and the dilation options
describe a ``dichotomy`` sweep.
"""

from typing import Annotated, Any, ClassVar, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GaussianSpec(_Strict):
    kind: Literal["gaussian"]
    amplitude: float = Field(1.0, description="Peak value")
    width: float = Field(1.0, gt=0, description="e^{-r^2/width^2}")


class GaussianMixtureSpec(_Strict):
    kind: Literal["gaussian_mixture"]
    weights: List[float] = Field(..., min_length=1)
    widths: List[Annotated[float, Field(gt=0)]] = Field(..., min_length=1)
    amplitude: float = 1.0
    dilation: float = Field(1.0, gt=0)


class AubinTalentiSpec(_Strict):
    kind: Literal["aubin_talenti"]
    amplitude: float = 1.0
    dilation: float = Field(1.0, gt=0)
    cutoff: Optional[float] = Field(None, gt=0)


class KDataSpec(_Strict):
    kind: Literal["k_data"]
    eps: float = Field(..., ge=-0.25, le=0.25)
    R: Optional[float] = Field(None, gt=0, description="Cutoff radius; searched if omitted")
    dilation: Optional[float] = Field(None, gt=0, description="Defaults to |eps|^3")


class FieldFileSpec(_Strict):
    kind: Literal["field_csv"]
    path: str = Field(..., description="CSV with header r,re,im on the config grid")


InitialDataSpec = Annotated[
    Union[GaussianSpec, GaussianMixtureSpec, AubinTalentiSpec, KDataSpec, FieldFileSpec],
    Field(discriminator="kind"),
]


class SimConfigFile(_Strict):
    schema_version: Literal[1] = Field(..., alias="schema")
    r_max: float = Field(60.0, gt=0)
    n: int = Field(8191, ge=16)
    dt0: float = Field(5e-4, gt=0)
    t_end: float = Field(1.0, gt=0)
    f1_on: bool = True
    f2_on: bool = True
    adapt: Literal["none", "gradient_capped"] = "gradient_capped"
    c_adapt: float = Field(0.1, gt=0)
    blowup_gradient_factor: float = Field(1e3, gt=0)
    blowup_dt_floor: float = Field(1e-9, gt=0)
    output_every: int = Field(10, ge=1)
    virial_R_list: List[float] = Field(default_factory=lambda: [5.0, 10.0])
    exterior_R_list: List[float] = Field(default_factory=lambda: [5.0, 10.0, 20.0])
    seed: int = 0
    absorbing: bool = False
    absorb_width: float = Field(0.1, gt=0, lt=1)
    absorb_strength: float = Field(1.0, ge=0)
    decay_factor: float = Field(10.0, gt=0)
    rate_floor: float = Field(1e-4, gt=0)
    late_fraction: float = Field(0.2, gt=0, lt=1)
    transient_fraction: float = Field(0.05, ge=0, lt=1)
    monotone_window: int = Field(5, ge=2)
    negative_window: int = Field(3, ge=1)
    max_steps: int = Field(10_000_000, ge=1)
    initial: Optional[InitialDataSpec] = None

    NON_SIM_KEYS: ClassVar[frozenset] = frozenset({"schema_version", "initial"})

    def sim_fields(self) -> Dict[str, Any]:
        return self.model_dump(exclude=set(self.NON_SIM_KEYS))


class DichotomyConfigFile(SimConfigFile):
    """
    Sweep file. Lengths are in units of each member's dilation lam, times in
    units of lam^2 and rate_floor is a fraction of ||u0||_5^5 unless the
    corresponding ``*_in_dilation_units`` / ``rate_floor_relative`` flag is off.
    """

    r_max: float = Field(250.0, gt=0)
    dt0: float = Field(1e-2, gt=0)
    t_end: float = Field(60.0, gt=0)
    blowup_dt_floor: float = Field(2.5e-3, gt=0)
    virial_R_list: List[float] = Field(default_factory=lambda: [40.0, 80.0])
    exterior_R_list: List[float] = Field(default_factory=lambda: [40.0, 80.0])
    absorbing: bool = True
    absorb_width: float = Field(0.2, gt=0, lt=1)
    rate_floor: float = Field(1e-2, gt=0)

    eps_list: List[float] = Field(
        default_factory=lambda: [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2], min_length=1
    )
    R: Optional[float] = Field(None, gt=0, description="Fixed cutoff; searched if omitted")
    dilation_rule: Literal["cubic", "quadratic"] = "quadratic"
    dilation_factor: float = Field(0.5, gt=0)
    time_in_dilation_units: bool = True
    grid_in_dilation_units: bool = True
    rate_floor_relative: bool = True
    workers: int = Field(1, ge=1)

    NON_SIM_KEYS: ClassVar[frozenset] = SimConfigFile.NON_SIM_KEYS | {
        "eps_list",
        "R",
        "dilation_rule",
        "dilation_factor",
        "time_in_dilation_units",
        "grid_in_dilation_units",
        "rate_floor_relative",
        "workers",
    }

    def sweep_options(self) -> Dict[str, Any]:
        return {
            "R": self.R,
            "dilation_rule": self.dilation_rule,
            "dilation_factor": self.dilation_factor,
            "time_in_dilation_units": self.time_in_dilation_units,
            "grid_in_dilation_units": self.grid_in_dilation_units,
            "rate_floor_relative": self.rate_floor_relative,
            "workers": self.workers,
        }


FILE_SCHEMAS = """\
Emitted files
  threshold.json      {m_closed_form, m_quadrature, sobolev_constant, discrepancy,
                       sobolev_relation_error, r_max, n}
  functionals.json    {mass, energy, critical_energy, K, K_Q, K_N, K_c, H, l2_norm_sq,
                       grad_norm_sq, l4_norm_4, l6_norm_6, boundary_mass_fraction}
  field.csv           header r,re,im; one row per interior node; 17 significant digits
  report.json         {eps, R, dilation, classification, grid, functionals}
  variational.json    {seed, count, generated, lemmas: {name: {checked, passed,
                       worst_margin}}, inf_mass_plus_energy_at_zero_K, all_passed}
  trajectory.csv      t,M,E,Ec,K,H,grad2,L4,L6,VR@R...,d2VR@R...,extE@R...,st5,st10,bmf,
                       dVR@R...,V2,dt   (V2: untruncated second moment)
  verdict.json        {kind, stop_reason, evidence, note, certificate}
  summary.json        {runs: [{eps, classification, verdict, stop_reason, peak_gradient,
                       stop_time, R, dilation, certificate_passed, error}]}
  eps_<eps>/          per dichotomy member: field.csv, trajectory.csv, verdict.json
  bubble.json         {nu, k_star, r_star, h, correlation_if_reference_given,
                       remainder_nu}
  profile.csv         extracted profile, field.csv format

Config files (JSON, "schema": 1) mirror SimConfig; evolve adds "initial"
({"kind": "gaussian" | "gaussian_mixture" | "aubin_talenti" | "k_data" |
"field_csv", ...}); dichotomy adds eps_list (each entry runs at both signs), R,
dilation_rule ("cubic" | "quadratic"), dilation_factor, time_in_dilation_units,
grid_in_dilation_units, rate_floor_relative, workers.
"""
