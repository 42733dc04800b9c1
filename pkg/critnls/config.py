"""
Configuration management for critnls
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List

from .exceptions import ConfigurationError, UsageError
from .validators import ParameterValidator

if TYPE_CHECKING:
    from .engine.diagnostics import VerdictThresholds
    from .engine.grid import RadialGrid


@dataclass
class SimConfig:
    """
    Configuration of one trajectory

    Attributes:
        r_max: Outer radius of the radial grid
        n: Interior node count (n + 1 must factor into small primes)
        dt0: Initial (and maximal) time step
        t_end: Final time
        f1_on: Enable the focusing quintic term -|u|^4 u
        f2_on: Enable the defocusing cubic term |u|^2 u
        adapt: 'none' or 'gradient_capped'
        c_adapt: Constant in dt = min(dt0, c_adapt / max(|u|^4 + |u|^2))
        blowup_gradient_factor: Gradient growth factor declaring blow-up
        blowup_dt_floor: Smallest admissible adaptive step
        output_every: Steps between recorded samples
        virial_R_list: Radii of the truncated virial weights
        exterior_R_list: Radii of the exterior energies
        seed: Seed recorded with the run
        absorbing: Enable the damping layer near r_max
        absorb_width: Width of the damping layer as a fraction of r_max
        absorb_strength: Peak damping rate of the layer
        decay_factor: Potential-energy decay required for ScatteredLike
        rate_floor: Late-run st5 growth rate below which the run counts as dispersed
        late_fraction: Final fraction of the run used for the st5 rate
        transient_fraction: Leading fraction of samples excluded from certificates
        monotone_window: Samples that must show non-decreasing gradient at a dt-floor stop
        negative_window: Consecutive negative second differences of V_R for a gradient stop
        max_steps: Hard step budget
    """

    r_max: float = 60.0
    n: int = 8191
    dt0: float = 5e-4
    t_end: float = 1.0
    f1_on: bool = True
    f2_on: bool = True
    adapt: str = "gradient_capped"
    c_adapt: float = 0.1
    blowup_gradient_factor: float = 1e3
    blowup_dt_floor: float = 1e-9
    output_every: int = 10
    virial_R_list: List[float] = field(default_factory=lambda: [5.0, 10.0])
    exterior_R_list: List[float] = field(default_factory=lambda: [5.0, 10.0, 20.0])
    seed: int = 0
    absorbing: bool = False
    absorb_width: float = 0.1
    absorb_strength: float = 1.0
    decay_factor: float = 10.0
    rate_floor: float = 1e-4
    late_fraction: float = 0.2
    transient_fraction: float = 0.05
    monotone_window: int = 5
    negative_window: int = 3
    max_steps: int = 10_000_000

    _VALID_ADAPT = frozenset({"none", "gradient_capped"})

    def validate(self) -> bool:
        """
        Validate configuration.

        Raises:
            ConfigurationError: On the first invalid entry
        """
        from .engine.grid import RadialGrid

        RadialGrid(self.r_max, self.n)

        for name in ("dt0", "t_end", "c_adapt", "blowup_gradient_factor",
                     "blowup_dt_floor", "decay_factor", "rate_floor"):
            ParameterValidator.positive(name, getattr(self, name))
        if self.adapt not in self._VALID_ADAPT:
            raise ConfigurationError(
                f"adapt must be one of: {sorted(self._VALID_ADAPT)}"
            )
        if self.blowup_dt_floor >= self.dt0:
            raise ConfigurationError("blowup_dt_floor must be smaller than dt0")
        if self.output_every < 1 or self.max_steps < 1:
            raise ConfigurationError("output_every and max_steps must be >= 1")
        if self.monotone_window < 2 or self.negative_window < 1:
            raise ConfigurationError("monotone_window >= 2 and negative_window >= 1")
        ParameterValidator.fraction("late_fraction", self.late_fraction)
        ParameterValidator.fraction("absorb_width", self.absorb_width)
        ParameterValidator.fraction("transient_fraction", self.transient_fraction, allow_zero=True)
        if self.absorb_strength < 0:
            raise ConfigurationError("absorb_strength must be >= 0")
        # the truncated weights reach out to 3R
        ParameterValidator.radii("virial_R_list", self.virial_R_list, self.r_max / 3.0, inclusive=False)
        ParameterValidator.radii("exterior_R_list", self.exterior_R_list, self.r_max, allow_zero=True)
        return True

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown SimConfig keys: {unknown}")
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        """Load a ``schema: 1`` JSON config file (initial-data section ignored)."""
        from .schemas import SimConfigFile

        document = load_config_document(path)
        model = SimConfigFile.model_validate(document)
        return cls.from_dict(model.sim_fields())

    def with_overrides(self, **overrides: Any) -> "SimConfig":
        """Flags override config; ``None`` values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        config = replace(self, **changes)
        config.validate()
        return config

    def make_grid(self) -> "RadialGrid":
        from .engine.grid import make_grid

        return make_grid(self.r_max, self.n)

    def thresholds(self) -> "VerdictThresholds":
        from .engine.diagnostics import VerdictThresholds

        return VerdictThresholds(
            decay_factor=self.decay_factor,
            rate_floor=self.rate_floor,
            late_fraction=self.late_fraction,
            transient_fraction=self.transient_fraction,
            monotone_window=self.monotone_window,
        )

    @classmethod
    def from_env(cls) -> "SimConfig":
        """Defaults, with the grid optionally taken from CRITNLS_R_MAX / CRITNLS_N."""
        config = cls()
        if os.getenv("CRITNLS_R_MAX"):
            config.r_max = float(os.environ["CRITNLS_R_MAX"])
        if os.getenv("CRITNLS_N"):
            config.n = int(os.environ["CRITNLS_N"])
        config.validate()
        return config


def load_config_document(path) -> Dict[str, Any]:
    """
    Read a JSON config file.

    Raises:
        UsageError: If the file is missing or not valid JSON
    """
    target = Path(path)
    if not target.is_file():
        raise UsageError(f"config file not found: {target}")
    try:
        with open(target, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise UsageError("config file must hold a JSON object")
    return document
