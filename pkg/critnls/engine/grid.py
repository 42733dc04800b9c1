"""
Radial grids, sampled fields, quadrature and rescaling.

Nodes r_j = j dr (j = 1..n, dr = r_max / (n + 1)) carry the interior samples;
u(r_max) = 0 for plain fields. Quadrature is the composite trapezoid rule on
[0, r_max] with weights w_j = 4 pi r_j^2 dr; the node at r = 0 has zero
weight and the boundary node contributes 2 pi r_max^2 dr times the boundary
value. Fields sampled from a slowly decaying analytic profile keep a
reference to it: their boundary value is the profile's value at r_max and
the exact tail beyond r_max is added by the norm kernels.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from ..exceptions import RangeError, SamplingError, ShapeError
from ..validators import FieldValidator, GridValidator
from . import spectral
from .profiles import ZERO_NORMS, AnalyticProfile, ProfileNorms

logger = logging.getLogger(__name__)

BOUNDARY_SHELL = 0.9
NEGLIGIBLE_TAIL = 1e-12


@dataclass(frozen=True)
class RadialGrid:
    """Uniform interior grid on (0, r_max)."""

    r_max: float
    n: int

    def __post_init__(self):
        GridValidator.validate(self.r_max, self.n)
        object.__setattr__(self, "r_max", float(self.r_max))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dr(self) -> float:
        return self.r_max / (self.n + 1)

    @cached_property
    def r(self) -> np.ndarray:
        nodes = self.dr * np.arange(1, self.n + 1, dtype=float)
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def weights(self) -> np.ndarray:
        w = 4.0 * np.pi * self.r**2 * self.dr
        w.setflags(write=False)
        return w

    @property
    def boundary_weight(self) -> float:
        return 2.0 * math.pi * self.r_max**2 * self.dr

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """kappa_k = k pi / r_max of the sine modes."""
        k = np.pi * np.arange(1, self.n + 1, dtype=float) / self.r_max
        k.setflags(write=False)
        return k

    @property
    def nyquist(self) -> float:
        return float(self.wavenumbers[-1])

    def to_dict(self):
        return {"r_max": self.r_max, "n": self.n, "dr": self.dr}


def make_grid(r_max: float, n: int) -> RadialGrid:
    """Build a grid; invalid sizes raise ConfigurationError."""
    return RadialGrid(r_max=r_max, n=n)


class RadialField:
    """
    Immutable complex samples u_j = u(r_j) on a RadialGrid.

    ``profile`` records analytic provenance; kernels use it for exact
    derivatives, the boundary value and the tail beyond r_max.
    """

    __slots__ = ("grid", "values", "profile")

    def __init__(
        self,
        grid: RadialGrid,
        values,
        profile: Optional[AnalyticProfile] = None,
    ):
        arr = np.array(values, dtype=np.complex128)
        FieldValidator.validate_samples(arr, grid.n)
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "profile", profile)

    def __setattr__(self, name, value):
        raise AttributeError("RadialField is immutable")

    def __repr__(self) -> str:
        source = self.profile.kind if self.profile is not None else "samples"
        return (
            f"RadialField(r_max={self.grid.r_max}, n={self.grid.n}, source={source})"
        )

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.n, dtype=np.complex128))

    def with_values(self, values) -> "RadialField":
        """New plain field on the same grid (provenance dropped)."""
        return RadialField(self.grid, values)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @property
    def extends_beyond_grid(self) -> bool:
        return self.profile is not None and self.profile.support_radius > self.grid.r_max

    @property
    def boundary_value(self) -> complex:
        if self.extends_beyond_grid:
            return complex(self.profile(self.grid.r_max))
        return 0j

    def tail(self) -> ProfileNorms:
        """Norms beyond r_max (zero unless the analytic profile extends past it)."""
        if self.extends_beyond_grid:
            return self.profile.tail(self.grid.r_max)
        return ZERO_NORMS


def sample(profile: AnalyticProfile, grid: RadialGrid) -> RadialField:
    """u_j = profile(r_j) exactly."""
    values = np.asarray(profile(grid.r), dtype=np.complex128)
    bad = int(np.count_nonzero(~np.isfinite(values)))
    if bad:
        raise SamplingError(profile.kind, bad)
    return RadialField(grid, values, profile=profile)


def integrate(density, grid: RadialGrid, boundary_value: float = 0.0) -> float:
    """
    sum_j w_j d_j plus the boundary half-weight times ``boundary_value``.

    Raises:
        ShapeError: If density does not have grid.n samples
    """
    d = np.asarray(density, dtype=float)
    if d.ndim != 1 or d.shape[0] != grid.n:
        raise ShapeError(grid.n, int(d.size), "density")
    return float(np.dot(grid.weights, d) + grid.boundary_weight * boundary_value)


def radial_derivative(field: RadialField) -> np.ndarray:
    """du/dr at the nodes: exact for analytic provenance, spectral otherwise."""
    if field.profile is not None:
        return np.asarray(field.profile.derivative(field.grid.r), dtype=np.complex128)
    return spectral.spectral_radial_derivative(
        field.values, field.grid.r, field.grid.wavenumbers
    )


def gradient_density(field: RadialField) -> np.ndarray:
    """|u'(r_j)|^2."""
    return np.abs(radial_derivative(field)) ** 2


def gradient_norm_sq(field: RadialField) -> float:
    """
    ||grad u||^2.

    Analytic provenance: trapezoid of the exact derivative plus boundary and
    tail terms. Plain samples: Parseval of the sine series, which is what the
    linear propagator conserves.
    """
    grid = field.grid
    if field.profile is not None:
        boundary = 0.0
        if field.extends_beyond_grid:
            boundary = float(abs(field.profile.derivative(grid.r_max)) ** 2)
        return integrate(gradient_density(field), grid, boundary) + field.tail().grad
    return spectral.spectral_gradient_norm_sq(field.values, grid.r, grid.wavenumbers)


def power_norm(field: RadialField, power: int) -> float:
    """int |u|^p dx including boundary and analytic tail contributions."""
    grid = field.grid
    density = np.abs(field.values) ** power
    boundary = abs(field.boundary_value) ** power
    total = integrate(density, grid, boundary)
    tail = field.tail()
    extra = {2: tail.l2, 4: tail.l4, 6: tail.l6}.get(power)
    if extra is None:
        if field.extends_beyond_grid:
            raise RangeError(f"no analytic tail available for the L^{power} norm")
        extra = 0.0
    return total + extra


def boundary_mass_fraction(field: RadialField) -> float:
    """Share of the on-grid mass carried by r > 0.9 r_max."""
    grid = field.grid
    density = grid.weights * np.abs(field.values) ** 2
    total = float(np.sum(density))
    if total == 0.0:
        return 0.0
    return float(np.sum(density[grid.r > BOUNDARY_SHELL * grid.r_max]) / total)


def laplacian_residual(field: RadialField, power: int = 5) -> np.ndarray:
    """
    Samples of Δu + |u|^{power-1} u using fourth-order differences of v = r u
    (Δu = v'' / r). Interior nodes only; the two nodes next to each end use
    the odd extension at r = 0 and the boundary value at r_max.
    """
    grid = field.grid
    u = field.values
    v = np.empty(grid.n + 4, dtype=np.complex128)
    v[2:-2] = grid.r * u
    v[1] = 0.0
    v[0] = -v[2]
    rb = grid.r_max
    v[-2] = rb * field.boundary_value
    if field.profile is not None:
        v[-1] = (rb + grid.dr) * complex(field.profile(rb + grid.dr))
    else:
        v[-1] = -v[-3]
    dr2 = grid.dr**2
    d2v = (-v[4:] + 16.0 * v[3:-1] - 30.0 * v[2:-2] + 16.0 * v[1:-3] - v[:-4]) / (
        12.0 * dr2
    )
    return d2v / grid.r + np.abs(u) ** (power - 1) * u


def scale_field(
    source: Union[AnalyticProfile, RadialField],
    lam: float,
    amplitude_exponent: int = 3,
    grid: Optional[RadialGrid] = None,
) -> RadialField:
    """
    e^{a lam} phi(e^{2 lam} x) sampled on ``grid`` (default: the source grid).

    Analytic inputs, and fields that carry analytic provenance, are rescaled
    exactly. Plain fields are resampled with a cubic spline through v = r u.

    Raises:
        RangeError: If resampling reaches beyond the source grid while the
            source carries non-negligible mass there
    """
    if not math.isfinite(lam):
        raise RangeError(f"scaling parameter must be finite, got {lam!r}")
    if amplitude_exponent not in (1, 3):
        raise RangeError(f"amplitude exponent must be 1 or 3, got {amplitude_exponent}")

    if isinstance(source, AnalyticProfile):
        if grid is None:
            raise RangeError("a target grid is required to sample an analytic profile")
        return sample(source.scaled(lam, amplitude_exponent), grid)

    target = grid or source.grid
    if source.profile is not None:
        return sample(source.profile.scaled(lam, amplitude_exponent), target)
    if lam == 0.0 and target == source.grid:
        return source

    src = source.grid
    stretch = math.exp(2.0 * lam)
    query = stretch * target.r
    outside = query >= src.r_max
    if np.any(outside):
        cut = src.r_max / stretch
        density = src.weights * np.abs(source.values) ** 2
        total = float(np.sum(density))
        beyond = float(np.sum(density[src.r >= cut]))
        if total > 0 and beyond > NEGLIGIBLE_TAIL * total:
            raise RangeError(
                "rescaled field samples beyond the source grid where the source "
                "carries mass",
                details={"lam": lam, "mass_fraction_beyond": beyond / total},
            )

    knots = np.concatenate([[0.0], src.r, [src.r_max]])
    v = np.concatenate([[0.0], src.r * source.values, [0.0]])
    spline_re = CubicSpline(knots, v.real, bc_type="natural")
    spline_im = CubicSpline(knots, v.imag, bc_type="natural")
    inside = ~outside
    values = np.zeros(target.n, dtype=np.complex128)
    q = query[inside]
    values[inside] = (spline_re(q) + 1j * spline_im(q)) / q
    values *= math.exp(amplitude_exponent * lam)
    return RadialField(target, values)
