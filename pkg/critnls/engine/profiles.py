"""
Closed-form radial profiles.

Every profile is phi(r) = amplitude * f(r / dilation) for a unit shape f, so
the (a, -2) rescaling e^{a lam} phi(e^{2 lam} x) is exact: it only updates
(amplitude, dilation). Norms follow from the unit-shape norms by change of
variables:

    ||phi||_p^p      = A^p s^3 ||f||_p^p
    ||grad phi||_2^2 = A^2 s   ||grad f||_2^2
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from itertools import combinations_with_replacement
from typing import Any, ClassVar, Dict, Optional, Tuple

import numpy as np
from cachetools import LRUCache, cached
from scipy import integrate
from scipy.interpolate import CubicSpline

from ..exceptions import ConfigurationError
from .cutoff import smooth_cutoff

logger = logging.getLogger(__name__)

_PI32 = math.pi**1.5
_SQRT3 = math.sqrt(3.0)
_QUAD_OPTS = {"epsabs": 0.0, "epsrel": 1e-13, "limit": 400}


@dataclass(frozen=True)
class ProfileNorms:
    """||phi||_2^2, ||grad phi||_2^2, ||phi||_4^4, ||phi||_6^6"""

    l2: float
    grad: float
    l4: float
    l6: float

    def dilate(self, amplitude: float, dilation: float) -> "ProfileNorms":
        a2 = amplitude * amplitude
        s3 = dilation**3
        return ProfileNorms(
            l2=a2 * s3 * self.l2,
            grad=a2 * dilation * self.grad,
            l4=a2 * a2 * s3 * self.l4,
            l6=a2 * a2 * a2 * s3 * self.l6,
        )

    def __add__(self, other: "ProfileNorms") -> "ProfileNorms":
        return ProfileNorms(
            self.l2 + other.l2,
            self.grad + other.grad,
            self.l4 + other.l4,
            self.l6 + other.l6,
        )

    def __sub__(self, other: "ProfileNorms") -> "ProfileNorms":
        return ProfileNorms(
            self.l2 - other.l2,
            self.grad - other.grad,
            self.l4 - other.l4,
            self.l6 - other.l6,
        )


ZERO_NORMS = ProfileNorms(0.0, 0.0, 0.0, 0.0)


def _shell_integrals(shape, shape_derivative, a: float, b: float) -> ProfileNorms:
    """int_a^b of |f|^p 4 pi r^2 dr and |f'|^2 4 pi r^2 dr by adaptive quadrature."""
    if b <= a:
        return ZERO_NORMS

    def density(power):
        return lambda r: 4.0 * math.pi * r * r * abs(float(shape(r))) ** power

    def grad_density(r):
        return 4.0 * math.pi * r * r * float(shape_derivative(r)) ** 2

    # geometric breakpoints keep quad accurate on long, slowly decaying ranges
    if a > 0 and b / a > 8:
        edges = np.geomspace(a, b, int(math.log2(b / a)) + 2)
    elif a == 0 and b > 8:
        edges = np.concatenate([[0.0], np.geomspace(1.0, b, int(math.log2(b)) + 2)])
    else:
        edges = np.array([a, b])

    def total(func):
        return math.fsum(
            integrate.quad(func, lo, hi, **_QUAD_OPTS)[0]
            for lo, hi in zip(edges[:-1], edges[1:])
        )

    return ProfileNorms(
        l2=total(density(2)),
        grad=total(grad_density),
        l4=total(density(4)),
        l6=total(density(6)),
    )


class AnalyticProfile(ABC):
    """A radial function with exact samples, derivative, rescalings and norms."""

    kind: ClassVar[str] = "abstract"

    amplitude: float
    dilation: float

    @abstractmethod
    def _shape(self, rho: np.ndarray) -> np.ndarray:
        """Unit shape f(rho)."""

    @abstractmethod
    def _shape_derivative(self, rho: np.ndarray) -> np.ndarray:
        """f'(rho)."""

    @abstractmethod
    def unit_norms(self) -> ProfileNorms:
        """Norms of the unit shape f."""

    @property
    def unit_support(self) -> float:
        """Radius beyond which f vanishes identically (inf if never)."""
        return math.inf

    def evaluate(self, r) -> np.ndarray:
        return self.amplitude * self._shape(np.asarray(r, dtype=float) / self.dilation)

    __call__ = evaluate

    def derivative(self, r) -> np.ndarray:
        rho = np.asarray(r, dtype=float) / self.dilation
        return self.amplitude / self.dilation * self._shape_derivative(rho)

    @property
    def support_radius(self) -> float:
        return self.dilation * self.unit_support

    def scaled(self, lam: float, amplitude_exponent: int = 3) -> "AnalyticProfile":
        """Exact e^{a lam} phi(e^{2 lam} x)."""
        return replace(
            self,
            amplitude=self.amplitude * math.exp(amplitude_exponent * lam),
            dilation=self.dilation * math.exp(-2.0 * lam),
        )

    def norms(self) -> ProfileNorms:
        return self.unit_norms().dilate(self.amplitude, self.dilation)

    def unit_tail(self, rho: float) -> ProfileNorms:
        """Norms of f restricted to |x| >= rho."""
        if rho >= self.unit_support:
            return ZERO_NORMS
        upper = self.unit_support
        if math.isinf(upper):
            # integrate out to where the integrands fall below double precision
            upper = max(rho, 1.0)
            while abs(float(self._shape(upper))) > 1e-30 and upper < 1e8:
                upper *= 2.0
        return _shell_integrals(self._shape, self._shape_derivative, rho, upper)

    def tail(self, r: float) -> ProfileNorms:
        """Norms of phi restricted to |x| >= r."""
        return self.unit_tail(r / self.dilation).dilate(self.amplitude, self.dilation)

    def to_dict(self) -> Dict[str, Any]:
        payload = {"kind": self.kind}
        payload.update(
            {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}
        )
        return payload


# ── Gaussians ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Gaussian(AnalyticProfile):
    """amplitude * exp(-r^2 / width^2); ``dilation`` is the width."""

    kind: ClassVar[str] = "gaussian"

    amplitude: float = 1.0
    dilation: float = 1.0

    def _shape(self, rho):
        return np.exp(-rho * rho)

    def _shape_derivative(self, rho):
        return -2.0 * rho * np.exp(-rho * rho)

    def unit_norms(self) -> ProfileNorms:
        return ProfileNorms(
            l2=_PI32 / 2.0**1.5,
            grad=3.0 * _PI32 / (2.0 * math.sqrt(2.0)),
            l4=_PI32 / 8.0,
            l6=_PI32 / 6.0**1.5,
        )


@dataclass(frozen=True)
class GaussianMixture(AnalyticProfile):
    """
    amplitude * sum_i weights[i] * exp(-(r/dilation)^2 / widths[i]^2).

    Real weights of either sign. Norms are exact: every power of a Gaussian
    sum expands into Gaussians, and int exp(-c r^2) 4 pi r^2 dr = pi^1.5 c^-1.5.
    """

    kind: ClassVar[str] = "gaussian_mixture"

    weights: Tuple[float, ...] = (1.0,)
    widths: Tuple[float, ...] = (1.0,)
    amplitude: float = 1.0
    dilation: float = 1.0

    def __post_init__(self):
        if len(self.weights) != len(self.widths) or not self.weights:
            raise ConfigurationError("weights and widths must be non-empty and aligned")
        if any(w <= 0 for w in self.widths):
            raise ConfigurationError("widths must be positive")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))

    @property
    def _rates(self) -> np.ndarray:
        return 1.0 / np.asarray(self.widths) ** 2

    def _shape(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros_like(rho)
        for weight, rate in zip(self.weights, self._rates):
            out = out + weight * np.exp(-rate * rho * rho)
        return out

    def _shape_derivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros_like(rho)
        for weight, rate in zip(self.weights, self._rates):
            out = out - 2.0 * rate * weight * rho * np.exp(-rate * rho * rho)
        return out

    def _power_moment(self, power: int) -> float:
        weights = np.asarray(self.weights)
        rates = self._rates
        total = []
        for combo in combinations_with_replacement(range(len(weights)), power):
            counts = np.bincount(combo, minlength=len(weights))
            multinomial = math.factorial(power) / math.prod(
                math.factorial(int(c)) for c in counts
            )
            total.append(
                multinomial
                * float(np.prod(weights**counts))
                * float(counts @ rates) ** -1.5
            )
        return _PI32 * math.fsum(total)

    def unit_norms(self) -> ProfileNorms:
        weights = np.asarray(self.weights)
        rates = self._rates
        # |f'|^2 = 4 r^2 sum_ij w_i w_j a_i a_j exp(-(a_i + a_j) r^2)
        pair = np.add.outer(rates, rates)
        coeff = np.outer(weights * rates, weights * rates)
        grad = 6.0 * _PI32 * float(np.sum(coeff * pair**-2.5))
        return ProfileNorms(
            l2=self._power_moment(2),
            grad=grad,
            l4=self._power_moment(4),
            l6=self._power_moment(6),
        )


# ── Aubin–Talenti family ──────────────────────────────────────────────────────


def _theta(rho: float) -> float:
    return math.atan(rho / _SQRT3)


def _w_outer_integrals(rho: float) -> ProfileNorms:
    """
    Exact norms of W on |x| >= rho.

    With r = sqrt(3) tan(theta) the densities become trigonometric:
      |grad W|^2 dx -> 4 sqrt3 pi sin^4(theta) dtheta
      |W|^6 dx      -> 3 sqrt3 pi sin^2(2 theta) dtheta
      |W|^4 dx      -> 12 sqrt3 pi sin^2(theta) dtheta
    For large rho these reduce to 12 pi / rho, 36 pi / (3 rho^3) and
    12 sqrt3 pi (sqrt3 / rho).
    """
    if math.isinf(rho):
        return ZERO_NORMS

    def sin4(t):
        return 3.0 * t / 8.0 - math.sin(2.0 * t) / 4.0 + math.sin(4.0 * t) / 32.0

    def sin2_double(t):
        return t / 2.0 - math.sin(4.0 * t) / 8.0

    def sin2(t):
        return t / 2.0 - math.sin(2.0 * t) / 4.0

    half_pi = math.pi / 2.0
    theta = _theta(rho)
    c = _SQRT3 * math.pi
    return ProfileNorms(
        l2=math.inf,
        grad=4.0 * c * (sin4(half_pi) - sin4(theta)),
        l4=12.0 * c * (sin2(half_pi) - sin2(theta)),
        l6=3.0 * c * (sin2_double(half_pi) - sin2_double(theta)),
    )


def _w_inner_integrals(rho: float) -> ProfileNorms:
    """Exact norms of W on |x| <= rho."""
    full = _w_outer_integrals(0.0)
    outer = _w_outer_integrals(rho)
    # int_0^rho (1 + r^2/3)^-1 4 pi r^2 dr = 12 pi (rho - sqrt3 atan(rho/sqrt3))
    l2 = 12.0 * math.pi * (rho - _SQRT3 * _theta(rho))
    return ProfileNorms(
        l2=l2,
        grad=full.grad - outer.grad,
        l4=full.l4 - outer.l4,
        l6=full.l6 - outer.l6,
    )


def w_shape(rho):
    return 1.0 / np.sqrt(1.0 + np.asarray(rho, dtype=float) ** 2 / 3.0)


def w_shape_derivative(rho):
    rho = np.asarray(rho, dtype=float)
    return -(rho / 3.0) * (1.0 + rho * rho / 3.0) ** -1.5


@cached(cache=LRUCache(maxsize=256))
def _truncated_w_norms(cutoff: float) -> ProfileNorms:
    """Norms of chi(rho / cutoff) W(rho): exact on the core, quad on the annulus."""

    def shape(rho):
        return w_shape(rho) * smooth_cutoff(rho / cutoff)

    def shape_derivative(rho):
        return w_shape_derivative(rho) * smooth_cutoff(rho / cutoff) + w_shape(
            rho
        ) * smooth_cutoff(rho / cutoff, 1) / cutoff

    annulus = _shell_integrals(shape, shape_derivative, cutoff, 2.0 * cutoff)
    logger.debug("[Profiles] truncated W norms computed for cutoff=%g", cutoff)
    return _w_inner_integrals(cutoff) + annulus


@dataclass(frozen=True)
class AubinTalentiBubble(AnalyticProfile):
    """
    amplitude * chi(r / (cutoff * dilation)) * W(r / dilation),
    W(rho) = (1 + rho^2 / 3)^{-1/2}.

    ``cutoff=None`` is the untruncated ground state (not in L^2).
    """

    kind: ClassVar[str] = "aubin_talenti"

    amplitude: float = 1.0
    dilation: float = 1.0
    cutoff: Optional[float] = None

    def __post_init__(self):
        if self.cutoff is not None and not self.cutoff > 0:
            raise ConfigurationError("cutoff must be positive")

    def _shape(self, rho):
        if self.cutoff is None:
            return w_shape(rho)
        return w_shape(rho) * smooth_cutoff(np.asarray(rho, dtype=float) / self.cutoff)

    def _shape_derivative(self, rho):
        if self.cutoff is None:
            return w_shape_derivative(rho)
        rho = np.asarray(rho, dtype=float)
        chi = smooth_cutoff(rho / self.cutoff)
        dchi = smooth_cutoff(rho / self.cutoff, 1) / self.cutoff
        return w_shape_derivative(rho) * chi + w_shape(rho) * dchi

    @property
    def unit_support(self) -> float:
        return math.inf if self.cutoff is None else 2.0 * self.cutoff

    def unit_norms(self) -> ProfileNorms:
        if self.cutoff is None:
            return _w_outer_integrals(0.0)
        return _truncated_w_norms(float(self.cutoff))

    def unit_tail(self, rho: float) -> ProfileNorms:
        if self.cutoff is None:
            return _w_outer_integrals(rho)
        if rho >= 2.0 * self.cutoff:
            return ZERO_NORMS
        if rho <= self.cutoff:
            inner = _w_inner_integrals(rho)
            return self.unit_norms() - inner
        return super().unit_tail(rho)


# ── Tabulated ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TabulatedProfile(AnalyticProfile):
    """
    Cubic spline through a user table (radii, values), zero beyond the last
    radius. The spline has zero slope at r = 0.
    """

    kind: ClassVar[str] = "table"

    radii: Tuple[float, ...] = field(default_factory=tuple)
    values: Tuple[float, ...] = field(default_factory=tuple)
    amplitude: float = 1.0
    dilation: float = 1.0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        values = tuple(float(v) for v in self.values)
        if len(radii) < 4 or len(radii) != len(values):
            raise ConfigurationError("table needs at least 4 aligned (radius, value) rows")
        if radii[0] != 0.0 or any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigurationError("table radii must start at 0 and increase strictly")
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError("table values must be finite")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.radii, self.values, bc_type=((1, 0.0), "natural"))

    @property
    def unit_support(self) -> float:
        return self.radii[-1]

    def _shape(self, rho):
        rho = np.asarray(rho, dtype=float)
        inside = rho <= self.radii[-1]
        return np.where(inside, self._spline(np.clip(rho, 0.0, self.radii[-1])), 0.0)

    def _shape_derivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        inside = rho <= self.radii[-1]
        return np.where(
            inside, self._spline(np.clip(rho, 0.0, self.radii[-1]), 1), 0.0
        )

    @cached_property
    def _unit_norms(self) -> ProfileNorms:
        pieces = [
            _shell_integrals(self._shape, self._shape_derivative, lo, hi)
            for lo, hi in zip(self.radii[:-1], self.radii[1:])
        ]
        total = ZERO_NORMS
        for piece in pieces:
            total = total + piece
        return total

    def unit_norms(self) -> ProfileNorms:
        return self._unit_norms


PROFILE_KINDS = {
    cls.kind: cls for cls in (Gaussian, GaussianMixture, AubinTalentiBubble, TabulatedProfile)
}


def profile_from_dict(payload: Dict[str, Any]) -> AnalyticProfile:
    """Rebuild a profile from ``to_dict`` output."""
    data = dict(payload)
    kind = data.pop("kind", None)
    if kind not in PROFILE_KINDS:
        raise ConfigurationError(f"unknown profile kind: {kind!r}")
    for key in ("weights", "widths", "radii", "values"):
        if key in data:
            data[key] = tuple(data[key])
    return PROFILE_KINDS[kind](**data)
