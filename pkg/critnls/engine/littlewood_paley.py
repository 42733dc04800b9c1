"""
Dyadic frequency blocks of radial fields and single-bubble extraction.

The symbol Λ̃₀(ξ) is the package cutoff chi(|ξ|): 1 for |ξ| <= 1, 0 for
|ξ| >= 2. Shells are differences of its dyadic dilates,

    Λ̃_k(ξ) = Λ̃₀(2^{-k} ξ) - Λ̃₀(2^{-k+1} ξ),   k >= 1,

realized as diagonal multipliers on the sine coefficients of r u. The low
block Λ₀ plays the role of k = 0 in the B^{-3/2}_{∞,∞} supremum.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import PreconditionError, RangeError
from . import spectral
from .cutoff import smooth_cutoff
from .grid import RadialField, RadialGrid, integrate, scale_field

logger = logging.getLogger(__name__)

BAND_OCTAVES = 3
WINDOW_SCALES = 4.0
PROFILE_GRID = RadialGrid(r_max=16.0, n=4095)


def max_shell(grid: RadialGrid) -> int:
    """Smallest k with 2^k >= the largest grid wavenumber."""
    return max(1, int(math.ceil(math.log2(grid.nyquist))))


def _lowpass_symbol(kappa: np.ndarray, k: int) -> np.ndarray:
    return smooth_cutoff(kappa / 2.0**k)


@dataclass(frozen=True)
class ShellDecomposition:
    """Blocks P_{<k_min} v, Λ_k v (k_min..k_max) and the remainder above 2^{k_max+1}."""

    grid: RadialGrid
    k_min: int
    k_max: int
    low: np.ndarray
    shells: Dict[int, np.ndarray]
    high: np.ndarray

    def reconstruct(self) -> np.ndarray:
        total = self.low + self.high
        for values in self.shells.values():
            total = total + values
        return total

    def block(self, k: int) -> np.ndarray:
        """Shell k, with the low block standing in for every k < k_min."""
        if k < self.k_min:
            return self.low
        return self.shells[k]

    def l2_norms_sq(self) -> Dict[str, float]:
        out = {"low": integrate(np.abs(self.low) ** 2, self.grid)}
        for k, values in self.shells.items():
            out[str(k)] = integrate(np.abs(values) ** 2, self.grid)
        out["high"] = integrate(np.abs(self.high) ** 2, self.grid)
        return out

    def overlap_weights(self) -> np.ndarray:
        """Sum of squared multipliers per sine mode (1 would mean orthogonal blocks)."""
        kappa = self.grid.wavenumbers
        low = _lowpass_symbol(kappa, self.k_min - 1)
        total = low**2
        previous = low
        for k in range(self.k_min, self.k_max + 1):
            current = _lowpass_symbol(kappa, k)
            total = total + (current - previous) ** 2
            previous = current
        return total + (1.0 - previous) ** 2


def dyadic_decompose(
    field: RadialField, k_range: Optional[Tuple[int, int]] = None
) -> ShellDecomposition:
    """
    Split ``field`` into dyadic shells.

    Args:
        k_range: (k_min, k_max), default (1, ceil(log2 kappa_max))

    Raises:
        RangeError: If k_max lies more than one octave above the grid Nyquist
    """
    grid = field.grid
    top = max_shell(grid)
    k_min, k_max = k_range if k_range is not None else (1, top)
    if k_min < 1 or k_max < k_min:
        raise RangeError(f"invalid shell range ({k_min}, {k_max})")
    if k_max > top + 1:
        raise RangeError(
            f"k_max = {k_max} beyond grid Nyquist (largest useful shell {top + 1})",
            details={"nyquist": grid.nyquist},
        )

    kappa = grid.wavenumbers
    coefficients = spectral.sine_coefficients(field.values, grid.r)

    def realize(symbol: np.ndarray) -> np.ndarray:
        return spectral.from_sine_coefficients(coefficients * symbol, grid.r)

    previous = _lowpass_symbol(kappa, k_min - 1)
    low = realize(previous)
    shells: Dict[int, np.ndarray] = {}
    for k in range(k_min, k_max + 1):
        current = _lowpass_symbol(kappa, k)
        shells[k] = realize(current - previous)
        previous = current
    high = realize(1.0 - previous)
    return ShellDecomposition(grid, k_min, k_max, low, shells, high)


@dataclass(frozen=True)
class BesovValue:
    value: float
    k_star: Optional[int] = None
    r_star: Optional[float] = None


def besov_norm(field: RadialField, min_scaled_radius: Optional[float] = None) -> BesovValue:
    """
    sup_{k >= 0, r} 2^{-3k/2} |Λ_k v|(r), the low block counting as k = 0.

    With ``min_scaled_radius`` = R only radii r >= R 2^{-k} enter shell k.
    """
    if field.is_zero:
        return BesovValue(0.0)
    grid = field.grid
    decomposition = dyadic_decompose(field)
    blocks = [(0, decomposition.low)] + sorted(decomposition.shells.items())

    best = BesovValue(0.0)
    for k, values in blocks:
        scaled = 2.0 ** (-1.5 * k) * np.abs(values)
        if min_scaled_radius is not None:
            scaled = np.where(grid.r >= min_scaled_radius * 2.0**-k, scaled, 0.0)
        j = int(np.argmax(scaled))
        if scaled[j] > best.value:
            best = BesovValue(float(scaled[j]), k, float(grid.r[j]))
    return best


@dataclass(frozen=True)
class BubbleReport:
    nu: float
    k_star: int
    r_star: float
    h: float
    profile: RadialField
    piece: RadialField
    remainder: RadialField
    remainder_nu: float
    correlation: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "k_star": self.k_star,
            "r_star": self.r_star,
            "h": self.h,
            "correlation_if_reference_given": self.correlation,
            "remainder_nu": self.remainder_nu,
        }


def correlation(a: RadialField, b: RadialField) -> float:
    """|<a, b>| / (||a|| ||b||) in L^2(R^3)."""
    inner = integrate(np.real(np.conj(a.values) * b.values), a.grid)
    inner_im = integrate(np.imag(np.conj(a.values) * b.values), a.grid)
    na = math.sqrt(integrate(np.abs(a.values) ** 2, a.grid))
    nb = math.sqrt(integrate(np.abs(b.values) ** 2, b.grid))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return math.hypot(inner, inner_im) / (na * nb)


def extract_bubble(
    field: RadialField,
    reference: Optional[RadialField] = None,
    profile_grid: RadialGrid = PROFILE_GRID,
) -> BubbleReport:
    """
    Read off the concentration profile at the maximizing shell.

    The piece kept is the field band-limited to |ξ| <= 2^{k*+BAND_OCTAVES+1}
    and windowed to r <= 2 max(WINDOW_SCALES h, 1.5 r*); the profile is its
    L^2-normalized inverse dilation about the origin.

    Raises:
        PreconditionError: If the field has zero Besov value
    """
    found = besov_norm(field)
    if found.value == 0.0 or found.k_star is None:
        raise PreconditionError("bubble extraction needs a nonzero field")

    grid = field.grid
    h = 2.0**-found.k_star
    symbol = smooth_cutoff(grid.wavenumbers * h / 2.0**BAND_OCTAVES)
    band = spectral.apply_radial_multiplier(field.values, grid.r, symbol)
    window_radius = max(WINDOW_SCALES * h, 1.5 * found.r_star)
    piece = field.with_values(band * smooth_cutoff(grid.r / window_radius))
    remainder = field.with_values(field.values - piece.values)

    profile = scale_field(piece, 0.5 * math.log(h), 3, grid=profile_grid)
    norm = math.sqrt(integrate(np.abs(profile.values) ** 2, profile_grid))
    if norm > 0.0:
        profile = profile.with_values(profile.values / norm)

    report = BubbleReport(
        nu=found.value,
        k_star=found.k_star,
        r_star=found.r_star,
        h=h,
        profile=profile,
        piece=piece,
        remainder=remainder,
        remainder_nu=besov_norm(remainder).value,
        correlation=correlation(piece, reference) if reference is not None else None,
    )
    logger.info(
        "[Bubble] nu=%.6e k*=%d r*=%.4g remainder_nu=%.6e",
        report.nu,
        report.k_star,
        report.r_star,
        report.remainder_nu,
    )
    return report
