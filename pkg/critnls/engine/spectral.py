"""
Sine-series machinery for radial fields.

A radial u on (0, r_max) with u(r_max) = 0 is stored through v = r u, whose
odd extension is expanded in sin(kappa_k r), kappa_k = k pi / r_max. The
orthonormal DST-I diagonalizes the radial Laplacian in that basis, so every
Fourier multiplier of a radial function becomes a diagonal operation on the
DST coefficients of v.
"""

import numpy as np
from scipy import fft as sp_fft


def _real_split(transform, x: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(x):
        return transform(x.real) + 1j * transform(x.imag)
    return transform(x)


def dst1(x: np.ndarray) -> np.ndarray:
    """Orthonormal DST-I (self-inverse)."""
    return _real_split(lambda a: sp_fft.dst(a, type=1, norm="ortho"), x)


def idst1(x: np.ndarray) -> np.ndarray:
    return _real_split(lambda a: sp_fft.idst(a, type=1, norm="ortho"), x)


def sine_coefficients(values: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Orthonormal DST-I coefficients V_k of v = r u."""
    return dst1(r * values)


def from_sine_coefficients(coefficients: np.ndarray, r: np.ndarray) -> np.ndarray:
    return idst1(coefficients) / r


def apply_radial_multiplier(
    values: np.ndarray, r: np.ndarray, multiplier: np.ndarray
) -> np.ndarray:
    """Apply the Fourier multiplier m(|xi|), sampled at kappa_k, to radial samples."""
    return from_sine_coefficients(sine_coefficients(values, r) * multiplier, r)


def spectral_gradient_norm_sq(values: np.ndarray, r: np.ndarray, kappa: np.ndarray):
    """
    ||grad u||^2 = 4 pi int |v'|^2 dr = 4 pi dr sum_k kappa_k^2 |V_k|^2.

    Exact Parseval for the sine series; invariant under the linear propagator.
    """
    dr = r[0]
    coefficients = sine_coefficients(values, r)
    return float(4.0 * np.pi * dr * np.sum(kappa**2 * np.abs(coefficients) ** 2))


def spectral_radial_derivative(values: np.ndarray, r: np.ndarray, kappa: np.ndarray):
    """
    du/dr at the interior nodes from the sine series.

    v'(r_j) = sqrt(2/(n+1)) sum_k V_k kappa_k cos(pi k j / (n+1)) is a DCT-I
    of the zero-padded sequence (0, V_1 kappa_1, ..., V_n kappa_n, 0).
    """
    n = values.shape[0]
    coefficients = sine_coefficients(values, r) * kappa
    padded = np.zeros(n + 2, dtype=coefficients.dtype)
    padded[1:-1] = coefficients
    cosine = _real_split(lambda a: sp_fft.dct(a, type=1), padded)
    dv = np.sqrt(2.0 / (n + 1)) * 0.5 * cosine[1:-1]
    return (dv - values) / r
