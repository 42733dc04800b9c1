"""
Dyadic shells, the Besov sup-norm and bubble extraction.
"""

import math

import numpy as np
import pytest

from critnls.engine import spectral
from critnls.engine.grid import RadialField, make_grid, sample
from critnls.engine.littlewood_paley import (
    PROFILE_GRID,
    besov_norm,
    correlation,
    dyadic_decompose,
    extract_bubble,
    max_shell,
)
from critnls.engine.profiles import Gaussian
from critnls.exceptions import PreconditionError, RangeError
from tests.conftest import GAUSSIAN_L2

BUBBLE_GRID = make_grid(4.0, 16383)


def normalized_gaussian(width: float, grid=BUBBLE_GRID) -> RadialField:
    """L^2-normalized exp(-r^2/width^2) as bare samples."""
    scale = 1.0 / math.sqrt(GAUSSIAN_L2 * width**3)
    return RadialField(grid, scale * np.exp(-(grid.r**2) / width**2))


class TestDecomposition:
    @pytest.mark.fast
    def test_reconstruction(self, plain_gaussian):
        parts = dyadic_decompose(plain_gaussian)
        np.testing.assert_allclose(parts.reconstruct(), plain_gaussian.values, atol=1e-12)

    @pytest.mark.fast
    def test_plancherel_with_overlap(self, plain_gaussian):
        grid = plain_gaussian.grid
        parts = dyadic_decompose(plain_gaussian, (2, 6))
        coefficients = spectral.sine_coefficients(plain_gaussian.values, grid.r)
        expected = 4.0 * math.pi * grid.dr * np.sum(parts.overlap_weights() * np.abs(coefficients) ** 2)
        assert sum(parts.l2_norms_sq().values()) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.fast
    def test_band_limited_field_lives_in_two_shells(self, small_grid):
        kappa = small_grid.wavenumbers
        mode = int(np.argmin(np.abs(kappa - 12.0)))
        coefficients = np.zeros(small_grid.n)
        coefficients[mode] = 1.0
        field = RadialField(small_grid, spectral.from_sine_coefficients(coefficients, small_grid.r))
        parts = dyadic_decompose(field)
        peak = float(np.max(np.abs(field.values)))
        for k, values in parts.shells.items():
            if k not in (3, 4):
                assert np.max(np.abs(values)) <= 1e-10 * peak
        assert np.max(np.abs(parts.low)) <= 1e-10 * peak
        np.testing.assert_allclose(parts.shells[3] + parts.shells[4], field.values, atol=1e-10 * peak)

    @pytest.mark.fast
    def test_block_below_range_is_low(self, plain_gaussian):
        parts = dyadic_decompose(plain_gaussian, (3, 5))
        assert parts.block(1) is parts.low
        assert parts.block(4) is parts.shells[4]

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_invalid_ranges(self, plain_gaussian):
        top = max_shell(plain_gaussian.grid)
        for k_range in [(0, 3), (4, 3), (1, top + 2)]:
            with pytest.raises(RangeError):
                dyadic_decompose(plain_gaussian, k_range)


class TestBesov:
    @pytest.mark.fast
    def test_zero_field(self, small_grid):
        value = besov_norm(RadialField.zeros(small_grid))
        assert value.value == 0.0
        assert value.k_star is None

    @pytest.mark.fast
    def test_scale_invariance(self):
        values = [besov_norm(normalized_gaussian(2.0**-k)).value for k in (3, 5, 7)]
        assert max(values) / min(values) < 1.1

    @pytest.mark.fast
    def test_radius_restriction_is_monotone(self):
        field = normalized_gaussian(2.0**-3)
        values = [besov_norm(field, R).value for R in (None, 0.5, 1.0, 2.0, 4.0)]
        assert all(b <= a for a, b in zip(values, values[1:]))


class TestBubble:
    @pytest.mark.fast
    @pytest.mark.parametrize("k", [3, 4, 5, 6, 7, 8])
    def test_single_bubble(self, k):
        width = 2.0**-k
        report = extract_bubble(normalized_gaussian(width))
        assert abs(report.k_star - k) <= 1
        assert report.h == 2.0**-report.k_star
        assert report.profile.grid == PROFILE_GRID
        reference = sample(Gaussian(dilation=width / report.h), PROFILE_GRID)
        assert correlation(report.profile, reference) >= 0.95
        assert report.remainder_nu < 0.5 * report.nu

    @pytest.mark.fast
    def test_two_bubbles(self):
        wide, narrow = normalized_gaussian(2.0**-2), normalized_gaussian(2.0**-8)
        isolated = {"wide": besov_norm(wide).value, "narrow": besov_norm(narrow).value}
        report = extract_bubble(wide.with_values(wide.values + narrow.values))
        other = "wide" if report.k_star >= 6 else "narrow"
        assert 0.5 <= report.remainder_nu / isolated[other] <= 2.0

    @pytest.mark.fast
    def test_noise_does_not_move_the_bubble(self):
        clean = normalized_gaussian(2.0**-5)
        rng = np.random.default_rng(3)
        noise = 1e-3 * np.max(np.abs(clean.values)) * rng.standard_normal(BUBBLE_GRID.n)
        noisy = clean.with_values(clean.values + noise)
        assert extract_bubble(noisy).k_star == extract_bubble(clean).k_star

    @pytest.mark.fast
    def test_reference_correlation_reported(self):
        field = normalized_gaussian(2.0**-4)
        report = extract_bubble(field, reference=field)
        assert report.correlation == pytest.approx(1.0, abs=1e-2)
        assert report.to_dict()["correlation_if_reference_given"] == report.correlation

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_zero_field(self, small_grid):
        with pytest.raises(PreconditionError):
            extract_bubble(RadialField.zeros(small_grid))


@pytest.mark.fast
def test_correlation_bounds(plain_gaussian, small_grid):
    assert correlation(plain_gaussian, plain_gaussian) == pytest.approx(1.0)
    assert correlation(plain_gaussian, RadialField.zeros(small_grid)) == 0.0
    rotated = plain_gaussian.with_values(1j * plain_gaussian.values)
    assert correlation(plain_gaussian, rotated) == pytest.approx(1.0)
