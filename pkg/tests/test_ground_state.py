"""
Ground state, threshold certificate and threshold-adjacent data.
"""

import math

import pytest

from critnls.engine.functionals import functional_report
from critnls.engine.grid import RadialField, make_grid
from critnls.engine.ground_state import (
    M_CLOSED_FORM,
    SOBOLEV_CONSTANT,
    Membership,
    adapted_grid,
    aubin_talenti,
    classify,
    cutoff_radius,
    k_data_profile,
    make_k_data,
    rescale_to_zero_k,
    threshold_m,
)
from critnls.engine.profiles import AubinTalentiBubble, Gaussian
from critnls.exceptions import ConfigurationError, ConstructionError, PreconditionError, RangeError

GAP_EPS = (0.02, 0.04, 0.08)
HUGE_CUTOFF = 2.0**30


class TestThreshold:
    @pytest.mark.fast
    def test_closed_form(self):
        assert M_CLOSED_FORM == pytest.approx(4.2726, abs=1e-4)
        assert SOBOLEV_CONSTANT == pytest.approx((3.0 * M_CLOSED_FORM) ** (-1.0 / 3.0))

    @pytest.mark.fast
    def test_certificate(self):
        cert = threshold_m()
        assert cert.m_closed_form == M_CLOSED_FORM
        assert cert.discrepancy <= 1e-8
        assert cert.sobolev_relation_error <= 1e-10
        assert cert.sobolev_constant == pytest.approx(SOBOLEV_CONSTANT, rel=1e-8)
        assert (cert.r_max, cert.n) == (100.0, 16383)

    @pytest.mark.fast
    def test_certificate_serializes(self):
        payload = threshold_m().model_dump()
        assert set(payload) >= {"m_closed_form", "m_quadrature", "sobolev_constant", "discrepancy"}

    @pytest.mark.fast
    def test_ground_state_samples(self, small_grid):
        field = aubin_talenti(small_grid)
        assert AubinTalentiBubble()(0.0) == 1.0
        assert field.values[0].real == pytest.approx(1.0, abs=1e-5)
        assert field.extends_beyond_grid

    @pytest.mark.fast
    def test_untruncated_ground_state_norms(self):
        report = functional_report(AubinTalentiBubble())
        assert report.grad_norm_sq == pytest.approx(3.0 * M_CLOSED_FORM, rel=1e-13)
        assert report.l6_norm_6 == pytest.approx(3.0 * M_CLOSED_FORM, rel=1e-13)
        assert report.l4_norm_4 == pytest.approx(3.0 * math.sqrt(3.0) * math.pi**2, rel=1e-13)
        assert report.critical_energy == pytest.approx(M_CLOSED_FORM, rel=1e-13)
        assert report.K_c == pytest.approx(0.0, abs=1e-12)


class TestMakeKData:
    @pytest.mark.fast
    @pytest.mark.parametrize(
        "eps,membership", [(-0.1, Membership.K_PLUS), (0.1, Membership.K_MINUS)]
    )
    def test_membership(self, eps, membership):
        field = make_k_data(eps)
        report = functional_report(field)
        assert report.energy < M_CLOSED_FORM
        assert classify(field) is membership
        assert cutoff_radius(field) == 16.0

    @pytest.mark.fast
    def test_explicit_grid_and_dilation(self):
        lam = 0.5 * 0.1**2
        grid = make_grid(500.0 * lam, 8191)
        field = make_k_data(0.1, R=16.0, grid=grid, dilation=lam)
        assert field.grid == grid
        assert field.profile.dilation == lam
        assert classify(field) is Membership.K_MINUS

    @pytest.mark.fast
    @pytest.mark.edge_case
    @pytest.mark.parametrize("eps", [0.0, 0.3, -0.26, math.nan])
    def test_invalid_eps(self, eps):
        with pytest.raises(ConfigurationError):
            make_k_data(eps)

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_unresolved_grid(self):
        with pytest.raises(ConstructionError) as exc_info:
            make_k_data(0.1, R=16.0, grid=make_grid(1.0, 255))
        assert exc_info.value.condition == "resolution"
        assert exc_info.value.exit_code == 1

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_support_beyond_grid(self):
        with pytest.raises(ConstructionError) as exc_info:
            make_k_data(0.1, R=16.0, grid=make_grid(0.01, 1023))
        assert exc_info.value.condition == "support inside grid"

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_adapted_grid_node_limit(self):
        with pytest.raises(RangeError):
            adapted_grid(k_data_profile(0.1, 4096.0), max_nodes=2**12)

    @pytest.mark.fast
    def test_energy_gap_asymptotics(self):
        energy_ratios, k_ratios = [], []
        for eps in GAP_EPS:
            report = functional_report(k_data_profile(eps, HUGE_CUTOFF))
            energy_ratios.append((M_CLOSED_FORM - report.energy) / (6.0 * eps**2 * M_CLOSED_FORM))
            k_ratios.append(-report.K / (24.0 * eps * M_CLOSED_FORM))
        for ratios in (energy_ratios, k_ratios):
            assert 0.8 <= ratios[0] <= 1.2
            gaps = [abs(r - 1.0) for r in ratios]
            assert gaps == sorted(gaps)


class TestRescaleToZeroK:
    @pytest.mark.fast
    def test_analytic_k_minus(self):
        profile = k_data_profile(0.1, 16.0)
        lam0, rescaled = rescale_to_zero_k(profile)
        report = functional_report(rescaled)
        assert lam0 < 0
        assert abs(report.K) <= 1e-10 * report.grad_norm_sq
        assert report.energy >= M_CLOSED_FORM - 1e-6
        assert report.energy == pytest.approx(report.H, rel=1e-9)

    @pytest.mark.fast
    def test_sampled_k_minus(self):
        field = make_k_data(0.1)
        lam0, rescaled = rescale_to_zero_k(field)
        report = functional_report(rescaled)
        assert lam0 < 0
        assert rescaled.grid == field.grid
        assert abs(report.K) <= 1e-8 * report.grad_norm_sq
        assert report.energy >= M_CLOSED_FORM - 1e-6

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_positive_k_rejected(self):
        with pytest.raises(PreconditionError):
            rescale_to_zero_k(Gaussian())

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_zero_field_rejected(self, small_grid):
        with pytest.raises(PreconditionError):
            rescale_to_zero_k(RadialField.zeros(small_grid))


class TestClassify:
    @pytest.mark.fast
    def test_zero(self, small_grid):
        assert classify(RadialField.zeros(small_grid)) is Membership.ZERO

    @pytest.mark.fast
    @pytest.mark.parametrize("amplitude", [1.0, 2.0])
    def test_truncated_bubbles_above_threshold(self, amplitude):
        bubble = AubinTalentiBubble(amplitude=amplitude, cutoff=64.0)
        assert classify(bubble) is Membership.ABOVE_THRESHOLD

    @pytest.mark.fast
    def test_weak_gaussian_in_k_plus(self):
        assert classify(Gaussian(amplitude=0.5)) is Membership.K_PLUS

    @pytest.mark.fast
    def test_accepts_report(self, make_report):
        assert classify(make_report(grad=1.0, l6=10.0, l4=0.0)) is Membership.K_MINUS
        assert classify(make_report(grad=100.0, l6=1.0, l4=0.0)) is Membership.ABOVE_THRESHOLD
