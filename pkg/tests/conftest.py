"""
Shared pytest fixtures for critnls tests.

Provides:
- Small radial grids and sampled Gaussian fields
- Fast trajectory configs (scattering and blow-up)
- Logging isolation
"""

import logging
import math

import numpy as np
import pytest

from critnls.config import SimConfig
from critnls.engine.functionals import FunctionalReport, NormQuantities
from critnls.engine.grid import RadialField, make_grid, sample
from critnls.engine.profiles import Gaussian

PI32 = math.pi**1.5
GAUSSIAN_L2 = PI32 / (2.0 * math.sqrt(2.0))
GAUSSIAN_GRAD = 3.0 * PI32 / (2.0 * math.sqrt(2.0))
GAUSSIAN_SECOND_MOMENT = 3.0 * PI32 / (8.0 * math.sqrt(2.0))


@pytest.fixture(scope="session")
def small_grid():
    """r_max = 20, n = 4095: resolves unit-width Gaussians."""
    return make_grid(20.0, 4095)


@pytest.fixture(scope="session")
def wide_grid():
    """r_max = 40, n = 2047: room for a Gaussian to disperse to t ~ 1."""
    return make_grid(40.0, 2047)


@pytest.fixture
def gaussian_profile():
    return Gaussian(amplitude=1.0, dilation=1.0)


@pytest.fixture
def gaussian_field(small_grid, gaussian_profile):
    """e^{-r^2} with analytic provenance."""
    return sample(gaussian_profile, small_grid)


@pytest.fixture
def plain_gaussian(small_grid):
    """e^{-r^2} as bare samples (spectral kernels)."""
    return RadialField(small_grid, np.exp(-small_grid.r**2))


@pytest.fixture
def scattering_config():
    """Weak Gaussian (A = 0.5) dispersing on r_max = 40."""
    return SimConfig(
        r_max=40.0,
        n=2047,
        dt0=2e-3,
        t_end=1.0,
        output_every=10,
        virial_R_list=[5.0],
        exterior_R_list=[5.0, 10.0],
    )


@pytest.fixture
def blowup_config():
    """Strong Gaussian (A = 3) collapsing on r_max = 20."""
    return SimConfig(
        r_max=20.0,
        n=4095,
        dt0=1e-3,
        t_end=1.0,
        blowup_dt_floor=1e-5,
        output_every=5,
        virial_R_list=[5.0],
        exterior_R_list=[5.0],
    )


@pytest.fixture
def reset_logging():
    root_logger = logging.getLogger()
    original_handlers = root_logger.handlers[:]
    original_level = root_logger.level
    yield
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    for handler in original_handlers:
        root_logger.addHandler(handler)
    root_logger.setLevel(original_level)


def report_from(grad, l6, l4, l2=1.0, bmf=0.0):
    """FunctionalReport straight from norm values."""
    return FunctionalReport.from_norms(
        NormQuantities(l2=l2, grad=grad, l4=l4, l6=l6, boundary_mass_fraction=bmf)
    )


@pytest.fixture
def make_report():
    return report_from
