"""
critnls engine - radial grids, functionals, dynamics and dyadic analysis
"""

from .cutoff import CutoffSpec, smooth_cutoff
from .diagnostics import (
    TrajectoryRecord,
    Verdict,
    VerdictKind,
    VerdictThresholds,
    exterior_energy,
    scattering_verdict,
    strichartz_accumulate,
    write_report,
)
from .evolve import EvolveState, adapt_dt, evolve, linear_propagator, nonlinear_phase, step
from .functionals import (
    MU_BAR,
    MU_UNDERLINE,
    FunctionalReport,
    critical_energy,
    energy,
    functional_report,
    h_functional,
    k_critical,
    k_functional,
    k_nonlinear,
    k_quadratic,
    mass,
    scaling_derivative_check,
)
from .grid import (
    RadialField,
    RadialGrid,
    integrate,
    laplacian_residual,
    make_grid,
    sample,
    scale_field,
)
from .ground_state import (
    M_CLOSED_FORM,
    Membership,
    ThresholdCertificate,
    aubin_talenti,
    classify,
    make_k_data,
    rescale_to_zero_k,
    threshold_m,
)
from .littlewood_paley import (
    BubbleReport,
    ShellDecomposition,
    besov_norm,
    dyadic_decompose,
    extract_bubble,
)
from .profiles import (
    AubinTalentiBubble,
    Gaussian,
    GaussianMixture,
    TabulatedProfile,
    profile_from_dict,
)
from .variational import VariationalSuiteReport, verify_variational
from .virial import (
    BlowupCertificate,
    WeightFamily,
    WeightSet,
    blowup_certificate,
    truncated_weight,
    virial_first_derivative,
    virial_second_derivative,
    virial_value,
)

__all__ = [
    "AubinTalentiBubble",
    "BlowupCertificate",
    "BubbleReport",
    "CutoffSpec",
    "EvolveState",
    "FunctionalReport",
    "Gaussian",
    "GaussianMixture",
    "M_CLOSED_FORM",
    "MU_BAR",
    "MU_UNDERLINE",
    "Membership",
    "RadialField",
    "RadialGrid",
    "ShellDecomposition",
    "TabulatedProfile",
    "ThresholdCertificate",
    "TrajectoryRecord",
    "VariationalSuiteReport",
    "Verdict",
    "VerdictKind",
    "VerdictThresholds",
    "WeightFamily",
    "WeightSet",
    "adapt_dt",
    "aubin_talenti",
    "besov_norm",
    "blowup_certificate",
    "classify",
    "critical_energy",
    "dyadic_decompose",
    "energy",
    "evolve",
    "exterior_energy",
    "extract_bubble",
    "functional_report",
    "h_functional",
    "integrate",
    "k_critical",
    "k_functional",
    "k_nonlinear",
    "k_quadratic",
    "laplacian_residual",
    "linear_propagator",
    "make_grid",
    "make_k_data",
    "mass",
    "nonlinear_phase",
    "profile_from_dict",
    "rescale_to_zero_k",
    "sample",
    "scale_field",
    "scaling_derivative_check",
    "scattering_verdict",
    "smooth_cutoff",
    "step",
    "strichartz_accumulate",
    "threshold_m",
    "truncated_weight",
    "verify_variational",
    "virial_first_derivative",
    "virial_second_derivative",
    "virial_value",
    "write_report",
]
