"""
Seeded variational suite.
"""

import numpy as np
import pytest

from critnls.engine.functionals import functional_report
from critnls.engine.ground_state import M_CLOSED_FORM
from critnls.engine.variational import random_profile, verify_variational
from critnls.exceptions import UsageError
from critnls.persistence import dumps_json

LEMMAS = {
    "energy_identity",
    "structure_identity",
    "free_energy_identity",
    "positivity_near_zero",
    "sharp_sobolev",
    "k_critical_below_k",
    "minimization_H",
    "free_energy_equivalence",
    "uniform_bound",
    "scaling_laws",
    "monotone_H_along_flow",
    "one_minus_two_invariance",
    "zero_k_rescaling",
}


@pytest.mark.fast
@pytest.mark.edge_case
@pytest.mark.parametrize("count", [0, -5])
def test_count_must_be_positive(count):
    with pytest.raises(UsageError):
        verify_variational(seed=1, count=count)


@pytest.mark.fast
def test_identity_suite():
    report = verify_variational(seed=7, count=100)
    assert report.count == 100
    assert set(report.lemmas) == LEMMAS
    for name in ("energy_identity", "structure_identity", "free_energy_identity"):
        assert report.lemmas[name].checked == 100
        assert report.lemmas[name].ok
    assert report.all_passed
    assert report.failures() == []


@pytest.mark.fast
def test_same_seed_same_bytes():
    first = dumps_json(verify_variational(seed=7, count=50).model_dump())
    second = dumps_json(verify_variational(seed=7, count=50).model_dump())
    assert first == second


@pytest.mark.fast
def test_different_seeds_differ():
    a = verify_variational(seed=1, count=20)
    b = verify_variational(seed=2, count=20)
    assert a.model_dump() != b.model_dump()


def test_uniform_bound_over_thousand_fields():
    report = verify_variational(seed=2024, count=1000)
    tally = report.lemmas["uniform_bound"]
    assert tally.checked == 1000
    assert tally.ok
    assert report.lemmas["minimization_H"].ok
    assert report.lemmas["zero_k_rescaling"].ok
    assert report.inf_mass_plus_energy_at_zero_K is not None
    assert report.all_passed


@pytest.mark.fast
def test_random_family_is_reproducible():
    a = [random_profile(np.random.default_rng(11)) for _ in range(3)]
    b = [random_profile(np.random.default_rng(11)) for _ in range(3)]
    assert a == b
    assert all(np.isfinite(functional_report(p).energy) for p in a)


@pytest.mark.fast
def test_members_stay_below_threshold():
    rng = np.random.default_rng(5)
    energies = [functional_report(random_profile(rng)).energy for _ in range(200)]
    assert any(e < M_CLOSED_FORM for e in energies)
