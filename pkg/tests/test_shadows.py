import itertools

import numpy as np
import pytest

from equilearn.errors import InvalidObservableError, ResourceLimitError
from equilearn.models import CORRELATION_OPS
from equilearn.quantum import reduced_density_matrix
from equilearn.shadows import (
    ShadowRecord,
    estimate_correlation,
    estimate_ops,
    estimate_pauli,
    estimate_rdm,
    measure_shadow,
    pauli_matrix,
    pauli_snapshots,
    project_psd,
    shadow_count,
)
from oracles import dense_expect, exact_distribution


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def test_product_state_outcomes():
    n = 3
    zero = np.zeros(2**n)
    zero[0] = 1
    rec = measure_shadow(zero, 300, 0)
    z = rec.bases == 2
    assert np.all(rec.outcomes[z] == 1)
    # X and Y outcomes are fair coins
    assert 0.3 < np.mean(rec.outcomes[~z] == 1) < 0.7


def test_deterministic_and_validated():
    psi = random_state(3, 0)
    a, b = measure_shadow(psi, 50, 9), measure_shadow(psi, 50, 9)
    np.testing.assert_array_equal(a.bases, b.bases)
    np.testing.assert_array_equal(a.outcomes, b.outcomes)
    # batching does not change the record
    c = measure_shadow(psi, 50, 9, batch=7)
    np.testing.assert_array_equal(a.outcomes, c.outcomes)
    with pytest.raises(ValueError):
        measure_shadow(psi, 0, 0)


def test_json_round_trip():
    rec = measure_shadow(random_state(4, 1), 20, 3)
    again = ShadowRecord.from_json(rec.to_json())
    np.testing.assert_array_equal(again.bases, rec.bases)
    np.testing.assert_array_equal(again.outcomes, rec.outcomes)
    doc = rec.to_dict()
    assert set(doc["bases"][0]) <= set("XYZ") and set(doc["outcomes"][0]) <= set("01")


def test_estimator_exactly_unbiased_over_full_distribution():
    psi = random_state(3, 2)
    rec, p = exact_distribution(psi)
    assert p.sum() == pytest.approx(1.0)
    for sites in [(0,), (1, 2), (2, 0)]:
        for label in itertools.product("XYZ", repeat=len(sites)):
            label = "".join(label)
            v = pauli_snapshots(rec, sites, label)
            mean = p @ v
            assert mean == pytest.approx(dense_expect(psi, 3, sites, label), abs=1e-12)
            assert p @ (v - mean) ** 2 <= 3 ** len(sites) + 1e-12


def test_rdm_estimate_properties():
    psi = random_state(4, 4)
    rec = measure_shadow(psi, 4000, 1)
    for sites in [(0,), (0, 2), (3, 1)]:
        est = estimate_rdm(rec, sites)
        rho = est.matrix
        np.testing.assert_allclose(rho, rho.conj().T)
        assert np.trace(rho).real == pytest.approx(1.0)
        # consistent with per-Pauli estimates
        for label in itertools.product("XYZ", repeat=len(sites)):
            label = "".join(label)
            assert np.trace(rho @ pauli_matrix(label)).real == pytest.approx(
                estimate_pauli(rec, sites, label), abs=1e-12)
        err = np.abs(rho - reduced_density_matrix(psi, sites)).max()
        assert err < 0.1
    with pytest.raises(ResourceLimitError):
        estimate_rdm(rec, (0, 1, 2))


def test_psd_projection():
    rho = np.diag([0.7, 0.5, -0.1, -0.1]).astype(complex)
    proj = project_psd(rho)
    w = np.linalg.eigvalsh(proj)
    assert w.min() >= -1e-15
    assert np.trace(proj).real == pytest.approx(1.0)
    np.testing.assert_allclose(w, [0, 0, 0.4, 0.6], atol=1e-14)
    good = np.diag([0.25, 0.25, 0.5, 0.0]).astype(complex)
    np.testing.assert_allclose(project_psd(good), good, atol=1e-14)


def test_correlation_closed_form_matches_template():
    rec = measure_shadow(random_state(5, 0), 500, 2)
    for i, j in [(0, 1), (1, 4)]:
        assert estimate_correlation(rec, i, j) == pytest.approx(
            estimate_ops(rec, (i, j), CORRELATION_OPS), abs=1e-12)
    with pytest.raises(InvalidObservableError):
        estimate_correlation(rec, 2, 2)


def test_shadow_count():
    assert shadow_count(8) == 150
    assert shadow_count(16, C=10) == 40
    assert shadow_count(6) == int(np.ceil(50 * np.log2(6)))
