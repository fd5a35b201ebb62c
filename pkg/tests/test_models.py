import math

import numpy as np
import pytest

from equilearn.errors import DimensionError, InvalidExponentError, InvalidObservableError
from equilearn.models import (
    correlation_observable,
    energy_observable,
    heisenberg_ring,
    long_range_ising_ring,
    sample_params,
    spec_from_dict,
)


def test_heisenberg_structure():
    spec = heisenberg_ring(6)
    assert spec.n_params == 6
    assert len(spec.terms) == 6
    assert spec.terms[-1].sites == (5, 0)
    x = np.linspace(0.1, 0.6, 6)
    np.testing.assert_allclose(spec.coefficients(x), x)


def test_ising_structure_and_couplings():
    n = 6
    spec = long_range_ising_ring(n, alpha=3.0)
    assert spec.n_params == 2 * n
    pair_terms = [t for t in spec.terms if t.kind == "pair"]
    field_terms = [t for t in spec.terms if t.kind == "field"]
    assert len(pair_terms) == n * (n - 1) // 2
    assert len(field_terms) == n
    x = sample_params(spec, 3)
    J, h = x[:n], x[n:]
    for t in pair_terms:
        i, j = t.sites
        d = min(j - i, n - (j - i))
        assert t.coeff(x) == pytest.approx((1 + J[i] * J[j]) / d**3, rel=1e-14)
    for t in field_terms:
        assert t.coeff(x) == h[t.sites[0]]


def test_bad_alpha():
    with pytest.raises(InvalidExponentError):
        long_range_ising_ring(6, alpha=0.0)


def test_sample_params_ranges_and_determinism():
    spec = long_range_ising_ring(8)
    x = sample_params(spec, 0)
    np.testing.assert_array_equal(x, sample_params(spec, 0))
    assert np.all((x[:8] >= 0) & (x[:8] <= 2))
    assert np.all((x[8:] >= 0) & (x[8:] <= math.e))
    assert not np.array_equal(x, sample_params(spec, 1))


def test_custom_ranges():
    spec = heisenberg_ring(5, {"J": (1.0, 1.5)})
    x = sample_params(spec, 0)
    assert np.all((x >= 1.0) & (x <= 1.5))


def test_check_params():
    with pytest.raises(DimensionError):
        heisenberg_ring(6).check_params(np.zeros(7))


def test_spec_round_trip():
    spec = long_range_ising_ring(7, alpha=2.5)
    again = spec_from_dict(spec.to_dict(seed=4))
    assert again == spec
    x = sample_params(spec, 0)
    np.testing.assert_array_equal(again.coefficients(x), spec.coefficients(x))


def test_energy_observable_normalization():
    spec = heisenberg_ring(9)
    obs = energy_observable(spec)
    assert obs.normalization == pytest.approx(1 / 3)
    x = sample_params(spec, 0)
    np.testing.assert_allclose(obs.term_coefficients(x), x)


def test_correlation_observable():
    obs = correlation_observable(4, 1)
    assert obs.terms[0].sites == (1, 4)
    assert obs.l1_norm == pytest.approx(1.0)
    with pytest.raises(InvalidObservableError):
        correlation_observable(2, 2)
