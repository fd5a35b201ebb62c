import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from equilearn.errors import ConvergenceError, DegeneracyWarning, DimensionError, ResourceLimitError
from equilearn.lattice import build_group
from equilearn.models import energy_observable, heisenberg_ring, long_range_ising_ring, sample_params
from equilearn.quantum import (
    PauliString,
    apply_permutation,
    build_hamiltonian,
    expectation,
    ground_state,
    ops_expectation,
    reduced_density_matrix,
    solve,
)
from oracles import dense_ground, dense_hamiltonian, dense_expect, pauli_on


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("letters", ["X", "Y", "Z", "XY", "IZ", "YYZ", "XIYZ", "ZXIY"])
def test_pauli_matrix_matches_kron(letters):
    n = len(letters)
    dense = pauli_on(n, range(n), letters)
    np.testing.assert_allclose(PauliString(letters).matrix().toarray(), dense, atol=0)


def test_pauli_apply_and_expectation():
    psi = random_state(4, 0)
    for letters in ("XYZI", "ZZII", "IYIY"):
        P = PauliString(letters)
        M = pauli_on(4, range(4), letters)
        np.testing.assert_allclose(P.apply(psi), M @ psi, atol=1e-14)
        assert P.expectation(psi) == pytest.approx(float(np.real(psi.conj() @ M @ psi)), abs=1e-14)


def test_pauli_validation():
    with pytest.raises(ValueError):
        PauliString("XA")
    with pytest.raises(DimensionError):
        PauliString.on_sites(4, (0, 1), "X")
    with pytest.raises(DimensionError):
        PauliString("XX").expectation(np.ones(8))


@pytest.mark.parametrize("factory", [heisenberg_ring, long_range_ising_ring])
def test_hamiltonian_matches_dense(factory):
    spec = factory(6)
    x = sample_params(spec, 1)
    H = build_hamiltonian(spec, x)
    assert sp.isspmatrix_csr(H) or sp.issparse(H)
    np.testing.assert_allclose(H.toarray(), dense_hamiltonian(spec, x), atol=1e-13)
    assert not np.iscomplexobj(H.data)


def test_heisenberg_four_site_ring_energy():
    spec = heisenberg_ring(4)
    gs = solve(spec, np.ones(4))
    assert gs.energy == pytest.approx(-8.0, abs=1e-10)
    assert not gs.degenerate


@pytest.mark.parametrize("factory,n", [(heisenberg_ring, 8), (long_range_ising_ring, 8),
                                       (heisenberg_ring, 10)])
def test_ground_state_matches_dense(factory, n):
    spec = factory(n)
    x = sample_params(spec, 7)
    vals, vec = dense_ground(spec, x)
    gs = solve(spec, x)
    assert gs.converged
    assert gs.energy == pytest.approx(vals[0], abs=1e-8)
    assert abs(abs(np.vdot(vec, gs.state)) - 1) < 1e-8
    assert gs.gap_estimate == pytest.approx(vals[1] - vals[0], abs=1e-5)
    for i, j in [(0, 1), (0, 3), (2, 5)]:
        for label in ("XX", "ZZ", "XZ"):
            assert ops_expectation(gs.state, (i, j), ((1.0, label),)) == pytest.approx(
                dense_expect(vec, n, (i, j), label), abs=1e-7)


def test_phase_convention_deterministic():
    spec = heisenberg_ring(6)
    x = sample_params(spec, 2)
    a = solve(spec, x, rng_seed=0).state
    b = solve(spec, x, rng_seed=5).state
    k = int(np.argmax(np.abs(a)))
    assert a[k].real > 0 and abs(a[k].imag) < 1e-14
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_degenerate_ground_state_warns():
    # uncoupled ring: H = 0 on every state
    spec = heisenberg_ring(4)
    with pytest.warns(DegeneracyWarning):
        gs = solve(spec, np.zeros(4))
    assert gs.degenerate


def test_lanczos_nonconvergence_raises():
    spec = long_range_ising_ring(10)
    H = build_hamiltonian(spec, sample_params(spec, 0))
    with pytest.raises(ConvergenceError) as info:
        ground_state(H, tol=1e-14, max_iter=3, krylov_dim=3)
    assert info.value.diagnostic > 0


def test_qubit_cap():
    spec = heisenberg_ring(15)
    with pytest.raises(ResourceLimitError):
        build_hamiltonian(spec, np.ones(15))


def test_energy_observable_expectation():
    spec = long_range_ising_ring(6)
    x = sample_params(spec, 0)
    gs = solve(spec, x)
    val = expectation(gs.state, energy_observable(spec), x)
    assert val == pytest.approx(gs.energy / np.sqrt(6), abs=1e-9)


def test_rdm_matches_partial_trace():
    n = 5
    psi = random_state(n, 3)
    for sites in [(0,), (1, 3), (3, 1), (4, 0, 2)]:
        rho = reduced_density_matrix(psi, sites)
        assert np.trace(rho).real == pytest.approx(1.0)
        k = len(sites)
        # reconstruct every Pauli coefficient and compare with dense expectations
        for label in itertools.product("IXYZ", repeat=k):
            label = "".join(label)
            P = pauli_on(k, range(k), label)
            assert np.trace(rho @ P).real == pytest.approx(dense_expect(psi, n, sites, label),
                                                           abs=1e-12)


def test_rdm_cap_and_checks():
    psi = random_state(5, 0)
    with pytest.raises(ResourceLimitError):
        reduced_density_matrix(psi, (0, 1, 2, 3))
    with pytest.raises(ValueError):
        reduced_density_matrix(psi, (1, 1))
    with pytest.raises(IndexError):
        reduced_density_matrix(psi, (5,))


@pytest.mark.parametrize("n", [4, 5])
def test_apply_permutation_moves_sites(n):
    psi = random_state(n, 1)
    for g in build_group(n):
        phi = apply_permutation(g, psi)
        # <U psi| P_{g(i)} |U psi> = <psi| P_i |psi>
        for i, j in [(0, 1), (0, 2)]:
            a = dense_expect(psi, n, (i, j), "XZ")
            b = dense_expect(phi, n, (g.site(i, n), g.site(j, n)), "XZ")
            assert b == pytest.approx(a, abs=1e-12)
