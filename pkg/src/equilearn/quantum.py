"""State-vector engine: Pauli strings, sparse Hamiltonians, Lanczos, RDMs.

Basis convention: computational basis states are indexed big-endian, so site 0
is the most significant bit of the basis index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import (
    ConvergenceError,
    DegeneracyWarning,
    DimensionError,
    ResourceLimitError,
)
from .models import ModelSpec, ObservableSpec

__all__ = [
    "PauliString",
    "GroundStateSolution",
    "build_hamiltonian",
    "ground_state",
    "solve",
    "expectation",
    "ops_expectation",
    "reduced_density_matrix",
    "apply_permutation",
    "MAX_QUBITS",
]

MAX_QUBITS = 14
_LETTERS = set("IXYZ")


@lru_cache(maxsize=None)
def _basis(n):
    return np.arange(2**n, dtype=np.int64)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, one letter per site."""

    letters: str

    def __post_init__(self):
        if not set(self.letters) <= _LETTERS:
            raise ValueError(f"invalid Pauli letters {self.letters!r}")

    @classmethod
    def on_sites(cls, n, sites, label):
        if len(sites) != len(label):
            raise DimensionError(f"label {label!r} does not match sites {sites}")
        letters = ["I"] * n
        for i, a in zip(sites, label):
            if not 0 <= i < n:
                raise IndexError(f"site {i} out of range for n={n}")
            letters[i] = a
        return cls("".join(letters))

    @property
    def n(self):
        return len(self.letters)

    @property
    def weight(self):
        return sum(a != "I" for a in self.letters)

    def _masks(self):
        n = self.n
        flip = zmask = 0
        ny = 0
        for i, a in enumerate(self.letters):
            bit = 1 << (n - 1 - i)
            if a in "XY":
                flip |= bit
            if a in "YZ":
                zmask |= bit
            ny += a == "Y"
        return flip, zmask, ny

    def action(self):
        """Return ``(target, phase)`` with ``P|b> = phase[b] |target[b]>``."""
        flip, zmask, ny = self._masks()
        b = _basis(self.n)
        parity = _popcount_parity(b & zmask)
        phase = (1j) ** ny * (1 - 2 * parity)
        if ny % 2 == 0:
            phase = phase.real
        return b ^ flip, phase

    def apply(self, state):
        target, phase = self.action()
        out = np.empty_like(state, dtype=np.result_type(state, phase))
        out[target] = phase * state
        return out

    def expectation(self, state):
        state = _check_state(state, self.n)
        target, phase = self.action()
        return float(np.real(np.vdot(state[target], phase * state)))

    def matrix(self):
        target, phase = self.action()
        dim = 2**self.n
        return sp.csr_matrix((np.asarray(phase, dtype=complex), (target, _basis(self.n))),
                             shape=(dim, dim))


def _popcount_parity(v):
    v = v.copy()
    parity = np.zeros_like(v)
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    return parity


def _check_state(state, n):
    state = np.asarray(state)
    if state.shape != (2**n,):
        raise DimensionError(f"state of shape {state.shape} does not act on {n} qubits")
    return state


def _n_qubits(state):
    dim = np.asarray(state).shape[0]
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise DimensionError(f"state length {dim} is not a power of two")
    return n


def build_hamiltonian(spec: ModelSpec, x, max_qubits=MAX_QUBITS):
    """Sparse (CSR) matrix of ``H(x) = sum_I h_I(x_I)``."""
    n = spec.n
    if n > max_qubits:
        raise ResourceLimitError(f"n={n} exceeds the {max_qubits}-qubit cap")
    coeffs = spec.coefficients(x)
    rows, vals = [], []
    for term, c in zip(spec.terms, coeffs):
        for w, label in term.ops:
            target, phase = PauliString.on_sites(n, term.sites, label).action()
            rows.append(target)
            vals.append(c * w * phase)
    cols = np.tile(_basis(n), len(rows))
    data = np.concatenate([np.asarray(v, dtype=complex) for v in vals])
    if not np.any(data.imag):
        data = data.real
    dim = 2**n
    H = sp.coo_matrix((data, (np.concatenate(rows), cols)), shape=(dim, dim)).tocsr()
    H.sum_duplicates()
    H.eliminate_zeros()
    return H


@dataclass(frozen=True)
class GroundStateSolution:
    energy: float
    state: np.ndarray
    gap_estimate: float
    converged: bool
    residual: float
    iterations: int
    degenerate: bool = False

    @property
    def n(self):
        return _n_qubits(self.state)


def _lanczos_lowest(H, v0, tol, max_iter, krylov_dim, deflate=None):
    """Lowest eigenpair by restarted Lanczos with full reorthogonalization.

    ``deflate`` is an optional unit vector kept out of the Krylov space.
    Returns ``(energy, vector, residual, converged, iterations, ritz)``.
    """
    dim = v0.shape[0]
    dtype = np.result_type(H.dtype, v0.dtype)
    m_max = min(krylov_dim, dim)
    iterations = 0
    best = (np.inf, None, None)  # residual, energy, vector
    ritz = np.array([np.inf])
    v = v0.astype(dtype, copy=True)

    def project(w):
        if deflate is not None:
            w -= deflate * np.vdot(deflate, w)
        return w

    while iterations < max_iter:
        v = project(v)
        v /= np.linalg.norm(v)
        V = np.zeros((m_max, dim), dtype=dtype)
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        V[0] = v
        m = 0
        exhausted = False
        for j in range(m_max):
            iterations += 1
            w = H @ V[j]
            alpha[j] = np.vdot(V[j], w).real
            w -= alpha[j] * V[j]
            if j > 0:
                w -= beta[j - 1] * V[j - 1]
            # two passes of classical Gram-Schmidt against the whole basis
            for _ in range(2):
                w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
                project(w)
            beta[j] = np.linalg.norm(w)
            m = j + 1
            scale = max(abs(alpha[: m]).max(), 1.0)
            if beta[j] <= 1e-13 * scale:
                exhausted = True
                break
            if m % 5 == 0 or j == m_max - 1 or iterations >= max_iter:
                theta, s = eigh_tridiagonal(alpha[:m], beta[: m - 1], select="i", select_range=(0, 0))
                if beta[j] * abs(s[-1, 0]) <= 0.1 * tol:
                    break
                if iterations >= max_iter:
                    break
            if j + 1 < m_max:
                V[j + 1] = w / beta[j]
        if m == 1:
            ritz = np.array([alpha[0]])
            s_all = np.ones((1, 1))
        else:
            ritz, s_all = eigh_tridiagonal(alpha[:m], beta[: m - 1])
        psi = s_all[:, 0] @ V[:m]
        psi /= np.linalg.norm(psi)
        energy = ritz[0]
        residual = float(np.linalg.norm(H @ psi - energy * psi))
        if residual < best[0]:
            best = (residual, energy, psi)
        if residual <= tol:
            return energy, psi, residual, True, iterations, ritz
        if exhausted:
            # invariant subspace: a restart cannot add new directions
            break
        v = psi.copy()
    residual, energy, psi = best
    return energy, psi, residual, residual <= tol, iterations, ritz


def _fix_phase(psi):
    k = int(np.argmax(np.abs(psi)))
    return psi * (abs(psi[k]) / psi[k])


def ground_state(H, tol=1e-10, max_iter=2000, rng_seed=0, krylov_dim=300,
                 compute_gap=True, degeneracy_threshold=1e-8, gap_tol=1e-6):
    """Lowest eigenpair of a Hermitian operator.

    The ground state is fixed up to a deterministic global phase (its largest
    amplitude is made real and positive).  ``gap_estimate`` is the lowest Ritz
    value of a second Lanczos run deflated against the ground state, minus the
    ground energy; when it falls below ``degeneracy_threshold`` a
    :class:`DegeneracyWarning` is emitted and ``degenerate`` is set.
    """
    dim = H.shape[0]
    rng = np.random.default_rng(rng_seed)
    dtype = np.complex128 if np.iscomplexobj(H.data if sp.issparse(H) else H) else np.float64
    v0 = rng.standard_normal(dim)
    if dtype == np.complex128:
        v0 = v0 + 1j * rng.standard_normal(dim)
    energy, psi, residual, converged, iters, _ = _lanczos_lowest(H, v0, tol, max_iter, krylov_dim)
    if not converged:
        raise ConvergenceError(
            f"Lanczos did not reach residual {tol:g} in {iters} iterations "
            f"(best residual {residual:.3e})", residual)
    gap = np.inf
    if compute_gap and dim > 1:
        w0 = rng.standard_normal(dim).astype(dtype)
        e1, _, _, _, more, _ = _lanczos_lowest(H, w0, gap_tol, max_iter, krylov_dim, deflate=psi)
        iters += more
        gap = max(float(e1 - energy), 0.0)
    degenerate = gap < degeneracy_threshold
    if degenerate:
        warnings.warn(f"ground state gap estimate {gap:.2e} is below "
                      f"{degeneracy_threshold:g}", DegeneracyWarning, stacklevel=2)
    psi = _fix_phase(np.asarray(psi, dtype=np.complex128))
    return GroundStateSolution(float(energy), psi, gap, True, residual, iters, degenerate)


def solve(spec, x, **kwargs):
    """Ground state of ``H(x)`` for a model spec."""
    return ground_state(build_hamiltonian(spec, x), **kwargs)


def ops_expectation(state, sites, ops):
    """Expectation of a Pauli template ``sum_w w * label`` placed on ordered ``sites``."""
    n = _n_qubits(state)
    return float(sum(w * PauliString.on_sites(n, sites, label).expectation(state)
                     for w, label in ops))


def expectation(state, O, x=None):
    """``<psi|O|psi>`` for a :class:`PauliString` or :class:`ObservableSpec`.

    Observables whose coefficients depend on the Hamiltonian parameters (such as
    the energy observable) need ``x``.
    """
    state = np.asarray(state)
    if isinstance(O, PauliString):
        return O.expectation(_check_state(state, O.n))
    if isinstance(O, ObservableSpec):
        coeffs = O.term_coefficients(x)
        total = sum(c * ops_expectation(state, t.sites, t.ops) for c, t in zip(coeffs, O.terms))
        return float(O.normalization * total)
    raise TypeError(f"cannot take expectation of {type(O).__name__}")


def reduced_density_matrix(state, sites, max_sites=3):
    """Reduced density matrix on ``sites``, basis ordered as the sites are given."""
    sites = tuple(sites)
    if len(sites) > max_sites:
        raise ResourceLimitError(f"RDM over {len(sites)} sites exceeds the cap of {max_sites}")
    if len(set(sites)) != len(sites):
        raise ValueError(f"repeated site in {sites}")
    n = _n_qubits(state)
    for i in sites:
        if not 0 <= i < n:
            raise IndexError(f"site {i} out of range for n={n}")
    rest = [i for i in range(n) if i not in sites]
    psi = np.asarray(state).reshape((2,) * n).transpose(list(sites) + rest)
    m = psi.reshape(2 ** len(sites), -1)
    rho = m @ m.conj().T
    return (rho + rho.conj().T) / 2


def apply_permutation(g, state):
    """``U_g |psi>``: the bit of site ``i`` moves to site ``g(i)``."""
    state = np.asarray(state)
    n = _n_qubits(state)
    gmap = g.site_map(n)
    axes = np.empty(n, dtype=int)
    axes[gmap] = np.arange(n)
    return state.reshape((2,) * n).transpose(axes).reshape(-1)
