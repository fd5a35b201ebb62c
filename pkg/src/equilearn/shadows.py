"""Classical shadows from randomized single-qubit Pauli measurements."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import InvalidObservableError, ResourceLimitError
from .quantum import _n_qubits

__all__ = [
    "ShadowRecord",
    "ShadowEstimate",
    "measure_shadow",
    "estimate_rdm",
    "estimate_pauli",
    "pauli_snapshots",
    "estimate_correlation",
    "project_psd",
    "shadow_count",
    "estimate_ops",
    "pauli_matrix",
    "TWO_SITE_PAULIS",
]

BASES = "XYZ"

_SQ2 = 1 / math.sqrt(2)
# rows map the measured basis onto Z: X via H, Y via H S^dagger
_ROTATIONS = np.array([
    [[_SQ2, _SQ2], [_SQ2, -_SQ2]],
    [[_SQ2, -1j * _SQ2], [_SQ2, 1j * _SQ2]],
    [[1, 0], [0, 1]],
], dtype=complex)

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _snapshot_factor(basis, outcome):
    """Single-qubit inverse channel ``3 U^dag |b><b| U - I``."""
    ket = _ROTATIONS[basis].conj().T[:, 0 if outcome > 0 else 1]
    return 3 * np.outer(ket, ket.conj()) - np.eye(2)


# (basis, outcome) -> 2x2 matrix, outcome index 0 for +1 and 1 for -1
_FACTORS = np.array([[_snapshot_factor(b, s) for s in (1, -1)] for b in range(3)])


@dataclass(frozen=True)
class ShadowRecord:
    """Measurement bases (0, 1, 2 for X, Y, Z) and +-1 outcomes, shape (T, n)."""

    bases: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        if self.bases.shape != self.outcomes.shape or self.bases.ndim != 2:
            raise ValueError("bases and outcomes must both have shape (T, n)")

    @property
    def T(self):
        return self.bases.shape[0]

    @property
    def n(self):
        return self.bases.shape[1]

    def to_dict(self):
        return {
            "n": self.n,
            "T": self.T,
            "bases": ["".join(BASES[b] for b in row) for row in self.bases],
            "outcomes": ["".join("0" if s > 0 else "1" for s in row) for row in self.outcomes],
        }

    @classmethod
    def from_dict(cls, doc):
        bases = np.array([[BASES.index(c) for c in row] for row in doc["bases"]], dtype=np.int8)
        outcomes = np.array([[1 if c == "0" else -1 for c in row] for row in doc["outcomes"]],
                            dtype=np.int8)
        bases = bases.reshape(int(doc["T"]), int(doc["n"]))
        return cls(bases, outcomes.reshape(bases.shape))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ShadowEstimate:
    sites: tuple[int, ...]
    matrix: np.ndarray
    snapshots: int


def measure_shadow(state, T, rng_seed, batch=512):
    """Simulate ``T`` randomized Pauli-basis measurements of ``state``.

    Each snapshot draws a basis per qubit uniformly, rotates the state so that
    basis becomes Z, and samples the full bitstring from the Born distribution
    (equivalent to measuring qubits one after another with collapse).
    """
    if T < 1:
        raise ValueError(f"need at least one snapshot, got T={T}")
    state = np.asarray(state, dtype=complex)
    n = _n_qubits(state)
    rng = np.random.default_rng(rng_seed)
    bases = rng.integers(0, 3, size=(T, n)).astype(np.int8)
    u = rng.random(T)
    bits = np.empty(T, dtype=np.int64)
    for start in range(0, T, batch):
        stop = min(start + batch, T)
        B = stop - start
        psi = np.broadcast_to(state, (B, 2**n)).copy()
        for q in range(n):
            U = _ROTATIONS[bases[start:stop, q]]
            psi = psi.reshape(B, 2**q, 2, 2 ** (n - q - 1))
            psi = np.einsum("bij,bajc->baic", U, psi)
        probs = np.abs(psi.reshape(B, -1)) ** 2
        cdf = np.cumsum(probs, axis=1)
        cdf /= cdf[:, -1:]
        idx = (cdf < u[start:stop, None]).sum(axis=1)
        bits[start:stop] = np.minimum(idx, 2**n - 1)
    shifts = n - 1 - np.arange(n)
    outcomes = (1 - 2 * ((bits[:, None] >> shifts) & 1)).astype(np.int8)
    return ShadowRecord(bases, outcomes)


def _check_record(record):
    if record.T == 0:
        raise ValueError("empty shadow record")


def estimate_rdm(record, sites, psd=False):
    """Shadow estimate of the reduced density matrix on ordered ``sites``.

    The raw estimate is Hermitian with unit trace but may have negative
    eigenvalues; ``psd=True`` projects it onto the nearest density matrix.
    """
    _check_record(record)
    sites = tuple(sites)
    if len(sites) > 2:
        raise ResourceLimitError("shadow RDMs are limited to two sites")
    k = len(sites)
    cols = list(sites)
    b = record.bases[:, cols].astype(np.int64)
    s = (record.outcomes[:, cols] < 0).astype(np.int64)
    code = np.zeros(record.T, dtype=np.int64)
    for q in range(k):
        code = code * 6 + b[:, q] * 2 + s[:, q]
    counts = np.bincount(code, minlength=6**k) / record.T
    rho = np.zeros((2**k, 2**k), dtype=complex)
    for c in np.nonzero(counts)[0]:
        m = np.ones((1, 1), dtype=complex)
        digits = []
        rem = int(c)
        for _ in range(k):
            digits.append(rem % 6)
            rem //= 6
        for d in reversed(digits):
            m = np.kron(m, _FACTORS[d // 2, d % 2])
        rho += counts[c] * m
    rho = (rho + rho.conj().T) / 2
    if psd:
        rho = project_psd(rho)
    return ShadowEstimate(sites, rho, record.T)


def project_psd(rho):
    """Closest unit-trace positive semidefinite matrix (eigenvalue simplex projection)."""
    w, v = np.linalg.eigh(rho)
    # Euclidean projection of the spectrum onto the probability simplex
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    r = np.nonzero(u - (css - 1) / k > 0)[0][-1]
    theta = (css[r] - 1) / (r + 1)
    w = np.clip(w - theta, 0, None)
    return (v * w) @ v.conj().T


def pauli_snapshots(record, sites, label):
    """Single-snapshot estimates ``prod_q 3 s_q [basis_q == P_q]`` of a Pauli string."""
    _check_record(record)
    vals = np.ones(record.T)
    for i, a in zip(sites, label):
        if a == "I":
            continue
        hit = record.bases[:, i] == BASES.index(a)
        vals = vals * np.where(hit, 3.0 * record.outcomes[:, i], 0.0)
    return vals


def estimate_pauli(record, sites, label):
    return float(pauli_snapshots(record, sites, label).mean())


def estimate_ops(record, sites, ops):
    """Shadow estimate of a Pauli template on ordered ``sites``."""
    return float(sum(w * estimate_pauli(record, sites, label) for w, label in ops))


def estimate_correlation(record, i, j):
    """Shadow estimate of ``(X_i X_j + Y_i Y_j + Z_i Z_j) / 3``."""
    if i == j:
        raise InvalidObservableError("correlation needs two distinct sites")
    _check_record(record)
    same = record.bases[:, i] == record.bases[:, j]
    prod = record.outcomes[:, i].astype(float) * record.outcomes[:, j]
    return float(np.mean(np.where(same, 9.0 * prod, 0.0)) / 3)


def shadow_count(n, C=50.0):
    """Snapshot budget ``ceil(C log2 n)``."""
    return int(math.ceil(C * math.log2(n) - 1e-12))


def pauli_matrix(label):
    m = np.ones((1, 1), dtype=complex)
    for a in label:
        m = np.kron(m, _PAULI[a])
    return m


TWO_SITE_PAULIS = tuple("".join(p) for p in product("IXYZ", repeat=2) if p != ("I", "I"))
