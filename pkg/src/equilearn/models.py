"""Benchmark Hamiltonian families and observables on a periodic chain.

Two families are provided:

* ``heisenberg``: ``H = sum_i J_{i,i+1} (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1})``
  with one coupling per bond drawn from ``[0, 2]``.
* ``long_range_ising``: ``H = sum_{i<j} (1 + J_i J_j) / d(i,j)^alpha Z_i Z_j + sum_i h_i X_i``
  with per-site ``J_i`` in ``[0, 2]`` and ``h_i`` in ``[0, e]``.

A Pauli template is a tuple of ``(weight, label)`` pairs; the label has one
letter per site of the term, aligned with the term's ordered site tuple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, partial
from typing import Callable

import numpy as np

from .errors import (
    DimensionError,
    InvalidExponentError,
    InvalidLatticeError,
    InvalidObservableError,
)
from .lattice import GroupElement, ring_distance

__all__ = [
    "ParamSlot",
    "Term",
    "ModelSpec",
    "ObservableTerm",
    "ObservableSpec",
    "heisenberg_ring",
    "long_range_ising_ring",
    "sample_params",
    "energy_observable",
    "correlation_observable",
    "spec_from_dict",
    "HEISENBERG_OPS",
    "CORRELATION_OPS",
]

HEISENBERG_OPS = ((1.0, "XX"), (1.0, "YY"), (1.0, "ZZ"))
CORRELATION_OPS = ((1 / 3, "XX"), (1 / 3, "YY"), (1 / 3, "ZZ"))

DEFAULT_RANGES = {
    "heisenberg": {"J": (0.0, 2.0)},
    "long_range_ising": {"J": (0.0, 2.0), "h": (0.0, math.e)},
}


def ops_norm(ops):
    """Upper bound on the operator norm of a Pauli template."""
    return float(sum(abs(w) for w, _ in ops))


@dataclass(frozen=True)
class ParamSlot:
    kind: str
    sites: tuple[int, ...]
    low: float
    high: float

    @property
    def name(self):
        return f"{self.kind}[{','.join(map(str, self.sites))}]"


@dataclass(frozen=True)
class Term:
    """One interaction ``h_I(x_I)`` = coefficient(x[slots]) * template on ``sites``."""

    sites: tuple[int, ...]
    ops: tuple[tuple[float, str], ...]
    slots: tuple[int, ...]
    coefficient: Callable[[np.ndarray], float] = field(compare=False)
    kind: str = ""

    def coeff(self, x):
        return self.coefficient(np.asarray(x)[list(self.slots)])


def _linear_coeff(v):
    return float(v[0])


def _ising_pair_coeff(inv_dist_pow, v):
    return float((1.0 + v[0] * v[1]) * inv_dist_pow)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n: int
    terms: tuple[Term, ...]
    slots: tuple[ParamSlot, ...]
    alpha: float | None = None
    ranges: dict = field(default_factory=dict, compare=False)

    @property
    def n_params(self):
        return len(self.slots)

    @cached_property
    def _slot_lookup(self):
        return {(s.kind, tuple(sorted(s.sites))): k for k, s in enumerate(self.slots)}

    def slot_index(self, kind, sites):
        return self._slot_lookup[(kind, tuple(sorted(sites)))]

    def param_permutation(self, g: GroupElement):
        """Index array ``p`` with ``(g . x) = x[p]``, i.e. ``p[I] = gI``."""
        cache = self.__dict__.setdefault("_perm_cache", {})
        if g not in cache:
            n = self.n
            cache[g] = np.array(
                [self.slot_index(s.kind, [g.site(i, n) for i in s.sites]) for s in self.slots],
                dtype=np.intp,
            )
        return cache[g]

    def check_params(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_params,):
            raise DimensionError(f"expected {self.n_params} parameters, got shape {x.shape}")
        return x

    def coefficients(self, x):
        """Per-term coefficients ``h_I`` evaluated at ``x``."""
        x = self.check_params(x)
        return np.array([t.coeff(x) for t in self.terms])

    def to_dict(self, seed=None):
        doc = {"family": self.family, "n": self.n, "alpha": self.alpha,
               "ranges": {k: list(v) for k, v in self.ranges.items()}}
        if seed is not None:
            doc["seed"] = seed
        return doc


def _ranges(family, ranges):
    out = dict(DEFAULT_RANGES[family])
    if ranges:
        out.update({k: tuple(v) for k, v in ranges.items()})
    return out


def heisenberg_ring(n, ranges=None):
    """Heisenberg ring with one exchange coupling per bond ``(i, i+1 mod n)``."""
    if n < 3:
        raise InvalidLatticeError(f"a ring needs at least 3 sites, got n={n}")
    rng = _ranges("heisenberg", ranges)
    lo, hi = rng["J"]
    slots, terms = [], []
    for i in range(n):
        bond = (i, (i + 1) % n)
        slots.append(ParamSlot("J", bond, lo, hi))
        terms.append(Term(bond, HEISENBERG_OPS, (i,), _linear_coeff, "bond"))
    return ModelSpec("heisenberg", n, tuple(terms), tuple(slots), None, rng)


def long_range_ising_ring(n, alpha=3.0, ranges=None):
    """Long-range transverse-field Ising ring with power-law ZZ couplings."""
    if n < 3:
        raise InvalidLatticeError(f"a ring needs at least 3 sites, got n={n}")
    if not alpha > 0:
        raise InvalidExponentError(f"alpha must be positive, got {alpha}")
    rng = _ranges("long_range_ising", ranges)
    slots = [ParamSlot("J", (i,), *rng["J"]) for i in range(n)]
    slots += [ParamSlot("h", (i,), *rng["h"]) for i in range(n)]
    terms = []
    for i in range(n):
        for j in range(i + 1, n):
            d = ring_distance(i, j, n)
            coeff = partial(_ising_pair_coeff, 1.0 / d**alpha)
            terms.append(Term((i, j), ((1.0, "ZZ"),), (i, j), coeff, "pair"))
    for i in range(n):
        terms.append(Term((i,), ((1.0, "X"),), (n + i,), _linear_coeff, "field"))
    return ModelSpec("long_range_ising", n, tuple(terms), tuple(slots), float(alpha), rng)


def spec_from_dict(doc):
    """Rebuild a :class:`ModelSpec` from ``{"family", "n", "alpha", "ranges"}``."""
    family = doc["family"]
    if family == "heisenberg":
        return heisenberg_ring(int(doc["n"]), doc.get("ranges"))
    if family == "long_range_ising":
        alpha = doc.get("alpha")
        return long_range_ising_ring(int(doc["n"]), 3.0 if alpha is None else float(alpha),
                                     doc.get("ranges"))
    raise ValueError(f"unknown model family {family!r}")


def sample_params(spec, rng_seed):
    """Independent uniform draw for every parameter slot."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    lo = np.array([s.low for s in spec.slots])
    hi = np.array([s.high for s in spec.slots])
    return rng.uniform(lo, hi)


@dataclass(frozen=True)
class ObservableTerm:
    sites: tuple[int, ...]
    ops: tuple[tuple[float, str], ...]
    coeff: float = 1.0

    @property
    def norm(self):
        return ops_norm(self.ops)


@dataclass(frozen=True)
class ObservableSpec:
    """``normalization * sum_I coeff_I * O_I``.

    When ``model`` is set the terms are aligned with ``model.terms`` and each
    coefficient is further multiplied by the Hamiltonian coefficient at ``x``.
    """

    terms: tuple[ObservableTerm, ...]
    normalization: float = 1.0
    model: ModelSpec | None = None

    @property
    def l1_norm(self):
        return float(sum(abs(t.coeff) * t.norm for t in self.terms))

    def term_coefficients(self, x=None):
        c = np.array([t.coeff for t in self.terms], dtype=float)
        if self.model is not None:
            if x is None:
                raise DimensionError("this observable needs parameters x for its coefficients")
            c = c * self.model.coefficients(x)
        return c


def energy_observable(spec):
    """``H / sqrt(n)`` expressed term by term."""
    terms = tuple(ObservableTerm(t.sites, t.ops, 1.0) for t in spec.terms)
    return ObservableSpec(terms, 1.0 / math.sqrt(spec.n), spec)


def correlation_observable(i, j):
    """``C_ij = (X_i X_j + Y_i Y_j + Z_i Z_j) / 3``."""
    if i == j:
        raise InvalidObservableError("correlation needs two distinct sites")
    a, b = sorted((i, j))
    return ObservableSpec((ObservableTerm((a, b), CORRELATION_OPS, 1.0),), 1.0)
