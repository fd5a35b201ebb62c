"""Periodic chain symmetries: translations and reflections of a ring of n sites.

A group element acts on sites as ``i -> (shift + s * i) mod n`` with ``s = -1``
for reflections and ``s = +1`` otherwise.  Composition follows
``(g * h)(i) = g(h(i))``.

The induced action on parameter vectors is ``(g . x)_I = x_{gI}``.  With this
convention ``g . (h . x) == (h * g) . x``, i.e. it is a right action.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLatticeError

__all__ = [
    "GroupElement",
    "Group",
    "OrbitClass",
    "build_group",
    "ring_distance",
    "act_on_sites",
    "act_on_params",
    "orbits",
]


def ring_distance(i, j, n):
    """Distance between sites ``i`` and ``j`` on a periodic chain."""
    d = abs(i - j) % n
    return min(d, n - d)


@dataclass(frozen=True)
class GroupElement:
    shift: int
    reflect: bool = False

    def site(self, i, n):
        return (self.shift - i) % n if self.reflect else (self.shift + i) % n

    def compose(self, other, n):
        """Return ``self * other``, the map ``i -> self(other(i))``."""
        s = -1 if self.reflect else 1
        return GroupElement((self.shift + s * other.shift) % n, self.reflect != other.reflect)

    def inverse(self, n):
        if self.reflect:
            return self
        return GroupElement((-self.shift) % n, False)

    def site_map(self, n):
        """Array ``m`` with ``m[i] = g(i)``."""
        i = np.arange(n)
        return (self.shift - i) % n if self.reflect else (self.shift + i) % n

    @property
    def is_identity(self):
        return self.shift == 0 and not self.reflect


IDENTITY = GroupElement(0, False)


@dataclass(frozen=True)
class Group:
    n: int
    elements: tuple[GroupElement, ...]
    include_reflections: bool = True
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {g: k for k, g in enumerate(self.elements)})

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, k):
        return self.elements[k]

    def index(self, g):
        return self._index[g]

    def compose(self, g, h):
        return g.compose(h, self.n)

    def inverse(self, g):
        return g.inverse(self.n)

    @property
    def identity(self):
        return self.elements[0]


def build_group(n, include_reflections=True):
    """All translations of an ``n``-site ring, plus reflections if requested.

    Elements are ordered by shift, translations first.
    """
    if n < 3:
        raise InvalidLatticeError(f"a ring needs at least 3 sites, got n={n}")
    elements = [GroupElement(s, False) for s in range(n)]
    if include_reflections:
        elements += [GroupElement(s, True) for s in range(n)]
    return Group(n, tuple(elements), include_reflections)


def trivial_group(n):
    """The group containing only the identity (used for ablations)."""
    return Group(n, (IDENTITY,), False)


def _check_sites(sites, n):
    for i in sites:
        if not 0 <= i < n:
            raise IndexError(f"site {i} out of range for n={n}")


def act_on_sites(g, sites, n):
    """Image ``gI`` of a site set, returned as a sorted tuple."""
    _check_sites(sites, n)
    return tuple(sorted(g.site(i, n) for i in sites))


def act_on_params(g, x, layout):
    """Return ``x'`` with ``x'_I = x_{gI}`` for every parameter slot ``I``.

    ``layout`` is anything with a ``param_permutation(g)`` method, typically a
    :class:`~equilearn.models.ModelSpec`.
    """
    x = np.asarray(x)
    perm = layout.param_permutation(g)
    if x.shape != perm.shape:
        from .errors import DimensionError

        raise DimensionError(f"parameter vector has shape {x.shape}, layout expects {perm.shape}")
    return x[perm]


@dataclass(frozen=True)
class OrbitClass:
    """Orbit ``[I]`` of a site set under ``G``.

    ``members`` holds one ``(g, gI)`` pair per distinct image, with ``g`` the
    first group element (in group order) producing that image.
    """

    representative: tuple[int, ...]
    members: tuple[tuple[GroupElement, tuple[int, ...]], ...]
    stabilizer: tuple[GroupElement, ...]

    @property
    def stabilizer_size(self):
        return len(self.stabilizer)

    def __len__(self):
        return len(self.members)

    def member_sites(self):
        return [m for _, m in self.members]


def orbits(site_sets, group):
    """Partition ``site_sets`` into orbits under ``group``.

    Every orbit is closed under the group action; site sets of ``site_sets``
    that share an orbit end up in the same class.  Representatives are the
    lexicographically smallest member and classes are sorted by representative.
    """
    n = group.n
    remaining = {tuple(sorted(s)) for s in site_sets}
    for s in remaining:
        _check_sites(s, n)
    classes = []
    while remaining:
        start = min(remaining)
        images = {}
        for g in group:
            images.setdefault(act_on_sites(g, start, n), g)
        rep = min(images)
        # re-anchor so that members are given relative to the representative
        members = {}
        stabilizer = []
        for g in group:
            image = act_on_sites(g, rep, n)
            members.setdefault(image, g)
            if image == rep:
                stabilizer.append(g)
        classes.append(OrbitClass(rep, tuple((g, s) for s, g in members.items()), tuple(stabilizer)))
        remaining -= set(members)
    classes.sort(key=lambda c: (len(c.representative), c.representative))
    return classes
