"""Box spaces and the algebra of controlled sets.

A box space is a finite list of components; every point is addressed as
``(component, index)``.  A :class:`Relation` is a set of ordered pairs
``(x, y)`` that never leaves a component.  Pairs are stored per component as
a sorted array of integer keys ``x * n + y`` (``n`` the component size), so
two relations with the same pairs are equal bit for bit.

Orientation follows the usual conventions for maps: ``(x, y) in R`` reads
"``x`` is reached from ``y``", ``R[Y] = {x : (x, y) in R for some y in Y}``
and ``compose(R1, R2) = {(x, y) : (x, z) in R1, (z, y) in R2}``.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import SpaceMismatchError

__all__ = [
    "Point",
    "BoxSpace",
    "Relation",
    "WeightedComponent",
    "diagonal",
    "full_relation",
    "empty_relation",
    "inverse",
    "compose",
    "power",
    "ball",
    "is_bounded",
    "widen",
    "max_degree",
    "distance_layers",
    "box_subspace",
]

Point = namedtuple("Point", ["component", "index"])


@dataclass(frozen=True)
class BoxSpace:
    """Disjoint union of finite, nonempty components.

    Parameters
    ----------
    sizes : sequence of int
        Number of points in each component.
    labels : optional sequence of per-component label tuples
    """

    sizes: tuple
    labels: tuple | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise ValueError("a box space needs at least one component")
        if any(s < 1 for s in sizes):
            raise ValueError(f"component sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        if self.labels is not None:
            labels = tuple(None if lab is None else tuple(str(v) for v in lab) for lab in self.labels)
            if len(labels) != len(sizes):
                raise ValueError("one label tuple (or None) per component is required")
            for m, lab in enumerate(labels):
                if lab is not None and len(lab) != sizes[m]:
                    raise ValueError(f"component {m}: {len(lab)} labels for {sizes[m]} points")
            object.__setattr__(self, "labels", labels)

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    def size(self, component: int) -> int:
        return self.sizes[component]

    def points(self, component: int) -> range:
        return range(self.sizes[component])

    def check_point(self, p: Point) -> None:
        if not (0 <= p.component < self.n_components and 0 <= p.index < self.sizes[p.component]):
            raise IndexError(f"{p} is not a point of this space")


def _canonical_keys(keys: np.ndarray) -> np.ndarray:
    out = np.unique(np.asarray(keys, dtype=np.int64))
    out.setflags(write=False)
    return out


class Relation:
    """A controlled set on a :class:`BoxSpace`, stored per component.

    ``pairs[m]`` is any iterable of ``(x, y)`` index pairs, or an ``(k, 2)``
    integer array, for component ``m``.  Components may be omitted by passing
    a dict.
    """

    __slots__ = ("space", "_keys", "_cache")

    def __init__(self, space: BoxSpace, pairs):
        self.space = space
        if isinstance(pairs, dict):
            pairs = [pairs.get(m, ()) for m in range(space.n_components)]
        if len(pairs) != space.n_components:
            raise ValueError(f"expected pairs for {space.n_components} components, got {len(pairs)}")
        keys = []
        for m, comp in enumerate(pairs):
            n = space.sizes[m]
            arr = np.asarray(list(comp) if not isinstance(comp, np.ndarray) else comp, dtype=np.int64)
            if arr.size == 0:
                keys.append(_canonical_keys(np.empty(0, dtype=np.int64)))
                continue
            arr = arr.reshape(-1, 2)
            if arr.min() < 0 or arr.max() >= n:
                raise IndexError(f"component {m}: pair index out of range for size {n}")
            keys.append(_canonical_keys(arr[:, 0] * n + arr[:, 1]))
        self._keys = tuple(keys)
        self._cache = {}

    @classmethod
    def _from_keys(cls, space: BoxSpace, keys: Sequence[np.ndarray]) -> "Relation":
        obj = cls.__new__(cls)
        obj.space = space
        obj._keys = tuple(_canonical_keys(k) for k in keys)
        obj._cache = {}
        return obj

    @classmethod
    def from_matrices(cls, space: BoxSpace, matrices: Sequence) -> "Relation":
        """Relation given by the nonzero pattern of one matrix per component."""
        keys = []
        for m, mat in enumerate(matrices):
            n = space.sizes[m]
            coo = sp.coo_matrix(mat)
            nz = coo.data != 0
            keys.append(coo.row[nz].astype(np.int64) * n + coo.col[nz])
        return cls._from_keys(space, keys)

    def keys(self, component: int) -> np.ndarray:
        return self._keys[component]

    def pairs(self, component: int) -> np.ndarray:
        """``(k, 2)`` array of ``(x, y)`` pairs of one component, sorted."""
        n = self.space.sizes[component]
        k = self._keys[component]
        return np.stack([k // n, k % n], axis=1)

    def matrix(self, component: int) -> sp.csr_matrix:
        """0/1 matrix with ``M[x, y] = 1`` iff ``(x, y)`` is in the relation."""
        if component not in self._cache:
            n = self.space.sizes[component]
            p = self.pairs(component)
            mat = sp.csr_matrix(
                (np.ones(len(p), dtype=np.int32), (p[:, 0], p[:, 1])), shape=(n, n)
            )
            self._cache[component] = mat
        return self._cache[component]

    def contains(self, component: int, x: int, y: int) -> bool:
        k = self._keys[component]
        key = x * self.space.sizes[component] + y
        i = np.searchsorted(k, key)
        return bool(i < len(k) and k[i] == key)

    def count(self, component: int) -> int:
        return len(self._keys[component])

    def __len__(self) -> int:
        return sum(len(k) for k in self._keys)

    def __iter__(self):
        for m in range(self.space.n_components):
            for x, y in self.pairs(m):
                yield Point(m, int(x)), Point(m, int(y))

    def as_sets(self) -> list:
        """Per-component Python sets of ``(x, y)`` tuples."""
        return [set(map(tuple, self.pairs(m).tolist())) for m in range(self.space.n_components)]

    def _check(self, other: "Relation") -> None:
        if not isinstance(other, Relation):
            raise TypeError(f"expected a Relation, got {type(other).__name__}")
        if other.space.sizes != self.space.sizes:
            raise SpaceMismatchError("relations live on different box spaces")

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return self.space.sizes == other.space.sizes and all(
            np.array_equal(a, b) for a, b in zip(self._keys, other._keys)
        )

    def __hash__(self):
        return hash((self.space.sizes, tuple(k.tobytes() for k in self._keys)))

    def __or__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation._from_keys(self.space, [np.union1d(a, b) for a, b in zip(self._keys, other._keys)])

    def __and__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation._from_keys(
            self.space, [np.intersect1d(a, b, assume_unique=True) for a, b in zip(self._keys, other._keys)]
        )

    def __sub__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation._from_keys(
            self.space, [np.setdiff1d(a, b, assume_unique=True) for a, b in zip(self._keys, other._keys)]
        )

    def __le__(self, other: "Relation") -> bool:
        self._check(other)
        return all(np.isin(a, b, assume_unique=True).all() for a, b in zip(self._keys, other._keys))

    def issubset(self, other: "Relation") -> bool:
        return self <= other

    def is_symmetric(self) -> bool:
        return self == inverse(self)

    def restrict(self, components: Iterable[int]) -> "Relation":
        """Keep only the pairs of the listed components."""
        keep = set(components)
        empty = np.empty(0, dtype=np.int64)
        return Relation._from_keys(
            self.space, [k if m in keep else empty for m, k in enumerate(self._keys)]
        )

    def __repr__(self):
        counts = ", ".join(str(len(k)) for k in self._keys)
        return f"Relation(sizes={self.space.sizes}, pairs=[{counts}])"


@dataclass(frozen=True, eq=False)
class WeightedComponent:
    """Strictly positive probability weights on one component."""

    component: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive on the whole component")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, component: int, size: int) -> "WeightedComponent":
        return cls(component, np.full(size, 1.0 / size))

    @classmethod
    def normalized(cls, component: int, values) -> "WeightedComponent":
        v = np.asarray(values, dtype=np.float64)
        return cls(component, v / v.sum())

    def __len__(self):
        return len(self.weights)

    def measure(self, subset: Iterable[int]) -> float:
        idx = np.fromiter(subset, dtype=np.int64)
        return float(self.weights[idx].sum()) if idx.size else 0.0


def diagonal(space: BoxSpace) -> Relation:
    return Relation._from_keys(space, [np.arange(n, dtype=np.int64) * (n + 1) for n in space.sizes])


def full_relation(space: BoxSpace) -> Relation:
    return Relation._from_keys(space, [np.arange(n * n, dtype=np.int64) for n in space.sizes])


def empty_relation(space: BoxSpace) -> Relation:
    return Relation._from_keys(space, [np.empty(0, dtype=np.int64) for _ in space.sizes])


def inverse(R: Relation) -> Relation:
    keys = []
    for m, n in enumerate(R.space.sizes):
        k = R.keys(m)
        keys.append((k % n) * n + k // n)
    return Relation._from_keys(R.space, keys)


def compose(R1: Relation, R2: Relation) -> Relation:
    """``{(x, y) : exists z with (x, z) in R1 and (z, y) in R2}``."""
    R1._check(R2)
    mats = []
    for m in range(R1.space.n_components):
        if R1.count(m) == 0 or R2.count(m) == 0:
            mats.append(sp.csr_matrix((R1.space.sizes[m],) * 2, dtype=np.int32))
        else:
            mats.append(R1.matrix(m) @ R2.matrix(m))
    return Relation.from_matrices(R1.space, mats)


def power(R: Relation, n: int) -> Relation:
    if int(n) != n or n < 1:
        raise ValueError("power needs n >= 1; use diagonal(space) for the zeroth power")
    result = R
    for _ in range(int(n) - 1):
        result = compose(result, R)
    return result


def _as_index_array(Y, size: int) -> np.ndarray:
    idx = np.unique(np.fromiter((int(y) for y in Y), dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= size):
        raise IndexError("point index out of range")
    return idx


def ball(R: Relation, Y: Iterable[int], component: int = 0) -> frozenset:
    """``R[Y] = {x : (x, y) in R for some y in Y}`` inside one component."""
    n = R.space.sizes[component]
    idx = _as_index_array(Y, n)
    if idx.size == 0:
        return frozenset()
    p = R.pairs(component)
    hit = np.isin(p[:, 1], idx)
    return frozenset(np.unique(p[hit, 0]).tolist())


def is_bounded(R: Relation, Y: Iterable[int], component: int = 0) -> bool:
    """True iff ``Y`` is contained in ``R[x] = {z : (z, x) in R}`` for some ``x``."""
    n = R.space.sizes[component]
    idx = _as_index_array(Y, n)
    if idx.size == 0:
        return True
    counts = np.asarray(R.matrix(component)[idx, :].sum(axis=0)).ravel()
    return bool((counts == idx.size).any())


def widen(R: Relation, n: int) -> Relation:
    """``(diag | R | R^-1)`` composed with itself ``n`` times."""
    if int(n) != n or n < 1:
        raise ValueError("widen needs n >= 1")
    base = diagonal(R.space) | R | inverse(R)
    return power(base, n)


def distance_layers(R: Relation, radius: int) -> list:
    """``[diag, widen(R, 1), ..., widen(R, radius)]`` computed incrementally."""
    layers = [diagonal(R.space)]
    if radius < 1:
        return layers
    step = layers[0] | R | inverse(R)
    layers.append(step)
    for _ in range(radius - 1):
        layers.append(compose(layers[-1], step))
    return layers


def max_degree(R: Relation) -> int:
    """``max_x max(#R[x], #R^-1[x])``; 0 for the empty relation."""
    best = 0
    for m, n in enumerate(R.space.sizes):
        p = R.pairs(m)
        if len(p) == 0:
            continue
        best = max(best, int(np.bincount(p[:, 0], minlength=n).max()), int(np.bincount(p[:, 1], minlength=n).max()))
    return best


def box_subspace(R: Relation, supports: Sequence[Iterable[int]]) -> tuple:
    """Restrict ``R`` to chosen subsets, one per component.

    Returns ``(space, relation, index_maps)`` where the new space has one
    component per nonempty support and ``index_maps[i]`` lists the original
    indices of the new component ``i``.
    """
    maps, keys, sizes = [], [], []
    for m, sub in enumerate(supports):
        idx = _as_index_array(sub, R.space.sizes[m])
        if idx.size == 0:
            continue
        n_old = R.space.sizes[m]
        local = -np.ones(n_old, dtype=np.int64)
        local[idx] = np.arange(idx.size)
        p = R.pairs(m)
        keep = (local[p[:, 0]] >= 0) & (local[p[:, 1]] >= 0)
        k = idx.size
        keys.append(local[p[keep, 0]] * k + local[p[keep, 1]])
        sizes.append(k)
        maps.append((m, idx))
    space = BoxSpace(tuple(sizes))
    return space, Relation._from_keys(space, keys), maps
