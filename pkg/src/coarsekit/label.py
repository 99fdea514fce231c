"""Labels: decompositions of a controlled set into partial bijections.

A label on ``T`` (with ``T`` containing the diagonal) is a list of relations
``phi(0), ..., phi(k)`` whose union is ``T``, where ``phi(0)`` is the
diagonal and every ``phi(i)`` is the graph of a partially defined injective
map.  Finding one is edge colouring of the bipartite graph rows/columns of
``T``; a first-fit greedy pass already stays within ``2d - 1`` colours for a
relation of maximum degree ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxspace import Relation, diagonal, inverse, max_degree
from .errors import MissingDiagonalError

__all__ = ["Label", "build_label", "verify_label", "is_partial_bijection", "signed_classes"]


@dataclass(frozen=True)
class Label:
    base: Relation
    classes: tuple

    @property
    def k(self) -> int:
        """Number of non-diagonal classes."""
        return len(self.classes) - 1

    def __len__(self):
        return len(self.classes)

    def __getitem__(self, j: int) -> Relation:
        """``phi(j)`` for ``-k <= j <= k``; negative ``j`` gives the inverse map."""
        if j < 0:
            return inverse(self.classes[-j])
        return self.classes[j]


def build_label(R: Relation) -> Label:
    """Greedy first-fit label of ``R``.

    Non-diagonal pairs are scanned in sorted ``(x, y)`` order per component;
    each pair goes to the first class whose row ``x`` and column ``y`` are
    both still free.  Classes are shared across components.
    """
    diag = diagonal(R.space)
    if not diag <= R:
        raise MissingDiagonalError("a label needs the relation to contain the diagonal")
    rest = R - diag
    per_class_keys: list[list[list[int]]] = []
    for m, n in enumerate(R.space.sizes):
        rows_used: list[set] = [set() for _ in per_class_keys]
        cols_used: list[set] = [set() for _ in per_class_keys]
        for x, y in rest.pairs(m).tolist():
            for c in range(len(rows_used)):
                if x not in rows_used[c] and y not in cols_used[c]:
                    break
            else:
                c = len(rows_used)
                rows_used.append(set())
                cols_used.append(set())
            rows_used[c].add(x)
            cols_used[c].add(y)
            while len(per_class_keys) <= c:
                per_class_keys.append([[] for _ in R.space.sizes])
            per_class_keys[c][m].append(x * n + y)
    classes = [diag] + [
        Relation._from_keys(R.space, [np.asarray(k, dtype=np.int64) for k in keys]) for keys in per_class_keys
    ]
    return Label(R, tuple(classes))


def is_partial_bijection(R: Relation) -> bool:
    for m in range(R.space.n_components):
        p = R.pairs(m)
        if len(np.unique(p[:, 0])) != len(p) or len(np.unique(p[:, 1])) != len(p):
            return False
    return True


def verify_label(L: Label) -> bool:
    """Exhaustive check of the label conditions."""
    if not L.classes:
        return False
    space = L.base.space
    if any(c.space.sizes != space.sizes for c in L.classes):
        return False
    union = L.classes[0]
    for c in L.classes[1:]:
        union = union | c
    if union != L.base:
        return False
    if not all(is_partial_bijection(c) for c in L.classes):
        return False
    diag = diagonal(space)
    if diag <= L.base and L.classes[0] != diag:
        return False
    return True


def signed_classes(L: Label) -> list:
    """``[phi(-k), ..., phi(-1), phi(0), phi(1), ..., phi(k)]``."""
    return [inverse(c) for c in reversed(L.classes[1:])] + list(L.classes)


def greedy_bound(R: Relation) -> int:
    """Upper bound ``2d - 1`` on the number of non-diagonal classes."""
    return max(0, 2 * max_degree(R) - 1)
