"""Property A certificates in vector form.

A certificate for a relation ``T`` is a family of unit vectors ``eta_x`` in
``l2`` of the component, such that ``||eta_x - eta_y||`` is small for every
``(x, y)`` in ``T``, and whose support relation ``{(x, y) : y in supp eta_x}`` is
controlled.  Row ``x`` of a sparse matrix stores ``eta_x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .boxspace import BoxSpace, Relation, diagonal, widen
from .label import Label, signed_classes

__all__ = ["VectorFamily", "ball_average_family", "heat_family", "certificate_quality"]


@dataclass(frozen=True)
class VectorFamily:
    """Unit vectors ``eta_x`` for the points of one component (rows of ``rows``)."""

    space: BoxSpace
    component: int
    rows: sp.csr_matrix

    def __post_init__(self):
        rows = sp.csr_matrix(self.rows, dtype=np.float64)
        rows.eliminate_zeros()
        rows.sort_indices()
        n = self.space.sizes[self.component]
        if rows.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {rows.shape}")
        norms = np.sqrt(np.asarray(rows.multiply(rows).sum(axis=1)).ravel())
        if not np.allclose(norms, 1.0, rtol=0, atol=1e-12):
            raise ValueError("every eta_x must be a unit vector")
        object.__setattr__(self, "rows", rows)

    @property
    def support_relation(self) -> Relation:
        """``{(x, y) : y in supp(eta_x)}``."""
        blocks = [sp.csr_matrix((n, n)) for n in self.space.sizes]
        blocks[self.component] = self.rows
        return Relation.from_matrices(self.space, blocks)

    def vector(self, x: int) -> np.ndarray:
        return self.rows[x].toarray().ravel()


def _normalize_rows(M: sp.csr_matrix) -> sp.csr_matrix:
    M = sp.csr_matrix(M, dtype=np.float64)
    norms = np.sqrt(np.asarray(M.multiply(M).sum(axis=1)).ravel())
    return sp.diags(1.0 / norms) @ M


def ball_average_family(component: int, base: Relation, radius: int) -> VectorFamily:
    """``eta_x`` = normalised indicator of the ball ``widen(base, radius)[x]``."""
    if radius < 1:
        raise ValueError("radius must be a positive integer")
    if not diagonal(base.space) <= base:
        raise ValueError("base must contain the diagonal")
    W = widen(base.restrict([component]), radius)
    # row x of the transpose is the ball W[x] = {z : (z, x) in W}
    rows = W.matrix(component).T.tocsr()
    return VectorFamily(base.space, component, _normalize_rows(rows))


def heat_family(component: int, L: Label, steps: int) -> VectorFamily:
    """``eta_x`` = ``steps``-fold average of ``delta_x`` under
    ``(2k+1)^-1 sum_{j=-k..k} lambda_j``, then normalised."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    space = L.base.space
    classes = signed_classes(L)
    M = sum(c.matrix(component).astype(np.float64) for c in classes) / len(classes)
    n = space.sizes[component]
    E = sp.identity(n, format="csr")
    for _ in range(steps):
        E = M @ E
    # column x of E is the averaged delta_x
    return VectorFamily(space, component, _normalize_rows(E.T.tocsr()))


def certificate_quality(fam: VectorFamily, T: Relation) -> tuple:
    """``(max over (x, y) in T of ||eta_x - eta_y||, support_relation)``."""
    pairs = T.pairs(fam.component)
    if len(pairs) == 0:
        return 0.0, fam.support_relation
    diff = fam.rows[pairs[:, 0]] - fam.rows[pairs[:, 1]]
    dist = np.sqrt(np.asarray(diff.multiply(diff).sum(axis=1)).ravel())
    return float(dist.max()), fam.support_relation
