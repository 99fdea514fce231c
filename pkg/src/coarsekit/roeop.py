"""Finite-propagation operators on a box space.

An operator is block diagonal, one sparse matrix per component, together
with a relation that bounds its support (an element of ``E_T`` for ``T`` the
tracked propagation).  Products and adjoints track propagation through
relation composition and inversion; the tracked set is a superset of the
actual nonzero pattern and is never pruned after cancellation.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .boxspace import BoxSpace, Relation, compose, diagonal, inverse
from .errors import NonConvergenceError, SpaceMismatchError

__all__ = [
    "PropagationOperator",
    "identity",
    "from_relation",
    "markov_operator",
    "multiply",
    "adjoint",
    "add",
    "operator_norm",
    "compressed_norm",
    "power_iteration",
    "DENSE_COLUMN_LIMIT",
]

# Column restrictions up to this width use a dense SVD; wider ones use power iteration.
DENSE_COLUMN_LIMIT = 512


class PropagationOperator:
    """Block-diagonal sparse operator with a tracked propagation relation."""

    __slots__ = ("space", "blocks", "propagation")

    def __init__(self, space: BoxSpace, blocks: Sequence, propagation: Relation | None = None):
        if len(blocks) != space.n_components:
            raise ValueError(f"expected {space.n_components} blocks, got {len(blocks)}")
        mats = []
        for m, b in enumerate(blocks):
            mat = sp.csr_matrix(b)
            if mat.shape != (space.sizes[m],) * 2:
                raise ValueError(f"block {m} has shape {mat.shape}, expected {(space.sizes[m],) * 2}")
            mat = mat.copy()
            mat.eliminate_zeros()
            mat.sort_indices()
            mats.append(mat)
        support = Relation.from_matrices(space, mats)
        if propagation is None:
            propagation = support
        elif propagation.space.sizes != space.sizes:
            raise SpaceMismatchError("propagation relation lives on another space")
        elif not support <= propagation:
            raise ValueError("operator has nonzero entries outside its propagation relation")
        self.space = space
        self.blocks = tuple(mats)
        self.propagation = propagation

    def support(self) -> Relation:
        """Actual nonzero pattern (a subset of ``propagation``)."""
        return Relation.from_matrices(self.space, self.blocks)

    def dense(self, component: int) -> np.ndarray:
        return self.blocks[component].toarray()

    def restrict_columns(self, component: int, keep: Iterable[int]) -> "PropagationOperator":
        """``a P`` where ``P`` projects one component onto ``keep``; other blocks untouched."""
        n = self.space.sizes[component]
        mask = np.zeros(n)
        mask[np.fromiter(keep, dtype=np.int64)] = 1.0
        blocks = list(self.blocks)
        blocks[component] = blocks[component] @ sp.diags(mask)
        return PropagationOperator(self.space, blocks, self.propagation)

    def __matmul__(self, other):
        return multiply(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, other * -1.0)

    def __mul__(self, scalar):
        return PropagationOperator(self.space, [b * scalar for b in self.blocks], self.propagation)

    __rmul__ = __mul__

    @property
    def H(self):
        return adjoint(self)

    def __repr__(self):
        nnz = ", ".join(str(b.nnz) for b in self.blocks)
        return f"PropagationOperator(sizes={self.space.sizes}, nnz=[{nnz}])"


def identity(space: BoxSpace) -> PropagationOperator:
    return PropagationOperator(space, [sp.identity(n, format="csr") for n in space.sizes], diagonal(space))


def from_relation(R: Relation, values: float = 1.0) -> PropagationOperator:
    """Operator with the constant ``values`` on every pair of ``R`` (adjacency-like)."""
    blocks = [R.matrix(m).astype(np.float64) * values for m in range(R.space.n_components)]
    return PropagationOperator(R.space, blocks, R)


def markov_operator(R: Relation) -> PropagationOperator:
    """``D_r^{-1/2} A D_c^{-1/2}`` for the 0/1 matrix ``A`` of ``R``.

    For a symmetric regular relation this is ``A / degree``; in general its
    norm is at most one by the Schur test.
    """
    blocks = []
    for m in range(R.space.n_components):
        A = R.matrix(m).astype(np.float64)
        r = np.asarray(A.sum(axis=1)).ravel()
        c = np.asarray(A.sum(axis=0)).ravel()
        rs = np.divide(1.0, np.sqrt(r), out=np.zeros_like(r), where=r > 0)
        cs = np.divide(1.0, np.sqrt(c), out=np.zeros_like(c), where=c > 0)
        blocks.append(sp.diags(rs) @ A @ sp.diags(cs))
    return PropagationOperator(R.space, blocks, R)


def _same_space(a: PropagationOperator, b: PropagationOperator) -> None:
    if a.space.sizes != b.space.sizes:
        raise SpaceMismatchError("operators live on different box spaces")


def multiply(a: PropagationOperator, b: PropagationOperator) -> PropagationOperator:
    _same_space(a, b)
    blocks = [x @ y for x, y in zip(a.blocks, b.blocks)]
    return PropagationOperator(a.space, blocks, compose(a.propagation, b.propagation))


def adjoint(a: PropagationOperator) -> PropagationOperator:
    return PropagationOperator(a.space, [b.conj().T for b in a.blocks], inverse(a.propagation))


def add(a: PropagationOperator, b: PropagationOperator) -> PropagationOperator:
    _same_space(a, b)
    return PropagationOperator(a.space, [x + y for x, y in zip(a.blocks, b.blocks)], a.propagation | b.propagation)


def _seed(n: int) -> np.ndarray:
    # all-ones plus a fixed, non-symmetric perturbation
    v = np.ones(n) + 1e-3 * np.cos(np.arange(n) * 1.2345 + 0.5)
    return v / np.linalg.norm(v)


def power_iteration(matvec, n: int, tol: float = 1e-13, max_iter: int | None = None, seed=None, component=None):
    """Largest eigenvalue of a positive semidefinite operator given by ``matvec``.

    Stops when successive Rayleigh quotients differ by less than
    ``tol * estimate``.  Returns ``(eigenvalue, unit_vector, iterations)``.
    """
    if max_iter is None:
        max_iter = 10 * n + 1000
    v = _seed(n) if seed is None else np.asarray(seed, dtype=float) / np.linalg.norm(seed)
    rho = 0.0
    for it in range(1, max_iter + 1):
        w = matvec(v)
        new_rho = float(np.real(np.vdot(v, w)))
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0, v, it
        v = w / norm_w
        if it > 1 and abs(new_rho - rho) <= tol * max(new_rho, np.finfo(float).tiny):
            return new_rho, v, it
        rho = new_rho
    raise NonConvergenceError(float(np.sqrt(max(rho, 0.0))), max_iter, component)


def _gram_matvec(block):
    bh = block.conj().T.tocsr()
    return lambda v: bh @ (block @ v)


def operator_norm(a: PropagationOperator, tol: float = 1e-13) -> np.ndarray:
    """Spectral norm of every block, by power iteration on ``a* a``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    out = np.zeros(a.space.n_components)
    for m, block in enumerate(a.blocks):
        if block.nnz == 0:
            continue
        lam, _, _ = power_iteration(_gram_matvec(block), block.shape[0], tol=tol, component=m)
        out[m] = np.sqrt(max(lam, 0.0))
    return out


def compressed_norm(a: PropagationOperator, Y: Iterable[int], component: int = 0, tol: float = 1e-13) -> float:
    """``||a P_Y||`` for a set of columns ``Y`` of one component."""
    idx = np.unique(np.fromiter((int(y) for y in Y), dtype=np.int64))
    if idx.size == 0:
        return 0.0
    cols = a.blocks[component][:, idx]
    if cols.nnz == 0:
        return 0.0
    if idx.size <= DENSE_COLUMN_LIMIT:
        return float(np.linalg.norm(cols.toarray(), 2))
    lam, _, _ = power_iteration(_gram_matvec(cols.tocsr()), idx.size, tol=tol, component=component)
    return float(np.sqrt(max(lam, 0.0)))
