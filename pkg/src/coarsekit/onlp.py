"""Operator norm localization and witness weights.

``localization_ratio`` measures how much of ``||a||`` an operator keeps on
vectors supported in a single ``F``-ball.  Because ``||a P_Y||`` only grows
with ``Y``, the supremum over all ``F``-bounded sets is attained on the
maximal balls ``F[x]``, so one compressed norm per point suffices.

When the ratio drops below a constant ``c`` (default 1/3), the squared top
eigenvector of ``b = P a* a P`` is a probability measure under which every
``F``-bounded set expands by a factor of at least ``1/c`` through
``S = T^-1 o T`` (``T`` the propagation of ``a``).  ``extract_weights`` and
``verify_witness_inequality`` carry out and check that construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _ratio
from .boxspace import Point, Relation, WeightedComponent, compose, inverse
from .errors import SpaceMismatchError, ZeroOperatorError
from .roeop import PropagationOperator, compressed_norm, operator_norm, power_iteration

__all__ = [
    "DEFAULT_CONSTANT",
    "LocalizationReport",
    "WitnessWeights",
    "WitnessReport",
    "localization_ratio",
    "extract_weights",
    "select_window",
    "verify_witness_inequality",
    "witness_pipeline",
]

DEFAULT_CONSTANT = 1.0 / 3.0
# Dense eigensolver is used for extract_weights up to this many points.
DENSE_EIGEN_LIMIT = 2048
_DROP = 1e-14


@dataclass(frozen=True)
class LocalizationReport:
    operator_norm: float
    best_ratio: float
    best_ball_center: Point
    per_center_ratios: list = field(repr=False)
    component: int | None = None

    def satisfies(self, c: float) -> bool:
        """The best ball keeps at least a fraction ``c`` of the norm."""
        return self.best_ratio >= c


def localization_ratio(
    a: PropagationOperator, F: Relation, tol: float = 1e-13, component: int | None = None
) -> LocalizationReport:
    """Best ``||a P_{F[x]}|| / ||a||`` over the points ``x``.

    With ``component`` given, only that component is scanned and the ratio
    is normalised by that block's norm; otherwise ``||a||`` is the maximum
    over all blocks and every point is scanned.
    """
    if F.space.sizes != a.space.sizes:
        raise SpaceMismatchError("F and a live on different spaces")
    norms = operator_norm(a, tol)
    comps = range(a.space.n_components) if component is None else [component]
    total = norms.max() if component is None else norms[component]
    if total == 0:
        raise ZeroOperatorError("localization ratio of a zero operator is undefined")
    ratios = []
    best, best_pt = -1.0, None
    for m in comps:
        csc = F.matrix(m).tocsc()
        for x in range(a.space.sizes[m]):
            ball = csc.indices[csc.indptr[x] : csc.indptr[x + 1]]
            r = compressed_norm(a, ball, m, tol) / total
            ratios.append(r)
            if r > best:
                best, best_pt = r, Point(m, x)
    return LocalizationReport(float(total), float(best), best_pt, ratios, component)


@dataclass(frozen=True)
class WitnessWeights:
    """Probability weights ``|xi|^2`` from the top eigenvector of ``b``.

    ``values`` has one entry per point of the component, zero off ``support``.
    """

    component: int
    values: np.ndarray
    source_eigenvalue: float
    support: frozenset
    eigenvector: np.ndarray = field(repr=False, default=None)

    @property
    def weights(self) -> WeightedComponent:
        """The weights as a strictly positive measure on the support (sorted order)."""
        idx = sorted(self.support)
        return WeightedComponent(self.component, self.values[idx] / self.values[idx].sum())


def _top_eigvec_dense(b: np.ndarray, rtol: float = 1e-10):
    vals, vecs = np.linalg.eigh(b)
    lam = vals[-1]
    if lam <= 0:
        return 0.0, None
    top = vecs[:, vals >= lam - rtol * lam]
    n = b.shape[0]
    # projection of a fixed seed onto the top eigenspace: the limit of power
    # iteration from that seed, so degenerate eigenspaces resolve reproducibly
    for seed in (np.ones(n), np.ones(n) + 1e-3 * np.cos(np.arange(n) * 1.2345 + 0.5)):
        xi = top @ (top.conj().T @ seed)
        if np.linalg.norm(xi) > 1e-8 * np.linalg.norm(seed):
            return float(lam), xi / np.linalg.norm(xi)
    return float(lam), top[:, -1]


def extract_weights(
    a: PropagationOperator,
    component: int,
    forbidden: Iterable[int] = (),
    tol: float = 1e-13,
    window: Iterable[int] | None = None,
) -> WitnessWeights:
    """Weights ``|xi|^2`` for the top eigenvector ``xi`` of ``b = P a* a P``.

    ``P`` projects onto the points of the component not in ``forbidden``
    (intersected with ``window`` when given).  Entries of ``|xi|^2`` below
    ``1e-14`` are dropped and the rest renormalised.
    """
    n = a.space.sizes[component]
    keep = np.ones(n, dtype=bool)
    forb = np.fromiter((int(v) for v in forbidden), dtype=np.int64)
    keep[forb] = False
    if window is not None:
        win = np.zeros(n, dtype=bool)
        win[np.fromiter((int(v) for v in window), dtype=np.int64)] = True
        keep &= win
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        raise ValueError(f"component {component} has no points left after removing the forbidden set")
    cols = a.blocks[component][:, idx]
    if cols.nnz == 0:
        raise ZeroOperatorError(f"operator vanishes on the allowed columns of component {component}")
    if idx.size <= DENSE_EIGEN_LIMIT:
        c = cols.toarray()
        lam, xi_local = _top_eigvec_dense(c.conj().T @ c)
    else:
        ch = cols.conj().T.tocsr()
        lam, xi_local, _ = power_iteration(lambda v: ch @ (cols @ v), idx.size, tol=tol, component=component)
    if xi_local is None:
        raise ZeroOperatorError(f"b vanishes on component {component}")
    xi = np.zeros(n, dtype=xi_local.dtype)
    xi[idx] = xi_local
    wts = np.abs(xi) ** 2
    wts[wts < _DROP] = 0.0
    wts /= wts.sum()
    support = frozenset(np.nonzero(wts)[0].tolist())
    return WitnessWeights(component, wts, float(lam), support, xi)


def select_window(
    a: PropagationOperator, component: int, forbidden: Iterable[int] = (), fraction: float = 0.75, tol: float = 1e-13
) -> tuple:
    """Smallest canonical-order prefix ``X`` of the allowed columns with
    ``||a' P_X||^2 > fraction * ||a'||^2`` where ``a' = a (1 - P_forbidden)``.
    """
    n = a.space.sizes[component]
    forb = set(int(v) for v in forbidden)
    allowed = [x for x in range(n) if x not in forb]
    full = compressed_norm(a, allowed, component, tol) ** 2
    if full == 0:
        raise ZeroOperatorError(f"operator vanishes on the allowed columns of component {component}")
    lo, hi = 1, len(allowed)
    # ||a P_X|| is monotone in X, so a binary search over prefix length finds the smallest one
    while lo < hi:
        mid = (lo + hi) // 2
        if compressed_norm(a, allowed[:mid], component, tol) ** 2 > fraction * full:
            hi = mid
        else:
            lo = mid + 1
    return tuple(allowed[:lo])


@dataclass(frozen=True)
class WitnessReport:
    min_ratio: float
    argmin: tuple
    center: int
    threshold: float
    holds: bool
    exact: bool
    mode: str


def verify_witness_inequality(
    wit: WitnessWeights,
    a: PropagationOperator | None,
    F: Relation,
    T: Relation | None = None,
    constant: float = DEFAULT_CONSTANT,
    mode: str = "exact",
    cap: int = _ratio.DEFAULT_CAP,
    tol: float = 1e-9,
) -> WitnessReport:
    """Check ``w(S[Y]) >= w(Y) / constant`` for all ``F``-bounded ``Y`` in the support.

    ``S = T^-1 o T`` with ``T`` the propagation of ``a`` unless given
    explicitly.  ``holds`` compares the minimum with ``1/constant`` up to a
    relative ``tol``.
    """
    if T is None:
        if a is None:
            raise ValueError("either an operator or an explicit T is required")
        T = a.propagation
    S = compose(inverse(T), T)
    res = _ratio.min_ratio(wit.values, S, F, wit.component, mode=mode, cap=cap)
    threshold = 1.0 / constant
    holds = res.ratio >= threshold * (1 - tol)
    return WitnessReport(res.ratio, res.subset, res.center, threshold, bool(holds), res.exact, res.mode)


@dataclass(frozen=True)
class PipelineResult:
    component: int
    localization: LocalizationReport
    weights: WitnessWeights | None
    witness: WitnessReport | None

    @property
    def triggered(self) -> bool:
        return self.weights is not None


def witness_pipeline(
    a: PropagationOperator,
    F: Relation,
    component: int,
    forbidden: Iterable[int] = (),
    constant: float = DEFAULT_CONSTANT,
    mode: str = "exact",
    cap: int = _ratio.DEFAULT_CAP,
    tol: float = 1e-13,
) -> PipelineResult:
    """Localization ratio of ``a - a P_forbidden``; if it is below ``constant``,
    extract weights and verify the expansion inequality."""
    forbidden = tuple(forbidden)
    n = a.space.sizes[component]
    allowed = [x for x in range(n) if x not in set(forbidden)]
    restricted = a.restrict_columns(component, allowed) if forbidden else a
    loc = localization_ratio(restricted, F, tol, component=component)
    if not loc.best_ratio < constant:
        return PipelineResult(component, loc, None, None)
    wit = extract_weights(a, component, forbidden, tol)
    rep = verify_witness_inequality(wit, a, F, constant=constant, mode=mode, cap=cap)
    return PipelineResult(component, loc, wit, rep)
