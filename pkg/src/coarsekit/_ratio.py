"""Minimum of ``w(C[Y]) / w(Y)`` over nonempty subsets ``Y`` of bounded balls.

Both the weighted weak expander ratio and the witness inequality reduce to
this problem: the bounded sets are exactly the subsets of the balls
``F[x]``, and ``C`` is a covering relation containing the diagonal.

Three solvers:

``exact``
    bitmask enumeration of all subsets of each ball (ball size capped).
``heuristic``
    greedy growth from every singleton; an upper bound on the minimum,
    attained by an actual subset.
``flow``
    Dinkelbach iteration on ``w(C[Y]) - t w(Y)``; each step is a
    closure problem solved by a minimum cut.  Exact (in rational arithmetic
    when the weights have a small common denominator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .boxspace import Relation
from .errors import CapExceededError

MODES = ("exact", "heuristic", "flow")
DEFAULT_CAP = 22
TIE_RTOL = 1e-12
# heuristic mode grows greedily from every singleton only in balls this small
HEURISTIC_GROWTH_LIMIT = 64
_INT32_MAX = 2**31 - 1
_CHUNK = 1 << 20


@dataclass(frozen=True)
class RatioResult:
    ratio: float
    subset: tuple
    center: int
    exact: bool
    mode: str

    def key(self):
        return (self.ratio, len(self.subset), self.subset)


def _better(a: RatioResult | None, b: RatioResult) -> bool:
    """Is ``b`` preferred over ``a``: smaller ratio, then smaller set, then canonical order."""
    if a is None:
        return True
    if b.ratio < a.ratio * (1 - TIE_RTOL):
        return True
    if a.ratio < b.ratio * (1 - TIE_RTOL):
        return False
    return (len(b.subset), b.subset) < (len(a.subset), a.subset)


def balls_of(bound: Relation, component: int, allowed: np.ndarray | None = None) -> list:
    """Distinct balls ``F[x] = {z : (z, x) in F}`` as ``(center, sorted indices)``.

    Balls are intersected with ``allowed`` (a boolean mask) and empty or
    repeated balls are dropped, keeping the first center.
    """
    csc = bound.matrix(component).tocsc()
    csc.sort_indices()
    seen = set()
    out = []
    for x in range(bound.space.sizes[component]):
        idx = csc.indices[csc.indptr[x] : csc.indptr[x + 1]].astype(np.int64)
        if allowed is not None:
            idx = idx[allowed[idx]]
        if idx.size == 0:
            continue
        key = idx.tobytes()
        if key in seen:
            continue
        seen.add(key)
        out.append((x, idx))
    return out


class _Cover:
    """Column access to the covering relation: ``C[y] = {x : (x, y) in C}``."""

    def __init__(self, cover: Relation, component: int):
        csc = cover.matrix(component).tocsc()
        csc.sort_indices()
        self.indptr = csc.indptr
        self.indices = csc.indices.astype(np.int64)

    def of(self, y: int) -> np.ndarray:
        return self.indices[self.indptr[y] : self.indptr[y + 1]]

    def local(self, ball: np.ndarray):
        """Cover universe ``C[ball]`` and ``(ball_pos, universe_pos)`` incidence pairs."""
        parts = [self.of(int(y)) for y in ball]
        universe = np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)
        rows, cols = [], []
        for i, p in enumerate(parts):
            rows.append(np.full(p.size, i))
            cols.append(np.searchsorted(universe, p))
        return universe, np.concatenate(rows), np.concatenate(cols)


def _exact_ball(ball, cover: _Cover, w, center) -> RatioResult:
    b = ball.size
    universe, inc_b, inc_u = cover.local(ball)
    pre = np.zeros(universe.size, dtype=np.int64)
    np.bitwise_or.at(pre, inc_u, np.left_shift(np.int64(1), inc_b.astype(np.int64)))
    wb = w[ball]
    wu = w[universe]
    best_ratio = math.inf
    cands = []
    total = 1 << b
    for start in range(1, total, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        wy = np.zeros(masks.size)
        for i in range(b):
            wy += wb[i] * ((masks >> i) & 1)
        wt = np.zeros(masks.size)
        for z in range(universe.size):
            wt += wu[z] * ((masks & pre[z]) != 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(wy > 0, wt / wy, np.inf)
        lo = ratio.min()
        if lo < best_ratio * (1 + TIE_RTOL):
            if lo < best_ratio * (1 - TIE_RTOL):
                cands = [c for c in cands if c[0] <= lo * (1 + TIE_RTOL)]
            best_ratio = min(best_ratio, lo)
            sel = np.nonzero(ratio <= best_ratio * (1 + TIE_RTOL))[0]
            cands.extend(zip(ratio[sel].tolist(), masks[sel].tolist()))
    cands = [c for c in cands if c[0] <= best_ratio * (1 + TIE_RTOL)]
    sizes = [bin(mk).count("1") for _, mk in cands]
    smallest = min(sizes)
    options = []
    for (r, mk), s in zip(cands, sizes):
        if s == smallest:
            subset = tuple(int(ball[i]) for i in range(b) if mk >> i & 1)
            options.append((subset, r))
    subset, r = min(options)
    return RatioResult(float(r), subset, int(center), True, "exact")


def _heuristic_ball(ball, cover: _Cover, w, center) -> RatioResult:
    b = ball.size
    universe, inc_b, inc_u = cover.local(ball)
    cov = np.zeros((b, universe.size), dtype=bool)
    cov[inc_b, inc_u] = True
    wb = w[ball]
    wu = w[universe]
    best = None
    # the whole ball is F-bounded too; it is the only candidate for large balls
    pos = wb > 0
    whole = RatioResult(
        float(wu[cov[pos].any(axis=0)].sum() / wb[pos].sum()),
        tuple(int(v) for v in ball[pos]), int(center), False, "heuristic",
    )
    seeds = range(b) if b <= HEURISTIC_GROWTH_LIMIT else ()
    for i in seeds:
        if wb[i] <= 0:
            continue
        in_y = np.zeros(b, dtype=bool)
        in_y[i] = True
        covered = cov[i].copy()
        wy = wb[i]
        wt = float(wu[covered].sum())
        ratio = wt / wy
        while True:
            gain = cov[:, ~covered].astype(float) @ wu[~covered]
            with np.errstate(divide="ignore", invalid="ignore"):
                trial = (wt + gain) / (wy + wb)
            trial[in_y | (wb <= 0)] = np.inf
            j = int(np.argmin(trial))
            if not trial[j] < ratio * (1 - TIE_RTOL):
                break
            in_y[j] = True
            covered |= cov[j]
            wy += wb[j]
            wt += gain[j]
            ratio = wt / wy
        subset = tuple(int(v) for v in ball[in_y])
        # recompute from scratch so accumulated rounding never leaks into reports
        exact_ratio = float(wu[cov[in_y].any(axis=0)].sum() / wb[in_y].sum())
        cand = RatioResult(exact_ratio, subset, int(center), False, "heuristic")
        if _better(best, cand):
            best = cand
    return whole if _better(best, whole) else best


def rational_weights(w: np.ndarray, max_denominator: int = 10**6):
    """Integer weights ``W`` and scale ``K`` with ``w == W / K`` exactly, or ``None``."""
    fracs = []
    for v in w.tolist():
        f = Fraction(v).limit_denominator(max_denominator)
        if float(f) != v:
            return None
        fracs.append(f)
    K = 1
    for f in fracs:
        K = K * f.denominator // math.gcd(K, f.denominator)
        if K > max_denominator:
            return None
    return np.array([int(f * K) for f in fracs], dtype=object), K


class _FlowBall:
    """Closure network for one ball: source -> Y candidates -> cover -> sink."""

    def __init__(self, ball, cover: _Cover):
        self.ball = ball
        self.universe, inc_b, inc_u = cover.local(ball)
        b, u = ball.size, self.universe.size
        self.b, self.u = b, u
        self.src, self.snk = 0, b + u + 1
        self.rows = np.concatenate([np.zeros(b, dtype=np.int64), 1 + inc_b, 1 + b + np.arange(u)])
        self.cols = np.concatenate([1 + np.arange(b), 1 + b + inc_u, np.full(u, self.snk)])
        self.n_src, self.n_mid = b, inc_b.size
        self.cover_rows = inc_b
        self.cover_cols = inc_u

    def covered(self, sel: np.ndarray) -> np.ndarray:
        mask = np.zeros(self.u, dtype=bool)
        mask[self.cover_cols[sel[self.cover_rows]]] = True
        return mask

    def _min_cut_scipy(self, src_caps, snk_caps, inf_cap) -> np.ndarray:
        caps = np.concatenate([src_caps, np.full(self.n_mid, inf_cap), snk_caps]).astype(np.int32)
        n = self.b + self.u + 2
        C = sp.csr_matrix((caps, (self.rows, self.cols)), shape=(n, n))
        res = maximum_flow(C, self.src, self.snk)
        R = (C - res.flow).tocsr()
        R.data[R.data <= 0] = 0
        R.eliminate_zeros()
        reach = breadth_first_order(R, self.src, directed=True, return_predecessors=False)
        side = np.zeros(n, dtype=bool)
        side[reach] = True
        return side[1 : 1 + self.b]

    def _min_cut_nx(self, src_caps, snk_caps) -> np.ndarray:
        G = nx.DiGraph()
        for i, c in enumerate(src_caps):
            G.add_edge(self.src, 1 + i, capacity=c)
        for i, j in zip(self.cover_rows.tolist(), self.cover_cols.tolist()):
            G.add_edge(1 + i, 1 + self.b + j)  # no capacity attribute: infinite
        for j, c in enumerate(snk_caps):
            G.add_edge(1 + self.b + j, self.snk, capacity=c)
        _, (reachable, _) = nx.minimum_cut(G, self.src, self.snk)
        return np.array([(1 + i) in reachable for i in range(self.b)], dtype=bool)

    def solve_rational(self, W, start: np.ndarray) -> tuple:
        Wb = [W[int(v)] for v in self.ball]
        Wu = [W[int(v)] for v in self.universe]
        sel = start
        P = sum(Wu[j] for j in np.nonzero(self.covered(sel))[0])
        Q = sum(Wb[i] for i in np.nonzero(sel)[0])
        while True:
            g = math.gcd(P, Q)
            P, Q = P // g, Q // g
            src_caps = [P * x for x in Wb]
            snk_caps = [Q * x for x in Wu]
            inf_cap = sum(snk_caps) + 1
            if max(src_caps + [inf_cap]) <= _INT32_MAX:
                new = self._min_cut_scipy(np.array(src_caps, dtype=np.int64), np.array(snk_caps, dtype=np.int64), inf_cap)
            else:
                new = self._min_cut_nx(src_caps, snk_caps)
            if not new.any():
                break
            cov = self.covered(new)
            nP = sum(Wu[j] for j in np.nonzero(cov)[0])
            nQ = sum(Wb[i] for i in np.nonzero(new)[0])
            if nP * Q >= P * nQ:
                break
            sel, P, Q = new, nP, nQ
        return sel, Fraction(P, Q)

    def solve_float(self, w, start: np.ndarray) -> tuple:
        wb, wu = w[self.ball], w[self.universe]
        sel = start
        t = wu[self.covered(sel)].sum() / wb[sel].sum()
        while True:
            new = self._min_cut_nx((t * wb).tolist(), wu.tolist())
            if not new.any():
                break
            nt = wu[self.covered(new)].sum() / wb[new].sum()
            if not nt < t * (1 - TIE_RTOL):
                break
            sel, t = new, nt
        return sel, float(t)


def _flow_ball(ball, cover: _Cover, w, center, rational) -> RatioResult:
    fb = _FlowBall(ball, cover)
    wb = w[ball]
    # best singleton as the Dinkelbach starting point
    single = np.array([w[cover.of(int(y))].sum() / wb[i] if wb[i] > 0 else np.inf for i, y in enumerate(ball)])
    start = np.zeros(ball.size, dtype=bool)
    start[int(np.argmin(single))] = True
    if rational is not None:
        sel, t = fb.solve_rational(rational[0], start)
        ratio = float(t)
    else:
        sel, ratio = fb.solve_float(w, start)
    subset = tuple(int(v) for v in ball[sel])
    return RatioResult(ratio, subset, int(center), True, "flow")


def min_ratio(
    weights: np.ndarray,
    cover: Relation,
    bound: Relation,
    component: int,
    mode: str = "exact",
    cap: int = DEFAULT_CAP,
) -> RatioResult:
    """Minimise ``w(cover[Y]) / w(Y)`` over nonempty ``bound``-bounded ``Y`` with ``w(Y) > 0``.

    Points of zero weight are excluded from ``Y`` (they would leave the
    ratio undefined) but still count in ``cover[Y]`` with weight zero.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    w = np.asarray(weights, dtype=np.float64)
    allowed = w > 0
    balls = balls_of(bound, component, allowed)
    if not balls:
        raise ValueError(f"component {component}: no bounded set of positive weight")
    cov = _Cover(cover, component)
    if mode == "exact":
        for center, ball in balls:
            if ball.size > cap:
                raise CapExceededError(component, center, ball.size, cap)
    rational = rational_weights(w)
    best = None
    for center, ball in balls:
        if mode == "exact":
            res = _exact_ball(ball, cov, w, center)
        elif mode == "heuristic":
            res = _heuristic_ball(ball, cov, w, center)
        else:
            res = _flow_ball(ball, cov, w, center, rational)
        if _better(best, res):
            best = res
    return replace(best, ratio=subset_ratio(w, cov, best.subset, rational))


def subset_ratio(w: np.ndarray, cov: _Cover, subset, rational=None) -> float:
    """``w(C[Y]) / w(Y)`` for one subset, in rational arithmetic when possible."""
    idx = np.asarray(subset, dtype=np.int64)
    covered = np.unique(np.concatenate([cov.of(int(y)) for y in idx]))
    if rational is not None:
        W = rational[0]
        return float(Fraction(int(sum(W[covered])), int(sum(W[idx]))))
    return float(w[covered].sum() / w[idx].sum())
