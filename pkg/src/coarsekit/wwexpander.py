"""Boundary ratios of weighted weak expander sequences on finite truncations.

For weights ``w`` on a component, a relation ``T`` containing the diagonal
and a bounding relation ``F``, the quantity of interest is

    min { w(T[Y]) / w(Y) : Y nonempty and F-bounded }.

A weighted weak expander sequence keeps this above ``1 + c`` in the limit
for every ``F``.  A finite scan can only look at finitely many components
and finitely many ``F``; ``ww_scan`` replaces the ``liminf`` with the
minimum over the trailing half of the components and reports that as
truncation evidence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from . import _ratio
from .boxspace import BoxSpace, Relation, WeightedComponent, diagonal, widen

__all__ = ["BoundaryResult", "ExpansionReport", "min_boundary_ratio", "ww_scan", "ww_verdict", "tail_window"]


@dataclass(frozen=True)
class BoundaryResult:
    min_ratio: float
    argmin: tuple
    center: int
    exact: bool
    mode: str
    diagonal_added: bool = False

    def __iter__(self):
        # unpacks as (min_ratio, argmin_Y)
        return iter((self.min_ratio, self.argmin))


def min_boundary_ratio(
    w: WeightedComponent,
    T: Relation,
    F: Relation,
    mode: str = "exact",
    cap: int = _ratio.DEFAULT_CAP,
) -> BoundaryResult:
    """Minimum of ``w(T[Y]) / w(Y)`` over nonempty ``F``-bounded ``Y``.

    ``T`` is enlarged by the diagonal when it does not contain it, and the
    result says so.  Ties go to the smaller set, then to the
    lexicographically smaller sorted index tuple (``exact`` and
    ``heuristic`` modes; ``flow`` returns a minimiser without that
    ordering).
    """
    diag = diagonal(T.space)
    added = not diag <= T
    if added:
        T = T | diag
    res = _ratio.min_ratio(w.weights, T, F, w.component, mode=mode, cap=cap)
    return BoundaryResult(res.ratio, res.subset, res.center, res.exact, res.mode, added)


def tail_window(n_components: int) -> range:
    """Trailing ``ceil(n / 2)`` component indices."""
    k = math.ceil(n_components / 2)
    return range(n_components - k, n_components)


@dataclass(frozen=True)
class ExpansionReport:
    T: Relation = field(repr=False)
    F: Relation = field(repr=False)
    c: float
    per_component: list
    tail_min: float
    exact: bool
    mode: str

    @property
    def consistent(self) -> bool:
        return self.tail_min > 1 + self.c


def ww_scan(
    space: BoxSpace,
    weights: Sequence[WeightedComponent],
    T: Relation,
    F_sequence: Sequence[Relation] | None = None,
    c: float = 0.1,
    mode: str = "exact",
    cap: int = _ratio.DEFAULT_CAP,
    jobs: int = 1,
) -> list:
    """One :class:`ExpansionReport` per ``F`` in ``F_sequence``.

    ``F_sequence`` must be increasing; it defaults to ``widen(T, 1..3)``.  ``per_component`` entries are
    ``(component, min_ratio, argmin_Y)``; ``tail_min`` is the minimum over
    :func:`tail_window`.
    """
    if F_sequence is None:
        F_sequence = [widen(T, s) for s in (1, 2, 3)]
    if len(weights) != space.n_components:
        raise ValueError("one WeightedComponent per component is required")
    for prev, nxt in zip(F_sequence, F_sequence[1:]):
        if not prev <= nxt:
            raise ValueError("F_sequence must be increasing")
    window = tail_window(space.n_components)
    reports = []
    for F in F_sequence:
        def job(m, F=F):
            return min_boundary_ratio(weights[m], T, F, mode=mode, cap=cap)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(job, range(space.n_components)))
        else:
            results = [job(m) for m in range(space.n_components)]
        per = [(m, r.min_ratio, r.argmin) for m, r in enumerate(results)]
        tail = min(results[m].min_ratio for m in window)
        reports.append(
            ExpansionReport(T, F, c, per, tail, all(r.exact for r in results), mode)
        )
    return reports


def ww_verdict(reports: Sequence[ExpansionReport]) -> str:
    """``evidence-only`` when every ``F`` keeps ``tail_min > 1 + c``, else ``refuted``.

    A truncation can never certify the ``liminf``; a failing ``F`` is
    witnessed by an actual subset, so refutation at that truncation is exact.
    """
    return "evidence-only" if all(r.consistent for r in reports) else "refuted"
