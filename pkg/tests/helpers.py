"""Brute-force oracles and hypothesis strategies shared by the tests.

Everything here works on plain Python sets so it shares no code path with
the sparse implementation.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from coarsekit.boxspace import BoxSpace, Relation


def to_sets(R: Relation) -> list:
    return [set(map(tuple, R.pairs(m).tolist())) for m in range(R.space.n_components)]


def compose_sets(A: set, B: set) -> set:
    return {(x, y) for (x, z) in A for (z2, y) in B if z == z2}


def inverse_sets(A: set) -> set:
    return {(y, x) for (x, y) in A}


def ball_sets(A: set, Y) -> set:
    Y = set(Y)
    return {x for (x, y) in A if y in Y}


def widen_sets(A: set, n: int, size: int) -> set:
    step = {(x, x) for x in range(size)} | A | inverse_sets(A)
    out = step
    for _ in range(n - 1):
        out = compose_sets(out, step)
    return out


def is_bounded_sets(F: set, Y) -> bool:
    Y = set(Y)
    if not Y:
        return True
    nodes = {x for p in F for x in p} | Y
    return any(Y <= {z for (z, c) in F if c == x} for x in nodes)


def bounded_subsets(F: set, size: int):
    """Every nonempty ``F``-bounded subset, via the maximal balls."""
    seen = set()
    for x in range(size):
        b = sorted(z for (z, c) in F if c == x)
        for r in range(1, len(b) + 1):
            for Y in itertools.combinations(b, r):
                if Y not in seen:
                    seen.add(Y)
                    yield Y


def brute_min_ratio(w, C: set, F: set, size: int):
    """``min w(C[Y]) / w(Y)`` over nonempty ``F``-bounded ``Y``, as an exact Fraction."""
    wf = [Fraction(float(v)) for v in w]
    best = None
    for Y in bounded_subsets(F, size):
        den = sum(wf[y] for y in Y)
        if den == 0:
            continue
        r = sum(wf[x] for x in ball_sets(C, Y)) / den
        if best is None or r < best:
            best = r
    return best


def cycle_distance(x: int, y: int, n: int) -> int:
    d = abs(x - y) % n
    return min(d, n - d)


def cycle_band(n: int, s: int) -> set:
    return {(x, y) for x in range(n) for y in range(n) if cycle_distance(x, y, n) <= s}


def cycle_space(n: int, s: int = 1):
    space = BoxSpace((n,))
    return space, Relation(space, [sorted(cycle_band(n, s))])


@st.composite
def spaces(draw, max_components=3, max_size=12, min_size=1):
    k = draw(st.integers(1, max_components))
    sizes = draw(st.lists(st.integers(min_size, max_size), min_size=k, max_size=k))
    return BoxSpace(tuple(sizes))


@st.composite
def relations(draw, space=None, density=None, with_diagonal=False):
    if space is None:
        space = draw(spaces())
    if density is None:
        density = draw(st.sampled_from([0.0, 0.1, 0.25, 0.5]))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    per = []
    for n in space.sizes:
        mask = rng.random((n, n)) < density
        if with_diagonal:
            np.fill_diagonal(mask, True)
        per.append(np.argwhere(mask))
    return Relation(space, per)


@st.composite
def space_and_relations(draw, count=3, **kwargs):
    space = draw(spaces(**kwargs))
    return space, [draw(relations(space)) for _ in range(count)]


@st.composite
def bounded_degree_relations(draw, max_degree=6, max_size=16):
    """Relation with the diagonal and at most ``max_degree`` other in- and out-pairs per point."""
    space = draw(spaces(max_components=2, max_size=max_size))
    seed = draw(st.integers(0, 2**32 - 1))
    d = draw(st.integers(0, max_degree))
    rng = np.random.default_rng(seed)
    per = []
    for n in space.sizes:
        pairs = {(x, x) for x in range(n)}
        out_deg = [0] * n
        in_deg = [0] * n
        for _ in range(n * d):
            x, y = (int(v) for v in rng.integers(0, n, 2))
            if x == y or (x, y) in pairs or out_deg[x] >= d or in_deg[y] >= d:
                continue
            pairs.add((x, y))
            out_deg[x] += 1
            in_deg[y] += 1
        per.append(sorted(pairs))
    return Relation(space, per)
