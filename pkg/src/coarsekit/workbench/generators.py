"""Deterministic instance families.

Every generator returns pairs ``(x, y)`` of the edge relation together with
the diagonal.  Torus and Margulis points are indexed ``x * side + y``.
"""

from __future__ import annotations

import networkx as nx
import numpy as np

__all__ = [
    "cycle_pairs",
    "torus_pairs",
    "random_regular_pairs",
    "margulis_pairs",
    "named_pairs",
    "named_size",
    "gen_cycles",
    "gen_torus",
    "gen_random_regular",
    "gen_margulis",
]


def _with_diagonal(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    diag = np.arange(n, dtype=np.int64)
    pairs = np.stack([np.concatenate([diag, dst]), np.concatenate([diag, src])], axis=1)
    return np.unique(pairs, axis=0)


def _check_size(n: int, minimum: int = 3) -> None:
    if n < minimum:
        raise ValueError(f"size must be at least {minimum}, got {n}")


def cycle_pairs(n: int) -> np.ndarray:
    _check_size(n)
    x = np.arange(n, dtype=np.int64)
    src = np.concatenate([x, x])
    dst = np.concatenate([(x + 1) % n, (x - 1) % n])
    return _with_diagonal(n, src, dst)


def torus_pairs(side: int) -> np.ndarray:
    _check_size(side)
    x, y = np.divmod(np.arange(side * side, dtype=np.int64), side)
    src, dst = [], []
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        src.append(x * side + y)
        dst.append(((x + dx) % side) * side + (y + dy) % side)
    return _with_diagonal(side * side, np.concatenate(src), np.concatenate(dst))


def margulis_pairs(side: int) -> np.ndarray:
    """Gabber-Galil style graph on ``Z_s^2``: the four affine maps
    ``(x + 2y, y)``, ``(x + 2y + 1, y)``, ``(x, y + 2x)``, ``(x, y + 2x + 1)``
    and their inverses."""
    _check_size(side)
    s = side
    x, y = np.divmod(np.arange(s * s, dtype=np.int64), s)
    images = [
        ((x + 2 * y) % s, y),
        ((x - 2 * y) % s, y),
        ((x + 2 * y + 1) % s, y),
        ((x - 2 * y - 1) % s, y),
        (x, (y + 2 * x) % s),
        (x, (y - 2 * x) % s),
        (x, (y + 2 * x + 1) % s),
        (x, (y - 2 * x - 1) % s),
    ]
    src = np.concatenate([x * s + y] * len(images))
    dst = np.concatenate([a * s + b for a, b in images])
    return _with_diagonal(s * s, src, dst)


def random_regular_pairs(degree: int, n: int, seed: int) -> np.ndarray:
    _check_size(n)
    if (degree * n) % 2 or not 0 <= degree < n:
        raise ValueError(f"no {degree}-regular graph on {n} points")
    g = nx.random_regular_graph(degree, n, seed=seed)
    edges = np.array(sorted(g.edges()), dtype=np.int64).reshape(-1, 2)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    return _with_diagonal(n, src, dst)


_NAMED = {
    "cycle": (cycle_pairs, lambda n: n),
    "torus": (torus_pairs, lambda s: s * s),
    "margulis": (margulis_pairs, lambda s: s * s),
    "random_regular": (random_regular_pairs, lambda d, n, seed: n),
}


def _lookup(name: str):
    try:
        return _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}") from None


def named_pairs(name: str, *args: int) -> np.ndarray:
    return _lookup(name)[0](*args)


def named_size(name: str, *args: int) -> int:
    return _lookup(name)[1](*args)


def _family(generator_lines: list, header: list):
    from .spacefile import ComponentSpec, SpaceFile

    comps = []
    for g in generator_lines:
        named_pairs(*g)  # validates feasibility up front
        comps.append(ComponentSpec(named_size(*g), None, tuple(g)))
    return SpaceFile(tuple(comps), tuple(header))


def gen_cycles(sizes):
    return _family([("cycle", int(n)) for n in sizes], [f"cycles {' '.join(map(str, sizes))}"])


def gen_torus(sides):
    return _family([("torus", int(s)) for s in sides], [f"torus {' '.join(map(str, sides))}"])


def gen_margulis(sides):
    return _family([("margulis", int(s)) for s in sides], [f"margulis {' '.join(map(str, sides))}"])


def gen_random_regular(degree: int, sizes, seed: int):
    """One random ``degree``-regular graph per size; component ``m`` uses seed ``seed + m``."""
    if seed is None:
        raise ValueError("a fixed seed is required")
    lines = [("random_regular", int(degree), int(n), int(seed) + m) for m, n in enumerate(sizes)]
    return _family(lines, [f"random_regular degree={degree} seed={seed} {' '.join(map(str, sizes))}"])
