"""Pair functions, the measures ``w o c_s`` / ``w o c^t``, translations by
label classes and Følner certificates extracted from level sets.

A pair function ``eta`` lives on ``X^(2)``, the within-component pairs.
The two measures weight a pair by one of its endpoints::

    w o c_s (eta) = sum eta(x, y) w(y)        (source / domain point)
    w o c^t (eta) = sum eta(x, y) w(x)        (target / image point)

For a partial bijection ``phi`` the translation moves rows::

    [lambda eta](phi(z), y) = eta(z, y)

and the modified translation also multiplies by ``w(x) / w(phi^-1(x))``.

The Følner machinery scans level sets ``F(r) = {eta >= r}`` over the
finitely many values of ``eta``.  Since ``phi o F(r) = {lambda eta >= r}``,
the integral over ``r`` of ``w o c^t((phi o F(r)) \\ F(r))`` is a finite sum
that equals ``w o c^t((lambda eta - eta)_+)`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .boxspace import BoxSpace, Relation, WeightedComponent, compose, diagonal, distance_layers
from .errors import PartialBijectionError, SpaceMismatchError
from .label import Label, build_label, is_partial_bijection, signed_classes

_TIE_MARGIN = 1e-12

__all__ = [
    "PairFunction",
    "FolnerCertificate",
    "FolnerFailure",
    "measure_cs",
    "measure_ct",
    "translate",
    "modified_translate",
    "invariance_defect",
    "level_set_boundary_integral",
    "extract_folner",
    "verify_certificate",
    "tent_kernel",
    "heat_kernel",
    "folner_search",
]


class PairFunction:
    """Real function on within-component pairs, one sparse matrix per component."""

    __slots__ = ("space", "blocks")

    def __init__(self, space: BoxSpace, blocks: Sequence):
        if len(blocks) != space.n_components:
            raise ValueError(f"expected {space.n_components} blocks, got {len(blocks)}")
        mats = []
        for m, b in enumerate(blocks):
            mat = sp.csr_matrix(b, dtype=np.float64)
            if mat.shape != (space.sizes[m],) * 2:
                raise ValueError(f"block {m} has shape {mat.shape}")
            mat = mat.copy()
            mat.eliminate_zeros()
            mat.sort_indices()
            mats.append(mat)
        self.space = space
        self.blocks = tuple(mats)

    @classmethod
    def from_relation(cls, R: Relation, value: float = 1.0) -> "PairFunction":
        return cls(R.space, [R.matrix(m).astype(np.float64) * value for m in range(R.space.n_components)])

    @classmethod
    def from_dict(cls, space: BoxSpace, values: dict) -> "PairFunction":
        """``values`` maps ``(component, x, y)`` to a number."""
        rows = [[] for _ in space.sizes]
        cols = [[] for _ in space.sizes]
        data = [[] for _ in space.sizes]
        for (m, x, y), v in values.items():
            rows[m].append(x)
            cols[m].append(y)
            data[m].append(v)
        blocks = [
            sp.csr_matrix((data[m], (rows[m], cols[m])), shape=(n, n)) for m, n in enumerate(space.sizes)
        ]
        return cls(space, blocks)

    def support(self) -> Relation:
        return Relation.from_matrices(self.space, self.blocks)

    def dense(self, component: int) -> np.ndarray:
        return self.blocks[component].toarray()

    def values(self, component: int) -> np.ndarray:
        """Distinct positive values on a component, ascending."""
        d = self.blocks[component].data
        return np.unique(d[d > 0])

    def level_set(self, r: float) -> Relation:
        """``{(x, y) : eta(x, y) >= r}`` (``r`` must be positive)."""
        if r <= 0:
            raise ValueError("level sets are taken at positive thresholds")
        mats = []
        for b in self.blocks:
            c = b.copy()
            c.data = (c.data >= r).astype(np.float64)
            mats.append(c)
        return Relation.from_matrices(self.space, mats)

    def positive_part(self) -> "PairFunction":
        return PairFunction(self.space, [b.maximum(0) for b in self.blocks])

    def is_nonnegative(self) -> bool:
        return all((b.data >= 0).all() for b in self.blocks)

    def restrict(self, components: Iterable[int]) -> "PairFunction":
        keep = set(components)
        return PairFunction(
            self.space, [b if m in keep else sp.csr_matrix(b.shape) for m, b in enumerate(self.blocks)]
        )

    def _check(self, other):
        if other.space.sizes != self.space.sizes:
            raise SpaceMismatchError("pair functions live on different spaces")

    def __add__(self, other):
        self._check(other)
        return PairFunction(self.space, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return PairFunction(self.space, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar):
        return PairFunction(self.space, [b * scalar for b in self.blocks])

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-12) -> bool:
        self._check(other)
        return all(abs(a - b).max() <= atol if (a - b).nnz else True for a, b in zip(self.blocks, other.blocks))

    def __repr__(self):
        nnz = ", ".join(str(b.nnz) for b in self.blocks)
        return f"PairFunction(sizes={self.space.sizes}, nnz=[{nnz}])"


def _block(Z, component: int) -> sp.csr_matrix:
    if isinstance(Z, Relation):
        return Z.matrix(component).astype(np.float64)
    return Z.blocks[component]


def measure_cs(Z, w: WeightedComponent) -> float:
    """``sum over (x, y) of Z(x, y) w(y)`` on the component of ``w``."""
    b = _block(Z, w.component)
    return float(np.asarray(b.sum(axis=0)).ravel() @ w.weights)


def measure_ct(Z, w: WeightedComponent) -> float:
    """``sum over (x, y) of Z(x, y) w(x)`` on the component of ``w``."""
    b = _block(Z, w.component)
    return float(w.weights @ np.asarray(b.sum(axis=1)).ravel())


def _check_bijection(phi: Relation) -> None:
    if not is_partial_bijection(phi):
        raise PartialBijectionError("translation needs a partial bijection")


def translate(eta: PairFunction, phi: Relation) -> PairFunction:
    """``[lambda eta](x, y) = eta(phi^-1(x), y)`` on the image of ``phi``, zero elsewhere."""
    eta._check(phi)
    _check_bijection(phi)
    return PairFunction(
        eta.space, [phi.matrix(m).astype(np.float64) @ b for m, b in enumerate(eta.blocks)]
    )


def _weights_by_component(w) -> dict:
    if isinstance(w, WeightedComponent):
        return {w.component: w}
    return {wc.component: wc for wc in w}


def modified_translate(eta: PairFunction, phi: Relation, w) -> PairFunction:
    """Translation followed by the factor ``h(x, phi^-1(x)) = w(x) / w(phi^-1(x))``.

    ``w`` is one :class:`WeightedComponent` or a sequence of them; components
    without weights must carry a zero ``eta``.
    """
    eta._check(phi)
    _check_bijection(phi)
    wmap = _weights_by_component(w)
    blocks = []
    for m, b in enumerate(eta.blocks):
        P = phi.matrix(m).astype(np.float64).tocoo()
        if m not in wmap:
            if b.nnz and P.nnz:
                raise ValueError(f"no weights given for component {m}")
            blocks.append(sp.csr_matrix(b.shape))
            continue
        wt = wmap[m].weights
        scaled = sp.csr_matrix((wt[P.row] / wt[P.col], (P.row, P.col)), shape=P.shape)
        blocks.append(scaled @ b)
    return PairFunction(eta.space, blocks)


def invariance_defect(eta: PairFunction, L: Label, w: WeightedComponent) -> float:
    """``sum_{j=1..k} w o c^t((lambda_j eta - eta)_+)`` on the component of ``w``."""
    if not eta.is_nonnegative():
        raise ValueError("the invariance defect is defined for nonnegative eta")
    total = 0.0
    for phi in L.classes[1:]:
        total += measure_ct((translate(eta, phi) - eta).positive_part(), w)
    return total


def _thresholds(eta: PairFunction, component: int):
    """Distinct positive values ``v_1 < ... < v_p`` and step widths ``v_i - v_{i-1}``."""
    vals = eta.values(component)
    widths = np.diff(np.concatenate([[0.0], vals]))
    return vals, widths


def level_set_boundary_integral(eta: PairFunction, C: Relation, w: WeightedComponent) -> float:
    """``integral over r > 0 of w o c^t((C o F(r)) \\ F(r)) dr`` as an exact finite sum.

    ``F(r)`` is constant for ``r`` in ``(v_{i-1}, v_i]``, so the integral is
    ``sum_i (v_i - v_{i-1}) w o c^t((C o F(v_i)) \\ F(v_i))``.
    """
    m = w.component
    vals, widths = _thresholds(eta, m)
    total = 0.0
    only = eta.restrict([m])
    C_m = C.restrict([m])
    for v, width in zip(vals, widths):
        F = only.level_set(v)
        total += width * measure_ct(compose(C_m, F) - F, w)
    return total


def _max_translate(eta_block: sp.csr_matrix, label: Label, component: int) -> sp.csr_matrix:
    """``max over z with (x, z) in T of eta(z, y)`` via the classes of a label of ``T``."""
    out = eta_block.copy()
    for phi in label.classes[1:]:
        out = out.maximum(phi.matrix(component).astype(np.float64) @ eta_block)
    return out


def _masses_by_threshold(block: sp.csr_matrix, w: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """``w o c^t({block >= v})`` for every ``v`` in ``thresholds``."""
    coo = block.tocoo()
    keep = coo.data > 0
    vals = coo.data[keep]
    mass = w[coo.row[keep]]
    order = np.argsort(-vals, kind="stable")
    vals, mass = vals[order], mass[order]
    cum = np.concatenate([[0.0], np.cumsum(mass)])
    # number of entries with value >= v, values sorted descending
    counts = np.searchsorted(-vals, -thresholds, side="right")
    return cum[counts]


@dataclass(frozen=True)
class FolnerCertificate:
    """``w o c^t(T o F) < (1 + epsilon) w o c^t(F)`` on every listed component.

    ``per_component`` rows are ``(component, threshold_r, mass_F, mass_TF)``.
    """

    F: Relation = field(repr=False)
    epsilon: float
    per_component: list

    success = True

    @property
    def threshold_r(self) -> float:
        return min(row[1] for row in self.per_component)

    @property
    def ratios(self) -> list:
        return [row[3] / row[2] for row in self.per_component]


@dataclass(frozen=True)
class FolnerFailure:
    """No level set passed on at least one component.

    ``per_component`` rows are ``(component, passed, best_threshold, best_ratio)``.
    """

    epsilon: float
    per_component: list
    best_ratio: float

    success = False

    @property
    def mask(self) -> list:
        return [row[1] for row in self.per_component]


def _max_ball_masses(block: sp.csr_matrix, w: np.ndarray, v: float) -> float:
    """Largest ``w(F(v)[y])`` over the columns ``y``."""
    c = block.tocsc()
    hit = sp.csc_matrix((c.data >= v, c.indices, c.indptr), shape=c.shape)
    return float((w @ hit).max()) if hit.nnz else 0.0


def _first_admissible(block, w, vals, max_ball_mass) -> int:
    """Index of the smallest threshold whose level-set balls all weigh at most ``max_ball_mass``."""
    lo, hi = 0, len(vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if _max_ball_masses(block, w, vals[mid]) <= max_ball_mass:
            hi = mid
        else:
            lo = mid + 1
    return lo


def extract_folner(
    eta: PairFunction, T: Relation, eps: float, weights, max_ball_mass: float | None = None
) -> FolnerCertificate | FolnerFailure:
    """Scan the level sets of ``eta`` for a Følner certificate.

    Every component listed in ``weights`` is scanned independently; on each,
    the passing threshold with the largest ``w o c^t(F(r))`` (the smallest
    ``r``) is kept.  Success needs every scanned component to pass.

    With ``max_ball_mass`` set, only level sets whose balls ``F(r)[y]`` all
    have weight at most that value are admissible.  Nearly full relations
    pass the inequality trivially on any finite component, expanders
    included, so this rules out the vacuous certificates.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not eta.is_nonnegative():
        raise ValueError("eta must be nonnegative")
    wmap = _weights_by_component(weights)
    T = T | diagonal(T.space)
    label = build_label(T)
    rows_ok, rows_all = [], []
    keys = [np.empty(0, dtype=np.int64) for _ in eta.space.sizes]
    for m in sorted(wmap):
        block = eta.blocks[m]
        if block.nnz == 0:
            raise ValueError(f"eta vanishes on component {m}")
        w = wmap[m].weights
        vals = eta.values(m)
        mass_F = _masses_by_threshold(block, w, vals)
        mass_TF = _masses_by_threshold(_max_translate(block, label, m), w, vals)
        ratios = mass_TF / mass_F
        # a relative margin keeps float rounding from certifying exact ties
        passed = mass_TF < (1 + eps) * mass_F * (1 - _TIE_MARGIN)
        if max_ball_mass is not None:
            admissible = np.arange(len(vals)) >= _first_admissible(block, w, vals, max_ball_mass)
            passed &= admissible
            ratios = np.where(admissible, ratios, np.inf)
        if passed.any():
            i = int(np.nonzero(passed)[0][0])  # ascending values: first pass = largest mass
            rows_ok.append((m, float(vals[i]), float(mass_F[i]), float(mass_TF[i])))
            F_m = eta.restrict([m]).level_set(vals[i])
            keys[m] = F_m.keys(m)
            rows_all.append((m, True, float(vals[i]), float(ratios[i])))
        else:
            i = int(np.argmin(ratios))
            rows_all.append((m, False, float(vals[i]), float(ratios[i])))
    if all(row[1] for row in rows_all):
        return FolnerCertificate(Relation._from_keys(eta.space, keys), eps, rows_ok)
    best = max(row[3] for row in rows_all if not row[1])
    return FolnerFailure(eps, rows_all, best)


def verify_certificate(cert: FolnerCertificate, T: Relation, weights) -> bool:
    """Recompute both masses from the relations alone and recheck the inequality."""
    wmap = _weights_by_component(weights)
    T = T | diagonal(T.space)
    TF = compose(T, cert.F)
    for m, _, _, _ in cert.per_component:
        w = wmap[m]
        if not measure_ct(TF.restrict([m]), w) < (1 + cert.epsilon) * measure_ct(cert.F.restrict([m]), w):
            return False
    return True


def _ct_normalize(eta: PairFunction, w: WeightedComponent) -> PairFunction:
    mass = measure_ct(eta, w)
    return eta * (1.0 / mass)


def tent_kernel(T: Relation, radius: int, component: int | None = None) -> PairFunction:
    """``eta(x, y) = radius + 1 - d(x, y)`` for ``d(x, y) <= radius``, zero beyond.

    ``d`` is the step distance of ``diag | T | T^-1``.
    """
    if component is not None:
        T = T.restrict([component])
    layers = distance_layers(T, radius)
    blocks = []
    for m in range(T.space.n_components):
        acc = sp.csr_matrix(T.space.sizes[m:m + 1] * 2, dtype=np.float64)
        if component is None or m == component:
            for layer in layers:
                acc = acc + layer.matrix(m).astype(np.float64)
        blocks.append(acc)
    return PairFunction(T.space, blocks)


def heat_kernel(L: Label, steps: int, component: int | None = None) -> PairFunction:
    """``steps``-fold averaging of the diagonal indicator under
    ``(2k+1)^-1 sum_{j=-k..k} lambda_j``."""
    space = L.base.space
    classes = signed_classes(L)
    blocks = []
    for m, n in enumerate(space.sizes):
        if component is not None and m != component:
            blocks.append(sp.csr_matrix((n, n)))
            continue
        M = sum(c.matrix(m).astype(np.float64) for c in classes) / len(classes)
        E = sp.identity(n, format="csr")
        for _ in range(steps):
            E = M @ E
        blocks.append(E)
    return PairFunction(space, blocks)


def folner_search(
    component: int,
    T: Relation,
    L: Label | None,
    eps: float,
    w: WeightedComponent,
    kernel: str = "tent",
    radii: Iterable[int] = range(1, 17),
    max_ball_mass: float | None = None,
):
    """Try candidate kernels at increasing radius; first certificate wins.

    Returns ``(result, radius)``: the first :class:`FolnerCertificate` found,
    or a :class:`FolnerFailure` carrying the smallest ratio seen and the
    radius where it occurred.  ``max_ball_mass`` is passed to
    :func:`extract_folner`.
    """
    T_m = T.restrict([component]) | diagonal(T.space).restrict([component])
    if kernel == "heat" and L is None:
        L = build_label(T | diagonal(T.space))
    best = None
    for radius in radii:
        if kernel == "tent":
            eta = tent_kernel(T_m, radius, component)
        elif kernel == "heat":
            eta = heat_kernel(L, radius, component)
        else:
            raise ValueError(f"unknown kernel {kernel!r}")
        eta = _ct_normalize(eta, w)
        res = extract_folner(eta, T_m, eps, w, max_ball_mass)
        if res.success:
            return res, radius
        if best is None or res.best_ratio < best[0].best_ratio:
            best = (res, radius)
    return best
