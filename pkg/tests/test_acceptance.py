"""Acceptance suite: one group of tests per numbered criterion.

Each test is tagged with ``@pytest.mark.acceptance(n)``; ``conftest.py``
prints an ``ACCEPTANCE n: PASS/FAIL`` line per criterion at the end of the
run.  Fuzzed inputs come from seeded numpy generators so the case counts are
exact and the runs are reproducible.
"""

import json
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from coarsekit.boxspace import (
    BoxSpace,
    Relation,
    WeightedComponent,
    ball,
    compose,
    diagonal,
    inverse,
    max_degree,
    widen,
)
from coarsekit.folner import (
    PairFunction,
    extract_folner,
    folner_search,
    level_set_boundary_integral,
    measure_ct,
    translate,
    verify_certificate,
)
from coarsekit.label import build_label, greedy_bound, verify_label
from coarsekit.onlp import localization_ratio, witness_pipeline
from coarsekit.propa import ball_average_family, certificate_quality, heat_family
from coarsekit.roeop import PropagationOperator, from_relation, markov_operator, multiply, operator_norm
from coarsekit.workbench.cli import run
from coarsekit.workbench.generators import gen_cycles, gen_margulis, gen_random_regular, gen_torus
from coarsekit.workbench.report import strip_timestamp
from coarsekit.wwexpander import min_boundary_ratio, ww_scan, ww_verdict

from helpers import (
    ball_sets,
    bounded_subsets,
    brute_min_ratio,
    compose_sets,
    cycle_space,
    inverse_sets,
    to_sets,
    widen_sets,
)

FIXTURES = Path(__file__).parent / "fixtures"


def random_space(rng, max_size, max_components=3, min_size=1):
    k = int(rng.integers(1, max_components + 1))
    return BoxSpace(tuple(int(v) for v in rng.integers(min_size, max_size + 1, k)))


def random_relation(rng, space, density=None):
    if density is None:
        density = float(rng.choice([0.05, 0.15, 0.3, 0.5]))
    return Relation(space, [np.argwhere(rng.random((n, n)) < density) for n in space.sizes])


def random_operator(rng, space, R):
    blocks = []
    for m in range(space.n_components):
        M = R.matrix(m).tocoo()
        blocks.append(sp.csr_matrix((rng.standard_normal(M.nnz), (M.row, M.col)), shape=M.shape))
    return PropagationOperator(space, blocks, R)


def degree_capped_relation(rng, space, cap):
    """Random relation containing the diagonal with ``max_degree <= cap``."""
    per = []
    for n in space.sizes:
        pairs = {(x, x) for x in range(n)}
        out_deg = np.ones(n, int)
        in_deg = np.ones(n, int)
        for _ in range(n * cap * 2):
            x, y = (int(v) for v in rng.integers(0, n, 2))
            if (x, y) in pairs or out_deg[x] >= cap or in_deg[y] >= cap:
                continue
            pairs.add((x, y))
            out_deg[x] += 1
            in_deg[y] += 1
        per.append(sorted(pairs))
    return Relation(space, per)


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


@pytest.mark.acceptance(1)
def test_relation_algebra_suite():
    rng = np.random.default_rng(1001)
    with Timer(10):
        for _ in range(500):
            space = random_space(rng, 12)
            A, B, C = (random_relation(rng, space) for _ in range(3))
            assert compose(compose(A, B), C) == compose(A, compose(B, C))
            assert inverse(compose(A, B)) == compose(inverse(B), inverse(A))
            widened = [widen(A, n) for n in (1, 2, 3)]
            assert A <= widened[0] <= widened[1] <= widened[2]
            for m, n in enumerate(space.sizes):
                Y = np.flatnonzero(rng.random(n) < 0.4).tolist()
                assert ball(compose(A, B), Y, m) == ball(A, ball(B, Y, m), m)
                a, b = to_sets(A)[m], to_sets(B)[m]
                assert to_sets(compose(A, B))[m] == compose_sets(a, b)
                assert to_sets(inverse(A))[m] == inverse_sets(a)
                assert set(ball(A, Y, m)) == ball_sets(a, Y)
                assert to_sets(widened[1])[m] == widen_sets(a, 2, n)


@pytest.mark.acceptance(2)
def test_label_suite():
    rng = np.random.default_rng(2002)
    with Timer(10):
        for _ in range(200):
            space = random_space(rng, 16, max_components=2)
            R = degree_capped_relation(rng, space, int(rng.integers(1, 7)))
            assert max_degree(R) <= 6
            L = build_label(R)
            assert verify_label(L)
            assert L.k <= greedy_bound(R)


@pytest.mark.acceptance(3)
def test_spectral_suite():
    rng = np.random.default_rng(3003)
    with Timer(30):
        for _ in range(100):
            space = random_space(rng, 64, max_components=2)
            a = random_operator(rng, space, random_relation(rng, space))
            dense = [np.linalg.eigvalsh(a.dense(m).T @ a.dense(m)).max() ** 0.5 if a.blocks[m].nnz else 0.0
                     for m in range(space.n_components)]
            assert np.allclose(operator_norm(a), dense, rtol=0, atol=1e-8)
        for length in range(2, 13):
            s = BoxSpace((length,))
            pairs = [(i, i + 1) for i in range(length - 1)] + [(i + 1, i) for i in range(length - 1)]
            a = from_relation(Relation(s, [pairs]))
            oracle = np.abs(np.linalg.eigvalsh(a.dense(0))).max()
            assert oracle == pytest.approx(2 * np.cos(np.pi / (length + 1)), abs=1e-12)
            assert operator_norm(a)[0] == pytest.approx(oracle, abs=1e-8)


@pytest.mark.acceptance(4)
def test_onlp_reduction():
    rng = np.random.default_rng(4004)
    done = 0
    with Timer(60):
        while done < 50:
            space = random_space(rng, 14, max_components=2, min_size=2)
            a = random_operator(rng, space, random_relation(rng, space))
            if all(a.blocks[m].nnz == 0 for m in range(space.n_components)):
                continue
            F = random_relation(rng, space, float(rng.choice([0.1, 0.2, 0.3]))) | diagonal(space)
            rep = localization_ratio(a, F)
            total = max(np.linalg.norm(a.dense(m), 2) for m in range(space.n_components))
            sup = 0.0
            for m, n in enumerate(space.sizes):
                D = a.dense(m)
                for Y in bounded_subsets(to_sets(F)[m], n):
                    sup = max(sup, np.linalg.norm(D[:, list(Y)], 2))
            assert rep.best_ratio == pytest.approx(sup / total, abs=1e-10)
            done += 1


def _markov_power(T, k):
    a = base = markov_operator(T)
    for _ in range(k - 1):
        a = multiply(a, base)
    return a


WITNESS_FAMILIES = {
    "margulis-8": lambda: gen_margulis([8]),
    "margulis-12": lambda: gen_margulis([12]),
    "random-regular-4": lambda: gen_random_regular(4, [30], seed=1),
    "random-regular-3": lambda: gen_random_regular(3, [24, 40], seed=5),
    "cycles": lambda: gen_cycles([12, 20]),
    "torus": lambda: gen_torus([5]),
}


@pytest.mark.acceptance(5)
@pytest.mark.parametrize("name", sorted(WITNESS_FAMILIES))
def test_witness_pipeline_on_generated_instances(name):
    sf = WITNESS_FAMILIES[name]()
    T = sf.relation()
    triggered = []
    with Timer(60):
        for k in (1, 2, 3):
            a = _markov_power(T, k)
            for F in (diagonal(T.space), widen(T, 1)):
                for m in range(sf.space.n_components):
                    res = witness_pipeline(a, F, m)
                    if res.localization.best_ratio < 1 / 3:
                        assert res.triggered
                        assert res.witness.exact
                        assert res.witness.min_ratio >= 3 - 1e-6
                        triggered.append((k, m))
                    else:
                        assert not res.triggered
    if name.startswith(("margulis", "random-regular-4")):
        assert triggered


@pytest.mark.acceptance(5)
def test_witness_pipeline_margulis_12_runtime():
    sf = gen_margulis([12])
    T = sf.relation()
    with Timer(60):
        res = witness_pipeline(_markov_power(T, 2), diagonal(T.space), 0)
    assert res.triggered and res.witness.holds
    assert res.witness.min_ratio >= 3 - 1e-6


@pytest.mark.acceptance(6)
@pytest.mark.parametrize("n", [12, 20, 30])
@pytest.mark.parametrize("s", [1, 2, 3])
def test_cycle_boundary_ratio_family(n, s):
    space, T = cycle_space(n)
    _, F = cycle_space(n, s)
    w = WeightedComponent.uniform(0, n)
    expected = Fraction(2 * s + 3, 2 * s + 1)
    with Timer(60):
        res = min_boundary_ratio(w, T, F)
        oracle = brute_min_ratio(w.weights, to_sets(T)[0], to_sets(F)[0], n)
    assert oracle == expected
    assert res.exact
    assert res.min_ratio == float(expected)


@pytest.mark.acceptance(7)
def test_folner_c100_band_certificate():
    space, T = cycle_space(100)
    w = WeightedComponent.uniform(0, 100)
    with Timer(60):
        res, radius = folner_search(0, T, None, 0.1, w)
    assert res.success and radius == 10
    assert res.F == widen(T, 10)
    assert res.ratios[0] == pytest.approx(23 / 21, abs=1e-12)
    assert verify_certificate(res, T, w)


def _eta_case(rng):
    """Random nonnegative pair function on a random relation with its label."""
    space = random_space(rng, 10, max_components=1, min_size=2)
    T = degree_capped_relation(rng, space, int(rng.integers(1, 5)))
    n = space.sizes[0]
    support = (random_relation(rng, space, 0.4) | diagonal(space)).matrix(0).tocoo()
    block = np.zeros((n, n))
    # small integer levels so that many pairs share a threshold
    block[support.row, support.col] = rng.integers(1, 5, support.nnz) * rng.choice([1.0, 0.1, 0.37])
    w = WeightedComponent.normalized(0, rng.integers(1, 6, n))
    return PairFunction(space, [block]), build_label(T), w


def _ct(pairs, w):
    return sum(w[x] for x, _ in pairs)


@pytest.mark.acceptance(7)
def test_folner_coarea_and_reverification():
    rng = np.random.default_rng(7007)
    certified = 0
    with Timer(60):
        for _ in range(100):
            eta, L, w = _eta_case(rng)
            for phi in L.classes:
                lhs = level_set_boundary_integral(eta, phi, w)
                rhs = measure_ct((translate(eta, phi) - eta).positive_part(), w)
                assert lhs == pytest.approx(rhs, abs=1e-9)
            for eps in (0.05, 0.3, 1.0, 3.0):
                cert = extract_folner(eta, L.base, eps, w)
                if cert.success:
                    certified += 1
                    assert verify_certificate(cert, L.base, w)
                    F = to_sets(cert.F)[0]
                    TF = compose_sets(to_sets(L.base)[0], F)
                    assert _ct(TF, w.weights) < (1 + eps) * _ct(F, w.weights)
    assert certified > 0


@pytest.mark.acceptance(8)
def test_property_a_suite():
    _, T = cycle_space(40)
    with Timer(10):
        for R in range(1, 7):
            eps, _ = certificate_quality(ball_average_family(0, T, R), T)
            assert eps == pytest.approx(np.sqrt(2 / (2 * R + 1)), abs=1e-12)
        eps, _ = certificate_quality(heat_family(0, build_label(T), 0), T)
    assert eps == np.sqrt(2)


CONTRAST = json.loads((FIXTURES / "contrast.json").read_text())
GENERATORS = {"cycles": gen_cycles, "torus": gen_torus, "margulis": gen_margulis}
_contrast_clock = {"spent": 0.0}


def _folner_rows(sf, radii):
    T = sf.relation()
    W = sf.weights()
    return [folner_search(m, T, None, 0.1, W[m], radii=radii, max_ball_mass=0.5)
            for m in range(sf.space.n_components)]


@pytest.mark.acceptance(9)
@pytest.mark.parametrize("family", ["cycles", "torus", "margulis"])
def test_contrast_experiment(family):
    fx = CONTRAST[family]
    sf = GENERATORS[family](fx["sizes"])
    T = sf.relation()
    lo, hi = fx["folner_radii"]
    start = time.perf_counter()
    rows = _folner_rows(sf, range(lo, hi + 1))
    reports = ww_scan(sf.space, sf.weights(), T, [widen(T, d) for d in fx["ww_depths"]], 0.1, mode=fx["ww_mode"])
    _contrast_clock["spent"] += time.perf_counter() - start
    assert _contrast_clock["spent"] < 300

    tails = [r.tail_min for r in reports]
    assert tails == pytest.approx(fx["ww_tail_min"], rel=1e-9)
    assert ww_verdict(reports) == fx["ww_verdict"]
    if family == "margulis":
        # expanders: no certificate at radius <= 4, and the tail stays above 1 + c
        assert not any(res.success for res, _ in rows)
        assert [r for _, r in rows] == [r for r, _ in fx["folner_best"]]
        assert [res.best_ratio for res, _ in rows] == pytest.approx([v for _, v in fx["folner_best"]], rel=1e-9)
        assert all(res.best_ratio > 1.1 for res, _ in rows)
        assert all(t > 1.1 for t in tails)
        assert max(fx["ww_depths"]) <= 2 and hi <= 4
    else:
        # amenable: certificates at modest radius, and the WW condition fails
        assert all(res.success for res, _ in rows)
        assert [r for _, r in rows] == [r for r, _ in fx["folner"]]
        assert [res.ratios[0] for res, _ in rows] == pytest.approx([v for _, v in fx["folner"]], rel=1e-9)
        for (res, _), w in zip(rows, sf.weights()):
            assert verify_certificate(res, T, w)
        assert any(t <= 1.1 for t in tails)
        assert ww_verdict(reports) == "refuted"


@pytest.mark.acceptance(10)
@pytest.mark.parametrize(
    "argv",
    [
        ["label"],
        ["norms"],
        ["onlp"],
        ["wwexpander", "--f-depth", "2"],
        ["folner", "--radius", "6"],
        ["propa"],
        ["pipeline", "--jobs", "2"],
    ],
)
def test_cli_reports_are_byte_identical(tmp_path, argv):
    texts = []
    for i in range(2):
        space_file = tmp_path / f"space{i}.txt"
        assert run(["generate", "random-regular", "12", "16", "--degree", "3", "--seed", "9", "--out", str(space_file)]) == 0
        texts.append(space_file.read_bytes())
    assert texts[0] == texts[1]
    reports = []
    for i in range(2):
        out = tmp_path / f"report{i}.json"
        assert run([argv[0], str(tmp_path / "space0.txt"), *argv[1:], "--out", str(out)]) in (0, 2)
        reports.append(out.read_text())
    assert strip_timestamp(reports[0]) == strip_timestamp(reports[1])
