import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.boxspace import BoxSpace, Relation, compose, diagonal, inverse, widen
from coarsekit.errors import NonConvergenceError, SpaceMismatchError
from coarsekit.roeop import (
    PropagationOperator,
    add,
    adjoint,
    compressed_norm,
    from_relation,
    identity,
    markov_operator,
    multiply,
    operator_norm,
    power_iteration,
)

from helpers import cycle_space, relations


def path_operator(n):
    s = BoxSpace((n,))
    pairs = [(i, i + 1) for i in range(n - 1)] + [(i + 1, i) for i in range(n - 1)]
    return from_relation(Relation(s, [pairs]))


@st.composite
def operators(draw, max_size=64, max_components=2):
    """Random operator on a random relation, with gaussian entries."""
    k = draw(st.integers(1, max_components))
    sizes = tuple(draw(st.lists(st.integers(1, max_size), min_size=k, max_size=k)))
    space = BoxSpace(sizes)
    R = draw(relations(space, density=draw(st.sampled_from([0.05, 0.2, 0.6]))))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    blocks = []
    for m in range(k):
        M = R.matrix(m).astype(float).tocoo()
        blocks.append(sp.csr_matrix((rng.standard_normal(M.nnz), (M.row, M.col)), shape=M.shape))
    return PropagationOperator(space, blocks, R)


def dense_norm(a, m):
    return np.linalg.norm(a.dense(m), 2) if a.blocks[m].nnz else 0.0


def test_rejects_entries_outside_propagation():
    s = BoxSpace((3,))
    with pytest.raises(ValueError):
        PropagationOperator(s, [np.eye(3)], Relation(s, [[(0, 0)]]))


def test_identity_norm_exact():
    assert operator_norm(identity(BoxSpace((5, 2)))).tolist() == [1.0, 1.0]


@pytest.mark.parametrize("n", [4, 6, 9, 20])
def test_cycle_adjacency_norm(n):
    space = BoxSpace((n,))
    edges = [(x, (x + 1) % n) for x in range(n)] + [((x + 1) % n, x) for x in range(n)]
    A = from_relation(Relation(space, [edges]))
    assert operator_norm(A)[0] == pytest.approx(2.0, abs=1e-10)


def test_path_three_norm():
    assert operator_norm(path_operator(3))[0] == pytest.approx(np.sqrt(2), abs=1e-10)


def test_cycle_square_propagation_and_diagonal():
    space = BoxSpace((6,))
    edges = [(x, (x + 1) % 6) for x in range(6)] + [((x + 1) % 6, x) for x in range(6)]
    T = Relation(space, [edges])
    A = from_relation(T)
    A2 = multiply(A, A)
    assert A2.propagation == compose(T, T)
    assert A2.propagation == widen(T, 2) - (widen(T, 1) - diagonal(space))
    assert np.all(np.diag(A2.dense(0)) == 2)


def test_identity_product_and_adjoint():
    _, T = cycle_space(6)
    A = from_relation(T)
    I = identity(T.space)
    prod = multiply(I, A)
    assert prod.propagation == T
    assert np.array_equal(prod.dense(0), A.dense(0))
    assert np.array_equal(adjoint(A).dense(0), A.dense(0))
    assert adjoint(I).propagation == diagonal(T.space)


def test_compressed_norm_example():
    space = BoxSpace((12,))
    edges = [(x, (x + 1) % 12) for x in range(12)] + [((x + 1) % 12, x) for x in range(12)]
    A = from_relation(Relation(space, [edges]))
    assert compressed_norm(A, [0, 1, 2]) == pytest.approx(np.sqrt(3), abs=1e-12)
    assert compressed_norm(A, []) == 0.0
    assert compressed_norm(A, range(12)) == pytest.approx(operator_norm(A)[0], abs=1e-10)


def test_compressed_norm_wide_uses_power_iteration():
    _, T = cycle_space(700)
    A = markov_operator(T)
    assert compressed_norm(A, range(700)) == pytest.approx(1.0, abs=1e-9)


def test_markov_operator_norm_at_most_one():
    _, T = cycle_space(9)
    assert operator_norm(markov_operator(T))[0] == pytest.approx(1.0, abs=1e-10)


def test_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        multiply(identity(BoxSpace((2,))), identity(BoxSpace((3,))))


def test_nonconvergence_carries_estimate():
    with pytest.raises(NonConvergenceError) as err:
        power_iteration(lambda v: np.diag([1.0, 0.999, 0.5]) @ v, 3, tol=1e-15, max_iter=3)
    assert err.value.estimate > 0


def test_tol_must_be_positive():
    with pytest.raises(ValueError):
        operator_norm(identity(BoxSpace((2,))), tol=0)


@settings(max_examples=60, deadline=None)
@given(operators(max_size=24), operators(max_size=24))
def test_products_match_dense_and_stay_in_propagation(a, b):
    if a.space.sizes != b.space.sizes:
        with pytest.raises(SpaceMismatchError):
            multiply(a, b)
        return
    ab = multiply(a, b)
    s = add(a, b)
    ah = adjoint(a)
    for m in range(a.space.n_components):
        assert np.allclose(ab.dense(m), a.dense(m) @ b.dense(m))
        assert np.allclose(s.dense(m), a.dense(m) + b.dense(m))
        assert np.allclose(ah.dense(m), a.dense(m).conj().T)
    for op in (ab, s, ah, multiply(ah, ab)):
        assert op.support() <= op.propagation
    assert ab.propagation == compose(a.propagation, b.propagation)
    assert ah.propagation == inverse(a.propagation)


@settings(max_examples=60, deadline=None)
@given(operators())
def test_norm_matches_dense(a):
    norms = operator_norm(a)
    for m in range(a.space.n_components):
        assert norms[m] == pytest.approx(dense_norm(a, m), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(operators(max_size=20, max_components=1), operators(max_size=20, max_components=1))
def test_submultiplicative(a, b):
    if a.space.sizes != b.space.sizes:
        return
    assert operator_norm(multiply(a, b))[0] <= operator_norm(a)[0] * operator_norm(b)[0] + 1e-9


@settings(max_examples=60, deadline=None)
@given(operators(max_size=20, max_components=1), st.data())
def test_compressed_norm_monotone(a, data):
    n = a.space.sizes[0]
    Y2 = data.draw(st.sets(st.integers(0, n - 1)))
    Y1 = data.draw(st.sets(st.sampled_from(sorted(Y2)))) if Y2 else set()
    c1, c2 = compressed_norm(a, Y1), compressed_norm(a, Y2)
    assert c1 <= c2 + 1e-12
    if Y2:
        assert c2 == pytest.approx(np.linalg.norm(a.dense(0)[:, sorted(Y2)], 2), abs=1e-10)
