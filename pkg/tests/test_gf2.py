import numpy as np
import pytest
from hypothesis import given, strategies as st

from detrelay.gf2 import Gf2Matrix, inverse, rank, row_sum, solve_row_membership

from conftest import binary_arrays, gf2_matrices, np_rank_gf2


def test_identity_rank():
    assert rank(Gf2Matrix.identity(3)) == 3


def test_all_ones_rank_one():
    assert rank(Gf2Matrix.from_array(np.ones((2, 2)))) == 1


def test_empty_rank_zero():
    assert rank(Gf2Matrix.zeros(0, 0)) == 0
    assert rank(Gf2Matrix.zeros(3, 4)) == 0


def test_xor_dependency_is_rank_two():
    m = Gf2Matrix.from_array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert rank(m) == 2


def test_solve_finds_combination():
    m = Gf2Matrix.from_array([[1, 0], [0, 1]])
    assert solve_row_membership(m, [1, 1]) == frozenset({0, 1})
    assert solve_row_membership(m, [0, 0]) == frozenset()


def test_solve_outside_row_space():
    m = Gf2Matrix.from_array([[1, 1]])
    assert solve_row_membership(m, [1, 0]) is None


def test_solve_accepts_packed_int():
    m = Gf2Matrix.from_array([[1, 0, 0], [0, 1, 1]])
    assert solve_row_membership(m, 0b111) == frozenset({0, 1})


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_row_membership(Gf2Matrix.identity(2), [1, 0, 0])


def test_row_sum():
    m = Gf2Matrix.from_array([[1, 1, 0], [0, 1, 1]])
    assert row_sum(m, [0, 1]) == [1, 0, 1]
    assert row_sum(m, []) == [0, 0, 0]
    with pytest.raises(IndexError):
        row_sum(m, [2])


def test_inverse_singular_raises():
    with pytest.raises(ValueError):
        inverse(Gf2Matrix.from_array([[1, 1], [1, 1]]))


def test_labels_follow_submatrix_and_matmul():
    m = Gf2Matrix.from_array([[1, 0], [1, 1]], row_labels=["a", "b"], col_labels=["x", "y"])
    sub = m.submatrix(["b"], ["y", "x"])
    assert sub.to_array().tolist() == [[1, 1]]
    prod = m @ Gf2Matrix.identity(2)
    assert prod.row_labels == ("a", "b")


def test_rejects_bad_construction():
    with pytest.raises(ValueError):
        Gf2Matrix((4,), 2)
    with pytest.raises(ValueError):
        Gf2Matrix((1, 1), 1, ("a", "a"))


@given(binary_arrays())
def test_rank_matches_reference(a):
    assert rank(Gf2Matrix.from_array(a)) == np_rank_gf2(a)


@given(gf2_matrices())
def test_rank_transpose_invariant(m):
    assert rank(m) == rank(m.T)


@given(gf2_matrices())
def test_rank_bounded_by_shape(m):
    assert rank(m) <= min(m.shape)


@given(gf2_matrices(), st.data())
def test_solution_reproduces_target(m, data):
    if m.nrows == 0:
        return
    picks = data.draw(st.sets(st.integers(0, m.nrows - 1)))
    target = row_sum(m, picks)
    sol = solve_row_membership(m, target)
    assert sol is not None
    assert row_sum(m, sol) == target


@given(gf2_matrices(max_rows=6, max_cols=6))
def test_full_rank_solution_is_unique(m):
    if m.nrows == 0 or rank(m) != m.nrows:
        return
    for i in range(m.nrows):
        assert solve_row_membership(m, list(m.to_array()[i])) == frozenset({i})


@given(binary_arrays(max_rows=6, max_cols=6))
def test_inverse_of_full_rank_square(a):
    n = min(a.shape) if a.size else 0
    a = a[:n, :n]
    m = Gf2Matrix.from_array(a) if n else Gf2Matrix.zeros(0, 0)
    if rank(m) != n:
        return
    prod = (m @ inverse(m)).to_array()
    assert (prod == np.eye(n, dtype=np.uint8)).all()


@given(binary_arrays(), binary_arrays())
def test_matmul_matches_numpy(a, b):
    if a.shape[1] != b.shape[0]:
        b = np.resize(b, (a.shape[1], b.shape[1])) if b.size else np.zeros((a.shape[1], 0), np.uint8)
    expected = (a.astype(int) @ b.astype(int)) % 2
    got = (Gf2Matrix.from_array(a) @ Gf2Matrix.from_array(b, col_labels=range(b.shape[1]))).to_array()
    assert got.shape == expected.shape
    assert (got == expected).all()


@given(gf2_matrices(), st.data())
def test_vecmul_is_row_sum(m, data):
    v = data.draw(st.lists(st.integers(0, 1), min_size=m.nrows, max_size=m.nrows))
    assert m.vecmul(v) == row_sum(m, [i for i, b in enumerate(v) if b])
