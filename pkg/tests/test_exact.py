from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffconn.exact import (
    RationalMatrix,
    RowReducer,
    ShapeError,
    block_diag,
    column_stack,
    kron,
    mat_vec,
    nullspace,
    rank,
    rref,
    solve,
)


@st.composite
def int_matrices(draw, max_rows=6, max_cols=6, lo=-3, hi=3):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    # bias toward sparse, rank-deficient inputs
    elems = st.one_of(st.just(0), st.just(0), st.integers(lo, hi))
    return [[draw(elems) for _ in range(c)] for _ in range(r)]


def naive_mul(a, b):
    return [[sum(a[i][l] * b[l][j] for l in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def to_sympy(rows):
    return sympy.Matrix(rows)


def test_construction_and_access():
    m = RationalMatrix([[1, Fraction(1, 2)], [0, -3]])
    assert m.shape == (2, 2)
    assert m[0, 1] == Fraction(1, 2)
    assert m.row(1) == (0, -3)
    assert m.col(0) == (1, 0)
    assert m.nnz() == 3
    assert m.T.tolist() == [[1, 0], [Fraction(1, 2), -3]]
    with pytest.raises(ShapeError):
        RationalMatrix([[1, 2], [3]])


def test_floats_rejected():
    with pytest.raises(TypeError):
        RationalMatrix([[0.5]])


def test_identity_zeros_monomial():
    assert RationalMatrix.identity(3).is_monomial()
    assert RationalMatrix.zeros(2, 3).is_zero()
    assert not RationalMatrix([[1, 1], [0, 1]]).is_monomial()
    assert RationalMatrix([[0, -1], [1, 0]]).is_monomial()


@settings(max_examples=150)
@given(st.data())
def test_matmul_matches_naive(data):
    a = data.draw(int_matrices())
    inner = len(a[0])
    c = data.draw(st.integers(1, 5))
    b = [[data.draw(st.integers(-3, 3)) for _ in range(c)] for _ in range(inner)]
    assert (RationalMatrix(a) @ RationalMatrix(b)).tolist() == naive_mul(a, b)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        RationalMatrix.identity(2) @ RationalMatrix.identity(3)


@settings(max_examples=60)
@given(int_matrices(3, 3), int_matrices(3, 3))
def test_kron_matches_numpy(a, b):
    expected = np.kron(np.array(a), np.array(b)).tolist()
    assert kron(RationalMatrix(a), RationalMatrix(b)).tolist() == expected


def test_kron_mixed_product_property():
    a = RationalMatrix([[1, 2], [0, 1]])
    b = RationalMatrix([[0, 1], [1, 0]])
    c = RationalMatrix([[3, 0], [1, 1]])
    d = RationalMatrix([[1, -1], [2, 0]])
    assert kron(a, b) @ kron(c, d) == kron(a @ c, b @ d)


def test_block_diag():
    m = block_diag([RationalMatrix([[1]]), RationalMatrix([[2, 3], [4, 5]])])
    assert m.tolist() == [[1, 0, 0], [0, 2, 3], [0, 4, 5]]


@settings(max_examples=150)
@given(int_matrices(7, 7))
def test_rank_matches_sympy(rows):
    assert rank(RationalMatrix(rows)) == to_sympy(rows).rank()


@settings(max_examples=100)
@given(int_matrices(6, 7))
def test_nullspace_is_kernel_basis(rows):
    a = RationalMatrix(rows)
    basis = nullspace(a)
    assert len(basis) == a.cols - to_sympy(rows).rank()
    for v in basis:
        assert (a @ v).is_zero()
    if basis:
        assert rank(RationalMatrix([list(v.col(0)) for v in basis])) == len(basis)


@settings(max_examples=100)
@given(int_matrices(5, 6))
def test_rref_matches_sympy(rows):
    mine, pivots = rref(RationalMatrix(rows))
    theirs, their_pivots = to_sympy(rows).rref()
    nonzero = [list(theirs.row(i)) for i in range(theirs.rows) if any(theirs.row(i))]
    assert list(pivots) == list(their_pivots)
    assert mine.tolist() == [[Fraction(int(x.p), int(x.q)) for x in r] for r in nonzero]


@settings(max_examples=100)
@given(int_matrices(5, 5), st.data())
def test_solve(rows, data):
    a = RationalMatrix(rows)
    x_true = [data.draw(st.integers(-3, 3)) for _ in range(a.cols)]
    b = RationalMatrix.column(mat_vec(a, x_true))
    x = solve(a, b)
    assert x is not None
    assert a @ x == b


def test_solve_inconsistent():
    a = RationalMatrix([[1, 1], [2, 2]])
    assert solve(a, RationalMatrix.column([1, 3])) is None
    zero_row = RationalMatrix([[0, 0], [1, 0]])
    assert solve(zero_row, RationalMatrix.column([1, 0])) is None


def test_row_reducer_incremental():
    red = RowReducer(4)
    assert red.add({0: Fraction(1), 1: Fraction(2)})
    assert red.add({1: Fraction(1), 3: Fraction(1)})
    assert not red.add({0: Fraction(1), 1: Fraction(3), 3: Fraction(1)})
    assert red.rank == 2
    assert red.contains({0: Fraction(2), 1: Fraction(4)})
    assert not red.contains({2: Fraction(1)})
    assert red.free_columns() == [2, 3]
    for v in red.nullspace():
        for row in red.rref_rows():
            assert sum(row.get(j, 0) * v.get(j, 0) for j in range(4)) == 0


def test_json_round_trip():
    m = RationalMatrix([[Fraction(-1, 3), 0], [2, Fraction(5, 7)]])
    blob = m.to_json()
    assert blob["rows"] == 2 and blob["cols"] == 2
    assert blob["entries"][0] == ["-1", "3"]
    assert RationalMatrix.from_json(blob) == m


def test_column_stack_and_mat_vec():
    m = column_stack([[1, 2], [3, 4], [5, 6]])
    assert m.tolist() == [[1, 3, 5], [2, 4, 6]]
    assert mat_vec(m, [1, 0, -1]) == (-4, -4)
    with pytest.raises(ShapeError):
        mat_vec(m, [1])


def test_hash_and_equality():
    a = RationalMatrix([[1, 2], [3, 4]])
    b = RationalMatrix([[Fraction(2, 2), 2], [3, 4]])
    assert a == b and hash(a) == hash(b)
    assert len({a, b}) == 1
