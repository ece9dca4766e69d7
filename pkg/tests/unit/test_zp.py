"""FieldSpec and ZpMatrix unit tests"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsketch.errors import DynSketchError, ZeroInverseError
from dynsketch.zp import FieldSpec, ZpMatrix

from ..strategies import integer_matrices

MERSENNE_31 = 2**31 - 1


def rational_rank(rows: list[list[int]]) -> int:
    """Rank by exact elimination over the rationals"""
    matrix = [[Fraction(x) for x in row] for row in rows]
    rank, cols = 0, len(matrix[0]) if matrix else 0
    for col in range(cols):
        pivot = next((i for i in range(rank, len(matrix)) if matrix[i][col]), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        for i in range(len(matrix)):
            if i != rank and matrix[i][col]:
                factor = matrix[i][col] / matrix[rank][col]
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[rank])]
        rank += 1
    return rank


@pytest.mark.parametrize(
    "n, delta, expected", [(1, 0.5, 5), (10, 0.01, 2003), (100, 0.5, 401)]
)
def test_choose_prime(n: int, delta: float, expected: int) -> None:
    """Smallest prime at least ``ceil(2n / delta)``"""
    field = FieldSpec.choose(n, delta, seed=7)
    assert field.p == expected and field.seed == 7
    assert FieldSpec.choose(n, Fraction(str(delta))).p == expected


@pytest.mark.parametrize("n, delta", [(0, 0.5), (-3, 0.5), (5, 0.0), (5, 1.0)])
def test_choose_prime_invalid(n: int, delta: float) -> None:
    """Vertex count and failure probability are range-checked"""
    with pytest.raises(DynSketchError):
        FieldSpec.choose(n, delta)


@pytest.mark.parametrize(
    "value, expected",
    [
        (0, False),
        (1, False),
        (2, True),
        (37, True),
        (561, False),
        (2003, True),
        (2001, False),
        (MERSENNE_31, True),
        (2**61 - 1, True),
        ((2**31 - 1) * (2**19 - 1), False),
    ],
)
def test_is_prime(value: int, expected: bool) -> None:
    """Primality on small numbers, a Carmichael number and Mersenne primes"""
    assert FieldSpec.is_prime(value) == expected


@pytest.mark.parametrize("p, seed", [(2001, 0), (2**89 - 1, 0), (7, -1), (7, 2**64)])
def test_field_spec_invalid(p: int, seed: int) -> None:
    """Composite or oversized moduli and out-of-range seeds are rejected"""
    with pytest.raises(DynSketchError):
        FieldSpec(p, seed)


@pytest.mark.parametrize("a, expected", [(1, 1), (3, 5), (6, 6), (10, 5)])
def test_inv(a: int, expected: int) -> None:
    """Inverses modulo 7, residues above ``p`` included"""
    assert FieldSpec(7).inv(a) == expected


def test_inv_random() -> None:
    """Multiplying back yields one"""
    field = FieldSpec(2003)
    for a in random.Random(1).sample(range(1, 2003), 1000):
        assert a * field.inv(a) % 2003 == 1


@pytest.mark.parametrize("a", [0, 7, -14])
def test_inv_zero(a: int) -> None:
    """Zero has no inverse, and the error is also a ZeroDivisionError"""
    with pytest.raises(ZeroInverseError):
        FieldSpec(7).inv(a)
    with pytest.raises(ZeroDivisionError):
        FieldSpec(7).inv(a)


def test_random_residues_reproducible() -> None:
    """Equal seeds draw equal residues within range"""
    field = FieldSpec(401, seed=3)
    first = field.random_residues(field.rng(), 50)
    assert first == field.random_residues(field.rng(), 50)
    assert all(0 <= x < 401 for x in first)


def test_matrix_reduction_and_shape() -> None:
    """Entries are reduced on construction; empty input is a 0x0 matrix"""
    matrix = ZpMatrix([[8, -1], [14, 3]], 7)
    assert matrix.tolist() == [[1, 6], [0, 3]]
    assert (matrix.rows, matrix.cols) == (2, 2)
    assert matrix[0, 1] == 6
    assert matrix.entries() == [1, 6, 0, 3]
    empty = ZpMatrix([], 7)
    assert (empty.rows, empty.cols) == (0, 0) and empty.rank() == 0


@pytest.mark.parametrize("data", [[[1, 2], [3]], [1, 2, 3]])
def test_matrix_malformed(data: list[list[int]] | list[int]) -> None:
    """Ragged rows and one-dimensional data are rejected"""
    with pytest.raises(DynSketchError):
        ZpMatrix(data, 7)  # type: ignore[arg-type]


def test_matrix_immutable_operations() -> None:
    """Transformations leave their input untouched"""
    matrix = ZpMatrix([[1, 2], [3, 4]], 7)
    before = matrix.tolist()
    matrix.transpose()
    matrix.add_scaled_row(0, 1, 3)
    matrix.add_scaled_column(1, 0, 2)
    matrix.diagonalize_block(0)
    matrix.rank()
    assert matrix.tolist() == before
    assert matrix.transpose().tolist() == [[1, 3], [2, 4]]
    assert matrix.add_scaled_row(0, 1, 3).tolist() == [[3, 0], [3, 4]]
    assert matrix.add_scaled_column(1, 0, 2).tolist() == [[1, 4], [3, 3]]


def test_matrix_add_and_equality() -> None:
    """Sum is entry-wise modulo ``p``; shapes and moduli must agree"""
    a, b = ZpMatrix([[6, 1]], 7), ZpMatrix([[2, 6]], 7)
    assert a + b == ZpMatrix([[1, 0]], 7)
    assert a != ZpMatrix([[6, 1]], 11)
    assert a != [[6, 1]]
    with pytest.raises(DynSketchError):
        _ = a + ZpMatrix([[1], [2]], 7)
    with pytest.raises(DynSketchError):
        _ = a + ZpMatrix([[1, 2]], 11)


def test_blocks_and_selection() -> None:
    """Block assembly, masking and zero-padded selections"""
    one, two = ZpMatrix.identity(2, 5), ZpMatrix([[2, 2], [2, 2]], 5)
    zeros = ZpMatrix.zeros(2, 2, 5)
    grid = ZpMatrix.blocks([[one, two], [zeros, one]])
    assert grid.tolist() == [[1, 0, 2, 2], [0, 1, 2, 2], [0, 0, 1, 0], [0, 0, 0, 1]]
    assert grid.mask([(0, 2), (3, 3)]).entries().count(0) == 14
    assert grid.submatrix(slice(0, 2), slice(2, 4)) == two
    assert grid.select_columns([3], 2).tolist() == [[2, 0], [2, 0], [0, 0], [1, 0]]
    assert grid.select_rows([], 2) == ZpMatrix.zeros(2, 4, 5)


@pytest.mark.parametrize(
    "rows, p, expected",
    [
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 7, 3),
        ([[0, 0], [0, 0]], 7, 0),
        ([[1, 2], [2, 4]], 7, 1),
        ([[1, 2], [3, 4]], 2, 1),
        ([[1, 2], [3, 4]], 3, 2),
    ],
)
def test_rank(rows: list[list[int]], p: int, expected: int) -> None:
    """Rank of identity, zero and dependent matrices"""
    assert ZpMatrix(rows, p).rank() == expected


@given(integer_matrices())
@settings(max_examples=60)
def test_rank_matches_rational_rank(rows: list[list[int]]) -> None:
    """Minors of small matrices stay below a 31-bit prime, so the ranks agree"""
    matrix = ZpMatrix(rows, MERSENNE_31)
    assert matrix.rank() == rational_rank(rows) == matrix.transpose().rank()


@given(
    integer_matrices(max_rows=5, max_cols=5, bound=400),
    st.lists(
        st.tuples(st.booleans(), st.integers(0, 4), st.integers(0, 4), st.integers()),
        max_size=12,
    ),
)
@settings(max_examples=60)
def test_rank_invariant_under_elementary_operations(
    rows: list[list[int]], operations: list[tuple[bool, int, int, int]]
) -> None:
    """Adding multiples of other rows or columns preserves the rank"""
    matrix = ZpMatrix(rows, 401)
    rank = matrix.rank()
    for on_rows, target, source, factor in operations:
        size = matrix.rows if on_rows else matrix.cols
        target, source = target % size, source % size
        if target == source:
            continue
        if on_rows:
            matrix = matrix.add_scaled_row(target, source, factor)
        else:
            matrix = matrix.add_scaled_column(target, source, factor)
    assert matrix.rank() == rank


def test_diagonalize_identity_and_zero() -> None:
    """An identity block is kept, a zero block has rank zero"""
    identity = ZpMatrix.identity(4, 11)
    assert identity.diagonalize_block(0) == (identity, 4)
    zeros = ZpMatrix.zeros(3, 3, 11)
    assert zeros.diagonalize_block(0) == (zeros, 0)
    with pytest.raises(DynSketchError):
        ZpMatrix.zeros(2, 3, 11).diagonalize_block(0)


@pytest.mark.parametrize("seed", range(5))
def test_diagonalize_random_block(seed: int) -> None:
    """The trailing block becomes ``diag(I_r, 0)`` with ``r = rank(D)``, the leading
    block is untouched and the total rank is preserved"""
    rng = np.random.default_rng(seed)
    k, size = 2, 8
    data = rng.integers(0, 401, size=(size, size)).tolist()
    data[4][:] = data[3][:]
    matrix = ZpMatrix(data, 401)
    block = matrix.submatrix(slice(k, size), slice(k, size))

    result, r = matrix.diagonalize_block(k)
    assert r == block.rank() < size - k
    expected_block = [
        [int(i == j and i < r) for j in range(size - k)] for i in range(size - k)
    ]
    assert result.submatrix(slice(k, size), slice(k, size)).tolist() == expected_block
    assert result.submatrix(slice(0, k), slice(0, k)) == matrix.submatrix(
        slice(0, k), slice(0, k)
    )
    assert result.rank() == matrix.rank()


def test_eliminate_cross_blocks_single() -> None:
    """``[[a, c], [y, 1]]`` becomes ``[[a - c y, 0], [0, 1]]``"""
    matrix = ZpMatrix([[2, 3], [4, 1]], 7)
    assert matrix.eliminate_cross_blocks(1, 1).tolist() == [[4, 0], [0, 1]]


def test_eliminate_cross_blocks_noop() -> None:
    """Zero cross blocks, and an empty identity block, change nothing"""
    matrix = ZpMatrix([[3, 0, 5], [0, 1, 0], [6, 0, 0]], 7)
    assert matrix.eliminate_cross_blocks(1, 1) == matrix
    assert matrix.eliminate_cross_blocks(3, 0) == matrix
    with pytest.raises(DynSketchError):
        ZpMatrix([[3, 0], [0, 2]], 7).eliminate_cross_blocks(1, 1)


@pytest.mark.parametrize("seed", range(5))
def test_reduction_chain_preserves_rank(seed: int) -> None:
    """Diagonalization followed by cross elimination preserves the rank and zeroes
    both cross blocks"""
    rng = np.random.default_rng(seed)
    k, size = 3, 9
    matrix = ZpMatrix(rng.integers(0, 401, size=(size, size)).tolist(), 401)
    diagonalized, r = matrix.diagonalize_block(k)
    eliminated = diagonalized.eliminate_cross_blocks(k, r)
    assert eliminated.rank() == matrix.rank()
    middle = slice(k, k + r)
    assert set(eliminated.submatrix(slice(0, k), middle).entries()) <= {0}
    assert set(eliminated.submatrix(middle, slice(0, k)).entries()) <= {0}


@pytest.mark.parametrize(
    "rows, want, expected",
    [
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3, [0, 1, 2]),
        ([[1, 2, 0], [0, 0, 1]], 2, [0, 2]),
        ([[0, 0, 0], [0, 0, 0]], 2, [0, 1]),
        ([[1, 2, 0], [0, 0, 1]], 0, [0, 2]),
        ([[1, 1], [1, 1]], 5, [0, 1]),
    ],
)
def test_independent_columns(
    rows: list[list[int]], want: int, expected: list[int]
) -> None:
    """Greedy independent columns padded by the lowest unused ones"""
    assert ZpMatrix(rows, 7).independent_columns(want) == expected


@pytest.mark.parametrize("seed", range(5))
def test_independent_columns_random(seed: int) -> None:
    """Selected columns span the column space"""
    rng = np.random.default_rng(seed)
    matrix = ZpMatrix(rng.integers(0, 3, size=(5, 8)).tolist(), 401)
    chosen = matrix.independent_columns(0)
    assert matrix.select_columns(chosen, len(chosen)).rank() == matrix.rank()
    assert len(chosen) == matrix.rank()


def test_random_skew() -> None:
    """Skew-symmetric with zero diagonal; only the listed pairs are filled"""
    field = FieldSpec(401, seed=5)
    full = ZpMatrix.random_skew(5, field, field.rng())
    sparse = ZpMatrix.random_skew(5, field, field.rng(), [(3, 1), (1, 3), (2, 2)])
    for matrix in (full, sparse):
        assert matrix + matrix.transpose() == ZpMatrix.zeros(5, 5, 401)
    assert [sparse[i, j] != 0 for i, j in ((0, 1), (2, 2))] == [False, False]
    assert sparse.entries().count(0) >= 23
    assert full == ZpMatrix.random_skew(5, field, field.rng())
