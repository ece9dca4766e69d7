"""Arithmetic over the prime field Z_p and dense residue matrices"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
import numpy.typing as npt

from dynsketch.errors import DynSketchError, ZeroInverseError

log = logging.getLogger(__name__)

ZpArray = npt.NDArray[np.object_]
MatrixLike = Union[Sequence[Sequence[int]], ZpArray]


@dataclass(frozen=True)
class FieldSpec:
    """Prime modulus and the seed from which all random evaluations are drawn"""

    p: int
    seed: int = 0

    MAX_MODULUS_BITS = 62
    """Residues are stored as unsigned 64-bit words, products never leave Python
    integers"""

    MILLER_RABIN_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    """Witness set that makes Miller-Rabin deterministic below 2**64"""

    def __post_init__(self) -> None:
        if not self.is_prime(self.p):
            raise DynSketchError(f"Field modulus {self.p} is not prime")
        if self.p.bit_length() > self.MAX_MODULUS_BITS:
            raise DynSketchError(
                f"Field modulus {self.p} exceeds {self.MAX_MODULUS_BITS} bits"
            )
        if not 0 <= self.seed < 2**64:
            raise DynSketchError(f"Seed {self.seed} is not a 64-bit unsigned value")

    @classmethod
    def choose(cls, n: int, delta: float | Fraction, seed: int = 0) -> FieldSpec:
        """Choose the smallest prime ``p >= ceil(2n / delta)``, so that a random
        evaluation of an ``n``-vertex Tutte matrix loses rank with probability at
        most ``n / p <= delta / 2``.

        :param n: number of vertices (matrix dimension), at least 1
        :param delta: failure probability, ``0 < delta < 1``; decimal values are
            interpreted exactly (``0.01`` is ``1/100``)
        :param seed: RNG seed carried along with the modulus
        :return: field specification
        :raises DynSketchError: parameters out of range
        """
        if n < 1:
            raise DynSketchError(f"Field size parameter n={n} must be positive")
        exact_delta = delta if isinstance(delta, Fraction) else Fraction(str(delta))
        if not 0 < exact_delta < 1:
            raise DynSketchError(f"Failure probability {delta} is not in (0, 1)")

        candidate = max(2, math.ceil(2 * n / exact_delta))
        while not cls.is_prime(candidate):
            candidate += 1
        log.debug("Chose prime %s for n=%s, delta=%s", candidate, n, delta)
        return cls(candidate, seed)

    @classmethod
    def is_prime(cls, value: int) -> bool:
        """Deterministic Miller-Rabin primality test, exact for ``value < 2**64``.

        :param value: integer to test
        :return: whether ``value`` is prime
        """
        if value < 2:
            return False
        for witness in cls.MILLER_RABIN_WITNESSES:
            if value % witness == 0:
                return value == witness

        odd, twos = value - 1, 0
        while odd % 2 == 0:
            odd, twos = odd // 2, twos + 1

        for witness in cls.MILLER_RABIN_WITNESSES:
            x = pow(witness, odd, value)
            if x in (1, value - 1):
                continue
            for _ in range(twos - 1):
                x = x * x % value
                if x == value - 1:
                    break
            else:
                return False
        return True

    def inv(self, a: int) -> int:
        """Multiplicative inverse in Z_p.

        :param a: residue to invert
        :return: ``b`` with ``a * b = 1 (mod p)``
        :raises ZeroInverseError: ``a`` is congruent to zero
        """
        if a % self.p == 0:
            raise ZeroInverseError(f"{a} has no inverse modulo {self.p}")
        return pow(a, -1, self.p)

    def rng(self) -> np.random.Generator:
        """Fresh generator seeded with :attr:`seed`; every consumer that needs
        reproducible draws creates its own.

        :return: seeded numpy generator
        """
        return np.random.default_rng(self.seed)

    def random_residues(self, rng: np.random.Generator, count: int) -> list[int]:
        """Draw residues uniformly from ``[0, p)``.

        :param rng: generator to draw from
        :param count: number of residues
        :return: residues as Python integers
        """
        draws: list[int] = rng.integers(
            0, self.p, size=count, dtype=np.int64
        ).tolist()
        return draws


class ZpMatrix:
    """Dense matrix of residues modulo a prime ``p``. Instances are immutable: every
    transformation returns a new matrix and leaves its input untouched.

    Entries are held in a numpy ``object`` array so that products of residues are
    exact Python integers for any modulus.
    """

    __slots__ = ("_p", "_data")

    def __init__(self, data: MatrixLike, p: int) -> None:
        """Build a matrix from rows of integers, reducing every entry modulo ``p``.

        :param data: sequence of equally long rows, or a two-dimensional array
        :param p: prime modulus
        :raises DynSketchError: rows are ragged or data is not two-dimensional
        """
        try:
            array = np.array(data, dtype=object)
        except ValueError as ex:
            raise DynSketchError(f"Ragged matrix rows: {ex}") from ex
        if array.size == 0 and array.ndim < 2:
            array = array.reshape(0, 0)
        if array.ndim != 2:
            raise DynSketchError(f"Matrix must be two-dimensional, got {array.shape}")
        reduce_entry = np.frompyfunc(lambda x: int(x) % p, 1, 1)
        self._p = p
        self._data: ZpArray = reduce_entry(array) if array.size else array

    @classmethod
    def _wrap(cls, array: ZpArray, p: int) -> ZpMatrix:
        """Wrap an already reduced object array without copying or validation"""
        matrix = cls.__new__(cls)
        matrix._p, matrix._data = p, array
        return matrix

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> ZpMatrix:
        """All-zero ``rows`` x ``cols`` matrix"""
        array: ZpArray = np.zeros((rows, cols), dtype=object)
        return cls._wrap(array, p)

    @classmethod
    def identity(cls, size: int, p: int) -> ZpMatrix:
        """``size`` x ``size`` identity matrix"""
        matrix = cls.zeros(size, size, p)
        np.fill_diagonal(matrix._data, 1)
        return matrix

    @classmethod
    def blocks(cls, grid: Sequence[Sequence[ZpMatrix]]) -> ZpMatrix:
        """Assemble a block matrix; blocks in a row must share the row count and
        blocks in a column the column count.

        :param grid: rows of blocks over the same modulus
        :return: assembled matrix
        """
        p = grid[0][0].p
        rows = [np.concatenate([b._data for b in row], axis=1) for row in grid]
        return cls._wrap(np.concatenate(rows, axis=0), p)

    @property
    def p(self) -> int:
        """Prime modulus"""
        return self._p

    @property
    def rows(self) -> int:
        """Row count"""
        return int(self._data.shape[0])

    @property
    def cols(self) -> int:
        """Column count"""
        return int(self._data.shape[1])

    def __getitem__(self, index: tuple[int, int]) -> int:
        return int(self._data[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ZpMatrix):
            return NotImplemented
        return (
            self._p == other._p
            and self._data.shape == other._data.shape
            and bool(np.array_equal(self._data, other._data))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"ZpMatrix({self.tolist()}, p={self._p})"

    def tolist(self) -> list[list[int]]:
        """Rows as nested lists of Python integers"""
        return [[int(x) for x in row] for row in self._data]

    def entries(self) -> list[int]:
        """Row-major entry buffer"""
        return [int(x) for x in self._data.ravel()]

    def __add__(self, other: ZpMatrix) -> ZpMatrix:
        if self._p != other._p or self._data.shape != other._data.shape:
            raise DynSketchError(
                f"Cannot add {self.rows}x{self.cols} mod {self._p} "
                f"to {other.rows}x{other.cols} mod {other._p}"
            )
        return self._wrap((self._data + other._data) % self._p, self._p)

    def mask(self, positions: Iterable[tuple[int, int]]) -> ZpMatrix:
        """Copy keeping only the listed entries, all others zeroed.

        :param positions: ``(row, col)`` pairs to keep
        :return: masked matrix
        """
        result = self.zeros(self.rows, self.cols, self._p)
        for position in positions:
            result._data[position] = self._data[position]
        return result

    def transpose(self) -> ZpMatrix:
        """Transposed copy"""
        return self._wrap(self._data.T.copy(), self._p)

    def submatrix(self, rows: slice, cols: slice) -> ZpMatrix:
        """Copy of a contiguous block.

        :param rows: row range
        :param cols: column range
        :return: block as a new matrix
        """
        return self._wrap(self._data[rows, cols].copy(), self._p)

    def select_columns(self, indices: Sequence[int], width: int) -> ZpMatrix:
        """Matrix of the listed columns followed by zero columns up to ``width``.

        :param indices: column indices to take, in order
        :param width: resulting column count, at least ``len(indices)``
        :return: selected and zero-padded columns
        """
        result = self.zeros(self.rows, width, self._p)
        if indices:
            result._data[:, : len(indices)] = self._data[:, list(indices)]
        return result

    def select_rows(self, indices: Sequence[int], height: int) -> ZpMatrix:
        """Matrix of the listed rows followed by zero rows up to ``height``"""
        return self.transpose().select_columns(indices, height).transpose()

    def rank(self) -> int:
        """Rank over Z_p by Gaussian elimination with first-nonzero pivoting.

        :return: matrix rank
        """
        return len(self._pivot_columns())

    def independent_columns(self, want: int) -> list[int]:
        """Greedy left-to-right maximal set of linearly independent columns, padded
        with the lowest-index unused columns until ``want`` indices are picked or
        the columns run out.

        :param want: number of columns the caller intends to keep
        :return: ascending column indices
        """
        chosen = self._pivot_columns()
        chosen_set = set(chosen)
        padding = (j for j in range(self.cols) if j not in chosen_set)
        for column in padding:
            if len(chosen) >= want:
                break
            chosen.append(column)
        return sorted(chosen)

    def _pivot_columns(self) -> list[int]:
        """Row-echelon reduction on a copy; the pivot columns are exactly the
        columns picked by a greedy left-to-right independence scan."""
        a = self._data.copy()
        p, r = self._p, 0
        pivots: list[int] = []
        for c in range(self.cols):
            if r == self.rows:
                break
            nonzero = [i for i in range(r, self.rows) if a[i, c] != 0]
            if not nonzero:
                continue
            self._swap_rows(a, r, nonzero[0])
            a[r, :] = a[r, :] * pow(int(a[r, c]), -1, p) % p
            below = a[r + 1 :, c].copy()
            a[r + 1 :, :] = (a[r + 1 :, :] - np.outer(below, a[r, :])) % p
            pivots.append(c)
            r += 1
        return pivots

    def diagonalize_block(self, start: int) -> tuple[ZpMatrix, int]:
        """Turn the trailing square block ``D = M[start:, start:]`` into
        ``diag(1, ..., 1, 0, ..., 0)`` with elementary operations that only combine
        rows and columns of ``D``; rows and columns with index below ``start`` are
        modified only through the induced changes in the off-diagonal blocks.

        :param start: first row/column index of ``D``; the matrix must be square
        :return: transformed matrix and ``r``, the rank of the original ``D``
        """
        if self.rows != self.cols:
            raise DynSketchError("Block diagonalization needs a square matrix")
        a, p, n = self._data.copy(), self._p, self.rows

        r = 0
        for t in range(start, n):
            pivot = self._first_nonzero(a, t)
            if pivot is None:
                break
            row, col = pivot
            self._swap_rows(a, t, row)
            self._swap_columns(a, t, col)

            a[t, :] = a[t, :] * pow(int(a[t, t]), -1, p) % p
            others = [i for i in range(start, n) if i != t]
            factors = a[others, t].copy()
            a[others, :] = (a[others, :] - np.outer(factors, a[t, :])) % p
            factors = a[t, others].copy()
            a[:, others] = (a[:, others] - np.outer(a[:, t], factors)) % p
            r += 1

        return self._wrap(a, p), r

    def eliminate_cross_blocks(self, k: int, r: int) -> ZpMatrix:
        """For a matrix laid out as ``[[A, X, B'], [Y, I_r, 0], [C', 0, 0]]`` with
        ``A`` of size ``k`` x ``k``, zero ``X`` by row operations against the
        identity rows and then ``Y`` by column operations; ``A`` accumulates
        ``-X Y``.

        :param k: size of the leading block ``A``
        :param r: size of the identity block
        :return: matrix ``[[A - X Y, 0, B'], [0, I_r, 0], [C', 0, 0]]``
        :raises DynSketchError: the identity block is not in place
        """
        a, p = self._data.copy(), self._p
        middle = slice(k, k + r)
        if not self._wrap(a[middle, middle], p) == self.identity(r, p):
            raise DynSketchError(f"Expected an identity block of size {r} at {k}")
        if r == 0:
            return self._wrap(a, p)

        x = a[:k, middle].copy()
        a[:k, :] = (a[:k, :] - x.dot(a[middle, :])) % p
        y = a[middle, :k].copy()
        a[:, :k] = (a[:, :k] - a[:, middle].dot(y)) % p
        return self._wrap(a, p)

    @staticmethod
    def _first_nonzero(a: ZpArray, t: int) -> tuple[int, int] | None:
        """First nonzero entry of ``a[t:, t:]`` in column order"""
        n = a.shape[0]
        for col in range(t, n):
            for row in range(t, n):
                if a[row, col] != 0:
                    return row, col
        return None

    @staticmethod
    def _swap_rows(a: ZpArray, i: int, j: int) -> None:
        if i != j:
            a[[i, j], :] = a[[j, i], :]

    @staticmethod
    def _swap_columns(a: ZpArray, i: int, j: int) -> None:
        if i != j:
            a[:, [i, j]] = a[:, [j, i]]

    def add_scaled_row(self, target: int, source: int, factor: int) -> ZpMatrix:
        """Elementary row operation ``row[target] += factor * row[source]``"""
        a = self._data.copy()
        a[target, :] = (a[target, :] + factor * a[source, :]) % self._p
        return self._wrap(a, self._p)

    def add_scaled_column(self, target: int, source: int, factor: int) -> ZpMatrix:
        """Elementary column operation ``col[target] += factor * col[source]``"""
        return self.transpose().add_scaled_row(target, source, factor).transpose()

    @classmethod
    def random_skew(
        cls,
        size: int,
        field: FieldSpec,
        rng: np.random.Generator,
        pairs: Iterable[tuple[int, int]] | None = None,
    ) -> ZpMatrix:
        """Random skew-symmetric matrix with zero diagonal, as a randomly evaluated
        Tutte matrix. Only ``pairs`` (``i < j``) are filled if given, otherwise every
        position above the diagonal.

        :param size: dimension
        :param field: modulus
        :param rng: generator consuming one draw per filled pair
        :param pairs: positions to fill, each ``(i, j)`` with ``i != j``
        :return: skew-symmetric matrix
        """
        if pairs is None:
            pairs = ((i, j) for i in range(size) for j in range(i + 1, size))
        ordered = sorted({(min(i, j), max(i, j)) for i, j in pairs if i != j})
        values = field.random_residues(rng, len(ordered))
        matrix = cls.zeros(size, size, field.p)
        for (i, j), value in zip(ordered, values):
            matrix._data[i, j] = value
            matrix._data[j, i] = (-value) % field.p
        return matrix
