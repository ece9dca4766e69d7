"""Dynamic sketch for maximum matching size under terminal edge insertions, based on
the rank of a randomly evaluated Tutte matrix.

The evaluated Tutte matrix of the static graph is laid out with terminals first::

    M = [[A, B],
         [C, D]]

Elementary operations confined to the rows and columns of ``D`` turn it into
``diag(I_r, 0)``, the rows and columns crossing the identity are eliminated into
the correction ``A'`` of the terminal block, and ``k`` independent columns of what
remains of ``B`` (rows of ``C``) are kept. Inserting terminal edges only touches the
terminal block, so the ``2k`` x ``2k`` matrix ``[[A_Q + A', B''], [C'', 0]]`` has rank
``rank(M_Q) - r``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, Sequence

from dynsketch.errors import ContainerError, InvalidGraphError, InvalidQueryError
from dynsketch.graph import Graph, Query
from dynsketch.zp import FieldSpec, ZpMatrix

log = logging.getLogger(__name__)


class TutteLayout:
    """Bijection between vertex ids and Tutte matrix indices: terminals occupy
    indices ``0..k-1`` in terminal order, non-terminals follow in ascending id
    order"""

    def __init__(self, n: int, terminals: Sequence[int]) -> None:
        """Lay out ``n`` vertices.

        :param n: vertex count
        :param terminals: terminal vertices in index order
        """
        terminal_set = set(terminals)
        self._order = list(terminals) + [v for v in range(n) if v not in terminal_set]
        self._index = {vertex: index for index, vertex in enumerate(self._order)}
        self.k = len(terminals)

    def __len__(self) -> int:
        return len(self._order)

    def index(self, vertex: int) -> int:
        """Matrix index of a vertex"""
        return self._index[vertex]

    def vertex(self, index: int) -> int:
        """Vertex at a matrix index"""
        return self._order[index]


@dataclass(frozen=True)
class MatchingReduction:
    """Intermediate matrices of sketch compression, kept for instrumented checks:
    the evaluated Tutte matrix, the matrix after ``D`` is diagonalized, and after
    the cross blocks are eliminated"""

    layout: TutteLayout
    evaluated: ZpMatrix
    diagonalized: ZpMatrix
    eliminated: ZpMatrix
    r: int
    a_hat: ZpMatrix


@dataclass(frozen=True)
class MatchingSketch:
    """Sketch ``(r, A_hat, A', B'', C'')`` answering maximum matching size for any
    set of inserted terminal edges"""

    k: int
    field: FieldSpec
    r: int
    a_hat: ZpMatrix
    a_prime: ZpMatrix
    b_dd: ZpMatrix
    c_dd: ZpMatrix

    TAG: ClassVar[bytes] = b"MAT1"
    HEADER_WORDS: ClassVar[int] = 6
    """Container magic and tag, format version, ``k``, ``p``, seed and ``r``"""

    def __post_init__(self) -> None:
        for name in ("a_hat", "a_prime", "b_dd", "c_dd"):
            matrix: ZpMatrix = getattr(self, name)
            if (matrix.rows, matrix.cols) != (self.k, self.k):
                raise InvalidGraphError(
                    f"Sketch matrix {name} is {matrix.rows}x{matrix.cols}, "
                    f"expected {self.k}x{self.k}"
                )
            if matrix.p != self.field.p:
                raise InvalidGraphError(f"Sketch matrix {name} not mod {self.field.p}")

    @staticmethod
    def reduce(graph: Graph, field: FieldSpec) -> MatchingReduction:
        """Evaluate the Tutte matrix of an undirected graph at random points and
        bring it into the reduced block form.

        Static edges (terminal-terminal ones included) take one random value per
        distinct vertex pair in the evaluated matrix, then ``k(k-1)/2`` values are
        drawn for ``A_hat`` from the same generator. Static terminal-terminal values
        stay in the terminal block and end up in ``A'``.

        :param graph: undirected graph
        :param field: modulus and seed
        :return: all intermediate stages
        :raises InvalidGraphError: graph is directed
        """
        if graph.directed:
            raise InvalidGraphError("Matching sketch needs an undirected graph")
        layout = TutteLayout(graph.n, graph.terminals)
        k, rng = graph.k, field.rng()

        pairs = [(layout.index(e.u), layout.index(e.v)) for e in graph.edges]
        evaluated = ZpMatrix.random_skew(len(layout), field, rng, pairs)
        a_hat = ZpMatrix.random_skew(k, field, rng)

        diagonalized, r = evaluated.diagonalize_block(k)
        eliminated = diagonalized.eliminate_cross_blocks(k, r)
        log.debug("Reduced Tutte matrix of size %s, rank(D) = %s", len(layout), r)
        return MatchingReduction(layout, evaluated, diagonalized, eliminated, r, a_hat)

    @classmethod
    def compress(
        cls, graph: Graph, delta: float | Fraction, seed: int = 0
    ) -> MatchingSketch:
        """Build the sketch of an undirected graph.

        :param graph: undirected graph; ``k = 0`` is accepted and yields a sketch
            answering only the empty query
        :param delta: per-query failure probability, ``0 < delta < 1``
        :param seed: RNG seed
        :return: sketch; identical inputs yield identical sketches
        :raises InvalidGraphError: graph is directed
        """
        field = FieldSpec.choose(max(graph.n, 1), delta, seed)
        reduction = cls.reduce(graph, field)
        k, r, reduced = graph.k, reduction.r, reduction.eliminated
        n = reduced.rows

        a_prime = reduced.submatrix(slice(0, k), slice(0, k))
        b_prime = reduced.submatrix(slice(0, k), slice(k + r, n))
        c_prime = reduced.submatrix(slice(k + r, n), slice(0, k))

        columns = b_prime.independent_columns(k)[:k]
        rows = c_prime.transpose().independent_columns(k)[:k]
        if log.isEnabledFor(logging.DEBUG):
            log.debug("Kept B' columns %s and C' rows %s", columns, rows)

        sketch = cls(
            k,
            field,
            r,
            reduction.a_hat,
            a_prime,
            b_prime.select_columns(columns, k),
            c_prime.select_rows(rows, k),
        )
        log.info(
            "Built matching sketch: n=%s, k=%s, p=%s, r=%s", graph.n, k, field.p, r
        )
        return sketch

    def extraction_rank(self, query: Query) -> int:
        """``rank(M_hat) + r`` for a query, which equals twice the matching size
        unless extraction failed.

        :param query: undirected query over terminal indices
        :return: rank sum
        :raises InvalidQueryError: directed query or index out of range
        """
        if query.directed:
            raise InvalidQueryError("Matching queries are undirected")
        query.validate(self.k)
        positions = [pos for e in query for pos in ((e.i, e.j), (e.j, e.i))]
        top_left = self.a_hat.mask(positions) + self.a_prime
        m_hat = ZpMatrix.blocks(
            [
                [top_left, self.b_dd],
                [self.c_dd, ZpMatrix.zeros(self.k, self.k, self.field.p)],
            ]
        )
        return m_hat.rank() + self.r

    def extract(self, query: Query) -> int:
        """Maximum matching size of ``G^Q``, correct with probability at least
        ``1 - delta``.

        :param query: undirected query over terminal indices
        :return: matching size
        :raises InvalidQueryError: directed query or index out of range
        """
        total = self.extraction_rank(query)
        if total % 2:
            log.warning("Odd extraction rank %s, evaluation point was unlucky", total)
        return total // 2

    def sketch_size_words(self) -> int:
        """Exact serialized size in 64-bit words"""
        return self.HEADER_WORDS + 4 * self.k**2

    def to_words(self) -> list[int]:
        """Container payload: ``k``, ``p``, seed, ``r``, then ``A_hat``, ``A'``,
        ``B''``, ``C''`` row-major"""
        words = [self.k, self.field.p, self.field.seed, self.r]
        for matrix in (self.a_hat, self.a_prime, self.b_dd, self.c_dd):
            words += matrix.entries()
        return words

    @classmethod
    def from_words(cls, words: Sequence[int]) -> tuple[MatchingSketch, int]:
        """Parse a payload produced by :meth:`to_words`, possibly followed by
        other data.

        :param words: payload words
        :return: sketch and the number of words consumed
        :raises ContainerError: truncated or inconsistent payload
        """
        if len(words) < 4:
            raise ContainerError("Truncated matching sketch header")
        k, p, seed, r = (int(word) for word in words[:4])
        size = 4 + 4 * k * k
        if len(words) < size:
            raise ContainerError(
                f"Matching sketch with k={k} needs {size} words, got {len(words)}"
            )
        try:
            field = FieldSpec(p, seed)
        except ValueError as ex:
            raise ContainerError(f"Corrupt field parameters: {ex}") from ex

        def matrix(block: int) -> ZpMatrix:
            start = 4 + block * k * k
            entries = [int(word) for word in words[start : start + k * k]]
            return ZpMatrix([entries[i * k : (i + 1) * k] for i in range(k)], p)

        return cls(k, field, r, *(matrix(block) for block in range(4))), size
