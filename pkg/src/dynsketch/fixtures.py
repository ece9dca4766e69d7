"""Adversarial fixture graphs with predictable answers, and seeded random instances
for verification runs"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from dynsketch.errors import FixtureError
from dynsketch.graph import EdgeSpec, Graph, Query, TerminalCut

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MembershipGadget:
    """Matching fixture encoding a set ``S`` of elements ``1..N``, ``N = r^2``.

    Vertices are ``u = 0``, ``w = 1`` and four layers ``V1..V4`` of ``r`` vertices;
    ``V1`` is perfectly matched to ``V2`` and ``V3`` to ``V4``, and element ``e``
    with row-major position ``(i, j)`` joins ``V2[i]`` to ``V3[j]`` when in ``S``.
    Terminals are ``u``, ``w``, then ``V1`` and ``V4`` in order. The query of
    ``e`` joins ``u`` to ``V1[i]`` and ``V4[j]`` to ``w``; its maximum matching is
    ``2r + 1`` exactly when ``e`` is in ``S``, ``2r`` otherwise.
    """

    size: int
    members: frozenset[int]
    graph: Graph
    queries: Mapping[int, Query]

    @property
    def root(self) -> int:
        """Layer width ``r``"""
        return math.isqrt(self.size)

    def expected(self, element: int) -> int:
        """Maximum matching of the graph with the query of ``element`` inserted"""
        return 2 * self.root + int(element in self.members)

    @staticmethod
    def position(element: int, root: int) -> tuple[int, int]:
        """Row-major zero-based position of a one-based element"""
        return divmod(element - 1, root)

    @classmethod
    def generate(cls, size: int, members: Sequence[int]) -> MembershipGadget:
        """Build the fixture.

        :param size: universe size ``N``, a perfect square
        :param members: elements of ``S``, each in ``1..N``
        :return: fixture with one query per element
        :raises FixtureError: ``N`` is not a positive perfect square, or an
            element is outside ``1..N``
        """
        root = math.isqrt(size) if size > 0 else 0
        if root == 0 or root * root != size:
            raise FixtureError(f"Membership universe {size} is not a perfect square")
        chosen = frozenset(members)
        outside = sorted(e for e in chosen if not 1 <= e <= size)
        if outside:
            raise FixtureError(f"Elements {outside} outside 1..{size}")

        def layer(number: int, index: int) -> int:
            return 2 + (number - 1) * root + index

        edges: list[EdgeSpec] = [(layer(1, i), layer(2, i)) for i in range(root)]
        edges += [(layer(3, i), layer(4, i)) for i in range(root)]
        for element in sorted(chosen):
            row, column = cls.position(element, root)
            edges.append((layer(2, row), layer(3, column)))
        terminals = [0, 1]
        terminals += [layer(1, i) for i in range(root)]
        terminals += [layer(4, i) for i in range(root)]
        graph = Graph.build(4 * root + 2, edges, terminals)

        queries: dict[int, Query] = {}
        for element in range(1, size + 1):
            row, column = cls.position(element, root)
            queries[element] = Query.of([(0, 2 + row), (1, 2 + root + column)])
        log.debug("Membership fixture: N=%s, |S|=%s", size, len(chosen))
        return cls(size, chosen, graph, queries)


@dataclass(frozen=True)
class CutLbGadget:
    """Cut fixture encoding a bit vector ``v`` of length ``N = C(k', k'/2)``.

    Terminals are ``s``, ``q_1..q_k'`` and ``t``; the other vertices are
    ``u_1..u_k'`` and ``x_1..x_N``, one ``x_i`` per ``k'/2``-subset ``S_i`` of the
    ``q`` vertices in colexicographic order. All edges point towards ``t``:

    - ``q_j -> u_j`` with capacity ``N``,
    - ``x_i -> t`` with capacity ``1``,
    - ``x_i -> u_j`` with capacity ``1`` iff ``v_i = 1`` or ``q_j`` is not in
      ``S_i``, together with unit edges ``s -> x_i`` and ``u_j -> t``,
    - ``s -> t`` with capacity ``kN - m``, ``m`` being the number of ``x``-``u``
      edges and ``k = k' + 2`` the terminal count.

    The cut ``({s} + S_i, {t})`` then has value ``(k + 1)N - 1 + v_i``.

    Unlike the undirected form of this gadget, edges are directed and there are no
    capacity-``N`` edges ``s -> u_j``. The values still decode: each ``x_p`` can
    send its unit straight to ``t``, which frees one ``u_j -> t`` edge for a
    ``q_j`` in ``S_i``. Such a link exists for every ``p != i`` and, for
    ``p = i``, only when ``v_i = 1``; otherwise the source side
    ``{s} + S_i + {u_j : q_j in S_i} + {x_p : p != i}`` cuts ``(k + 1)N - 1``.
    The terminal capacity is ``C = k'N + (k + 1)N + m``.
    """

    half: int
    bits: tuple[int, ...]
    subsets: tuple[frozenset[int], ...]
    graph: Graph
    cuts: tuple[TerminalCut, ...]

    @property
    def q_count(self) -> int:
        """Number ``k'`` of ``q`` terminals"""
        return 2 * self.half

    @property
    def offset(self) -> int:
        """Profile offset ``c = (k + 1)N - 1``"""
        return (self.graph.k + 1) * len(self.bits) - 1

    @staticmethod
    def subsets_of(q_count: int) -> tuple[frozenset[int], ...]:
        """All ``k'/2``-subsets of ``1..k'`` in colexicographic order"""
        combos = itertools.combinations(range(1, q_count + 1), q_count // 2)
        return tuple(frozenset(c) for c in sorted(combos, key=lambda c: c[::-1]))

    @classmethod
    def generate(cls, q_count: int, bits: Sequence[int]) -> CutLbGadget:
        """Build the fixture.

        :param q_count: ``k'``, a positive even number
        :param bits: ``v``, one 0/1 entry per subset
        :return: fixture with the cut ``TC(S_i)`` per entry, over terminal indices
            ``s = 0``, ``q_j = j`` and ``t = k' + 1``
        :raises FixtureError: odd or nonpositive ``k'``, non-binary entries, or
            ``len(v) != C(k', k'/2)``
        """
        if q_count <= 0 or q_count % 2:
            raise FixtureError(f"Cut fixture needs a positive even k', got {q_count}")
        subsets = cls.subsets_of(q_count)
        size = len(subsets)
        if len(bits) != size:
            raise FixtureError(
                f"k'={q_count} needs a vector of {size} entries, got {len(bits)}"
            )
        if any(bit not in (0, 1) for bit in bits):
            raise FixtureError(f"Vector {list(bits)} is not binary")

        s, t = 0, q_count + 1

        def u(j: int) -> int:
            return q_count + 1 + j

        def x(i: int) -> int:
            return 2 * q_count + 2 + i

        k = q_count + 2
        edges: list[EdgeSpec] = [(j, u(j), size) for j in range(1, q_count + 1)]
        edges += [(x(i), t, 1) for i in range(size)]
        links = [
            (i, j)
            for i, subset in enumerate(subsets)
            for j in range(1, q_count + 1)
            if bits[i] == 1 or j not in subset
        ]
        for i, j in links:
            edges += [(x(i), u(j), 1), (s, x(i), 1), (u(j), t, 1)]
        edges.append((s, t, k * size - len(links)))

        graph = Graph.build(
            2 * q_count + 2 + size, edges, range(k), directed=True, source=s, sink=t
        )
        cuts = tuple(TerminalCut.of({0} | subset, {t}) for subset in subsets)
        log.debug("Cut fixture: k'=%s, N=%s, m=%s", q_count, size, len(links))
        return cls(q_count // 2, tuple(bits), subsets, graph, cuts)

    def check_output_profile(
        self, answer: Callable[[TerminalCut], int]
    ) -> tuple[int, ...]:
        """Recover the encoded vector from cut values.

        :param answer: terminal cut value of this fixture's graph, from a sketch or
            an oracle
        :return: value of every ``TC(S_i)`` minus the offset; equals :attr:`bits`
            when every answer is correct
        """
        recovered = tuple(answer(cut) - self.offset for cut in self.cuts)
        if any(bit not in (0, 1) for bit in recovered):
            log.warning("Output profile %s is not a bit vector", recovered)
        return recovered


class RandomInstances:
    """Seeded random graphs and queries. Every draw comes from one
    :func:`numpy.random.default_rng` stream, so a seed determines the sequence."""

    def __init__(self, seed: int) -> None:
        """Initialize the stream.

        :param seed: RNG seed
        """
        self._rng = np.random.default_rng(seed)

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in ``low..high`` inclusive"""
        return int(self._rng.integers(low, high + 1))

    def terminals(self, n: int, k: int) -> list[int]:
        """``k`` distinct vertices of ``0..n-1`` in random order"""
        return [int(v) for v in self._rng.choice(n, size=k, replace=False)]

    def _pairs(
        self, candidates: Sequence[tuple[int, int]], density: float
    ) -> list[tuple[int, int]]:
        keep = self._rng.random(len(candidates)) < density
        return [pair for pair, kept in zip(candidates, keep) if kept]

    def _weights(self, count: int, max_weight: int) -> list[int]:
        return [int(w) for w in self._rng.integers(1, max_weight + 1, size=count)]

    def undirected(self, n: int, k: int, density: float = 0.4) -> Graph:
        """Simple undirected graph with independent edges.

        :param n: vertex count
        :param k: terminal count
        :param density: probability of every vertex pair being an edge
        :return: unit-weight graph
        """
        pairs = self._pairs(list(itertools.combinations(range(n), 2)), density)
        return Graph.build(n, pairs, self.terminals(n, k))

    def directed(
        self, n: int, k: int, density: float = 0.3, *, max_capacity: int = 1
    ) -> Graph:
        """Simple directed graph with independent arcs and capacities, with a
        designated source and sink that are not terminals when ``n > k + 1``.

        :param n: vertex count, at least 2
        :param k: terminal count
        :param density: probability of every ordered pair being an arc
        :param max_capacity: capacities are uniform in ``1..max_capacity``
        :return: capacitated digraph
        """
        pairs = self._pairs(list(itertools.permutations(range(n), 2)), density)
        weights = self._weights(len(pairs), max_capacity)
        order = self.terminals(n, n)
        terminals = order[:k]
        source, sink = (order[k], order[k + 1]) if n > k + 1 else (order[0], order[1])
        return Graph.build(
            n,
            [(u, v, w) for (u, v), w in zip(pairs, weights)],
            terminals,
            directed=True,
            source=source,
            sink=sink,
        )

    def capacitated(
        self, n: int, k: int, density: float = 0.3, *, max_capacity: int = 3
    ) -> Graph:
        """:meth:`directed` with capacities above one"""
        return self.directed(n, k, density, max_capacity=max_capacity)

    def weighted(
        self,
        n: int,
        k: int,
        density: float = 0.3,
        *,
        max_weight: int = 20,
        directed: bool = False,
    ) -> Graph:
        """Graph with uniform integer weights, possibly disconnected. A directed
        graph gets a source and sink chosen among its terminals.

        :param n: vertex count
        :param k: terminal count
        :param density: edge probability per vertex pair
        :param max_weight: weights are uniform in ``1..max_weight``
        :param directed: draw ordered pairs
        :return: weighted graph
        """
        if directed:
            candidates = list(itertools.permutations(range(n), 2))
        else:
            candidates = list(itertools.combinations(range(n), 2))
        pairs = self._pairs(candidates, density)
        weights = self._weights(len(pairs), max_weight)
        terminals = self.terminals(n, k)
        source: int | None = None
        sink: int | None = None
        if directed and k >= 2:
            source, sink = terminals[0], terminals[1]
        return Graph.build(
            n,
            [(u, v, w) for (u, v), w in zip(pairs, weights)],
            terminals,
            directed=directed,
            source=source,
            sink=sink,
        )

    def bipartite(self, left: int, right: int, k: int, density: float = 0.4) -> Graph:
        """Undirected bipartite graph between ``0..left-1`` and the next ``right``
        vertices"""
        candidates = list(itertools.product(range(left), range(left, left + right)))
        pairs = self._pairs(candidates, density)
        return Graph.build(left + right, pairs, self.terminals(left + right, k))

    def query(
        self, k: int, *, directed: bool, max_size: int, max_weight: int = 1
    ) -> Query:
        """Random query of at most ``max_size`` distinct terminal pairs.

        :param k: terminal count
        :param directed: draw ordered pairs
        :param max_size: bound on the number of edges
        :param max_weight: weights are uniform in ``1..max_weight``
        :return: query
        """
        pairs = sorted(Query.all_pairs(k, directed=directed).pairs())
        size = self.integer(0, min(max_size, len(pairs)))
        picked = sorted(int(i) for i in self._rng.choice(len(pairs), size, False))
        weights = self._weights(size, max_weight)
        return Query.of(
            [(*pairs[i], w) for i, w in zip(picked, weights)], directed=directed
        )

    def bits(self, size: int) -> list[int]:
        """Uniform bit vector"""
        return [int(b) for b in self._rng.integers(0, 2, size=size)]

    def subset(self, size: int) -> list[int]:
        """Uniform subset of ``1..size``"""
        return [e for e, bit in enumerate(self.bits(size), start=1) if bit]
