"""Dynamic sketch for s-t edge connectivity of a digraph under terminal edge
insertions, answered by one matching extraction on a bipartite graph built over
the graph with every possible terminal edge inserted"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, Sequence

from dynsketch.errors import ContainerError, InvalidGraphError, InvalidQueryError
from dynsketch.graph import Edge, Graph, Query
from dynsketch.matching import MatchingSketch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StconnGadget:
    """Bipartite graph ``G'`` over ``G`` with all terminal pairs inserted.

    Terminal pair ``l`` (ordered pairs in lexicographic order) owns the gadget
    terminals ``4l`` (``e-``), ``4l + 1`` (``e+``), ``4l + 2`` (``e^-``) and
    ``4l + 3`` (``e^+``); the last two are isolated in ``G'``.
    """

    graph: Graph
    m: int
    """Static edges owning both ``e-`` and ``e+``, i.e. not incident on ``s``
    or ``t``"""
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, graph: Graph) -> StconnGadget:
        """Build the gadget of a normalized graph (see :meth:`StconnSketch.normalize`).

        :param graph: directed graph with designated ``s`` and ``t``, no edge into
            ``s``, out of ``t`` or from ``s`` to ``t``, neither being a terminal
        :return: gadget
        :raises InvalidGraphError: graph is not normalized
        """
        s, t = graph.source, graph.sink
        if not graph.directed or s is None or t is None:
            raise InvalidGraphError("Connectivity gadget needs a directed s-t graph")
        if s in graph.terminals or t in graph.terminals:
            raise InvalidGraphError("Graph is not normalized: s or t is a terminal")
        if any(e.v == s or e.u == t for e in graph.edges):
            raise InvalidGraphError("Graph is not normalized: edge into s or out of t")

        pairs = Query.all_pairs(graph.k, directed=True).pairs()
        ordered = tuple(sorted(pairs))
        inserted = [Edge(graph.terminals[i], graph.terminals[j]) for i, j in ordered]
        minus = {("q", pos): 4 * pos for pos in range(len(ordered))}
        plus = {("q", pos): 4 * pos + 1 for pos in range(len(ordered))}
        next_vertex = 4 * len(ordered)

        edges: list[tuple[int, int]] = []
        m = 0
        for pos, edge in enumerate(graph.edges):
            key = ("e", pos)
            if edge.u != s:
                minus[key], next_vertex = next_vertex, next_vertex + 1
            if edge.v != t:
                plus[key], next_vertex = next_vertex, next_vertex + 1
            if key in minus and key in plus:
                edges.append((minus[key], plus[key]))
                m += 1

        entering: dict[int, list[tuple[str, int]]] = {}
        leaving: dict[int, list[tuple[str, int]]] = {}
        keyed = [(("e", pos), e) for pos, e in enumerate(graph.edges)]
        keyed += [(("q", pos), e) for pos, e in enumerate(inserted)]
        for key, edge in keyed:
            leaving.setdefault(edge.u, []).append(key)
            entering.setdefault(edge.v, []).append(key)
        for vertex, into in entering.items():
            edges += [
                (plus[e1], minus[e2]) for e1 in into for e2 in leaving.get(vertex, [])
            ]

        gadget = Graph.build(next_vertex, edges, range(4 * len(ordered)))
        log.debug(
            "Connectivity gadget: %s vertices, %s edges, m=%s",
            gadget.n,
            gadget.m,
            m,
        )
        return cls(gadget, m, ordered)


@dataclass(frozen=True)
class StconnSketch:
    """Sketch answering the s-t edge connectivity of ``G^Q`` for any set ``Q`` of
    ordered terminal pairs"""

    inner: MatchingSketch
    k: int
    m: int

    TAG: ClassVar[bytes] = b"STC1"
    HEADER_WORDS: ClassVar[int] = 8
    """Container magic and tag, format version, ``k``, ``m`` and the matching
    sketch header"""

    @staticmethod
    def normalize(graph: Graph, *, max_expanded_edges: int = 100_000) -> Graph:
        """Equivalent graph whose s-t connectivity under any query is unchanged, with
        no edge into ``s``, out of ``t`` or directly from ``s`` to ``t``, and with
        non-terminal endpoints.

        Capacities are expanded into parallel edges. A terminal ``s`` is fed by a
        fresh source through ``d+(s) + k - 1`` two-edge paths, its out-degree once
        every terminal edge is inserted; a terminal ``t`` drains symmetrically.
        Direct ``s -> t`` edges are subdivided.

        :param graph: graph with designated ``s`` and ``t`` and at least one
            terminal; undirected edges count in both directions
        :param max_expanded_edges: bound on the expanded edge count
        :return: normalized directed graph, same terminals
        :raises InvalidGraphError: no terminals, or ``s`` or ``t`` missing
        """
        s, t = graph.source, graph.sink
        if s is None or t is None:
            raise InvalidGraphError("Connectivity sketch needs designated s and t")
        if graph.k == 0:
            raise InvalidGraphError("Connectivity sketch needs at least one terminal")

        directed = graph.to_directed().without_self_loops()
        directed = directed.expand_capacities(max_expanded_edges)
        kept = [(e.u, e.v) for e in directed.edges if e.v != s and e.u != t]

        n = graph.n
        edges: list[tuple[int, int]] = []
        for u, v in kept:
            if (u, v) == (s, t):
                edges += [(s, n), (n, t)]
                n += 1
            else:
                edges.append((u, v))

        source, sink = s, t
        if s in graph.terminals:
            width = sum(1 for u, _ in edges if u == s) + graph.k - 1
            source, n = n, n + 1
            for _ in range(width):
                edges += [(source, n), (n, s)]
                n += 1
        if t in graph.terminals:
            width = sum(1 for _, v in edges if v == t) + graph.k - 1
            sink, n = n, n + 1
            for _ in range(width):
                edges += [(t, n), (n, sink)]
                n += 1

        log.debug("Normalized s-t graph: %s -> %s vertices", graph.n, n)
        return Graph.build(
            n, edges, graph.terminals, directed=True, source=source, sink=sink
        )

    @classmethod
    def build_gadget(
        cls, graph: Graph, *, max_expanded_edges: int = 100_000
    ) -> StconnGadget:
        """Normalize a graph and build its gadget.

        :param graph: graph with designated ``s`` and ``t``
        :param max_expanded_edges: bound on the expanded edge count
        :return: gadget
        """
        normalized = cls.normalize(graph, max_expanded_edges=max_expanded_edges)
        return StconnGadget.build(normalized)

    @classmethod
    def compress(
        cls,
        graph: Graph,
        delta: float | Fraction,
        seed: int = 0,
        *,
        max_expanded_edges: int = 100_000,
    ) -> StconnSketch:
        """Build the sketch.

        :param graph: graph with designated ``s`` and ``t`` and ``k >= 1`` terminals
        :param delta: per-query failure probability
        :param seed: RNG seed
        :param max_expanded_edges: bound on the expanded edge count
        :return: sketch
        :raises InvalidGraphError: no terminals, or ``s`` or ``t`` missing
        """
        gadget = cls.build_gadget(graph, max_expanded_edges=max_expanded_edges)
        inner = MatchingSketch.compress(gadget.graph, delta, seed)
        log.info(
            "Built connectivity sketch: k=%s, %s gadget terminals",
            graph.k,
            gadget.graph.k,
        )
        return cls(inner, graph.k, gadget.m)

    @property
    def pair_count(self) -> int:
        """Number of ordered terminal pairs"""
        return self.k * (self.k - 1)

    def baseline(self, query: Query) -> int:
        """Size of the matching that pairs every edge with its own half and every
        absent terminal edge with its isolated halves, ``m + 2|Q_all| - |Q|``"""
        return self.m + 2 * self.pair_count - len(query)

    def gadget_query(self, query: Query) -> Query:
        """Gadget query: ``e-`` to ``e+`` for inserted pairs, ``e-`` to ``e^+`` and
        ``e+`` to ``e^-`` for the others.

        :param query: directed query over terminal indices
        :return: undirected query over gadget terminals
        :raises InvalidQueryError: undirected query or index out of range
        """
        if not query.directed:
            raise InvalidQueryError("Connectivity queries are directed")
        query.validate(self.k)
        inserted = query.pairs()
        ordered = sorted(Query.all_pairs(self.k, directed=True).pairs())
        gadget_pairs: list[tuple[int, int]] = []
        for pos, pair in enumerate(ordered):
            base = 4 * pos
            if pair in inserted:
                gadget_pairs.append((base, base + 1))
            else:
                gadget_pairs += [(base, base + 3), (base + 1, base + 2)]
        return Query.of(gadget_pairs)

    def extract(self, query: Query) -> int:
        """s-t edge connectivity of ``G^Q``, correct with probability at least
        ``1 - delta``.

        :param query: directed query over terminal indices; weights are ignored
        :return: number of edge-disjoint s-t paths
        :raises InvalidQueryError: undirected query or index out of range
        """
        return self.inner.extract(self.gadget_query(query)) - self.baseline(query)

    def sketch_size_words(self) -> int:
        """Exact serialized size in 64-bit words"""
        return self.HEADER_WORDS + 4 * self.inner.k**2

    def to_words(self) -> list[int]:
        """Container payload: ``k``, ``m``, then the matching sketch"""
        return [self.k, self.m] + self.inner.to_words()

    @classmethod
    def from_words(cls, words: Sequence[int]) -> StconnSketch:
        """Parse a payload produced by :meth:`to_words`.

        :param words: payload words
        :return: sketch
        :raises ContainerError: truncated or inconsistent payload
        """
        if len(words) < 2:
            raise ContainerError("Truncated connectivity sketch header")
        k, m = int(words[0]), int(words[1])
        inner, consumed = MatchingSketch.from_words(words[2:])
        if 2 + consumed != len(words):
            raise ContainerError("Trailing data after connectivity sketch")
        if inner.k != 4 * k * (k - 1):
            raise ContainerError(f"Matching sketch size does not fit k={k}")
        return cls(inner, k, m)
