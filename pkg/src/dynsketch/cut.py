"""Cut-preserving dynamic sketch: terminal minimum cuts of a capacitated digraph
answered through one matching extraction on a derived bipartite graph"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, Iterable, Iterator, Sequence, Tuple

from dynsketch.errors import (
    ContainerError,
    EmptyTerminalError,
    InvalidGraphError,
    InvalidQueryError,
)
from dynsketch.graph import Graph, Query, TerminalCut
from dynsketch.matching import MatchingSketch

log = logging.getLogger(__name__)

IndexPairs = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class GadgetIndex:
    """Gadget terminal indices per original terminal ``q``: ``(q->e, e-)`` for
    every edge ``e`` leaving ``q`` and ``(q<-e, e+)`` for every edge entering it"""

    outgoing: tuple[IndexPairs, ...]
    incoming: tuple[IndexPairs, ...]

    @property
    def k(self) -> int:
        """Original terminal count"""
        return len(self.outgoing)

    def cut_query(self, cut: TerminalCut) -> Query:
        """Query ``Q_{A,B}`` over the gadget terminals: ``q->e`` to ``e-`` for every
        ``q`` in ``A``, ``q<-e`` to ``e+`` for every ``q`` in ``B``.

        :param cut: terminal cut of the original graph
        :return: undirected query
        :raises InvalidQueryError: cut index out of range
        """
        cut.validate(self.k)
        pairs = [pair for q in sorted(cut.a) for pair in self.outgoing[q]]
        pairs += [pair for q in sorted(cut.b) for pair in self.incoming[q]]
        return Query.of(pairs)


@dataclass(frozen=True)
class CutGadget:
    """Bipartite graph ``G'`` derived from an uncapacitated digraph.

    Every edge ``e`` becomes vertices ``e-`` (index ``2e``) and ``e+`` (``2e + 1``)
    joined by an edge, and ``e1+`` is joined to ``e2-`` whenever ``e1`` enters the
    vertex ``e2`` leaves. Every edge ``e`` leaving a terminal ``q`` adds a vertex
    ``q->e``, and every edge entering ``q`` adds ``q<-e``; these and the
    corresponding ``e-`` / ``e+`` are the terminals of ``G'``.
    """

    graph: Graph
    m: int
    index: GadgetIndex

    @classmethod
    def build(cls, graph: Graph) -> CutGadget:
        """Build the gadget of a directed, uncapacitated graph.

        :param graph: directed graph, every edge of unit capacity and no self-loops
        :return: gadget
        :raises InvalidGraphError: undirected graph, self-loop or non-unit capacity
        :raises EmptyTerminalError: no edge is incident on a terminal
        """
        if not graph.directed:
            raise InvalidGraphError("Cut gadget needs a directed graph")
        if any(edge.weight != 1 or edge.u == edge.v for edge in graph.edges):
            raise InvalidGraphError("Cut gadget needs unit edges without self-loops")

        m = graph.m
        entering: dict[int, list[int]] = {}
        leaving: dict[int, list[int]] = {}
        for position, edge in enumerate(graph.edges):
            leaving.setdefault(edge.u, []).append(position)
            entering.setdefault(edge.v, []).append(position)

        edges = [(2 * e, 2 * e + 1) for e in range(m)]
        for vertex, into in entering.items():
            edges += [
                (2 * e1 + 1, 2 * e2) for e1 in into for e2 in leaving.get(vertex, [])
            ]

        terminals: list[int] = []

        def add_pair(edge_vertex: int) -> tuple[int, int]:
            terminals.extend((2 * m + len(terminals) // 2, edge_vertex))
            return len(terminals) - 2, len(terminals) - 1

        outgoing: list[IndexPairs] = []
        incoming: list[IndexPairs] = []
        for vertex in graph.terminals:
            outgoing.append(tuple(add_pair(2 * e) for e in leaving.get(vertex, [])))
            incoming.append(
                tuple(add_pair(2 * e + 1) for e in entering.get(vertex, []))
            )
        if not terminals:
            raise EmptyTerminalError("No capacity is incident on the terminals")

        gadget = Graph.build(2 * m + len(terminals) // 2, edges, terminals)
        log.debug(
            "Cut gadget: %s vertices, %s edges, %s terminals",
            gadget.n,
            gadget.m,
            gadget.k,
        )
        return cls(gadget, m, GadgetIndex(tuple(outgoing), tuple(incoming)))


@dataclass(frozen=True)
class CutSketch:
    """Sketch answering every terminal cut ``(A, B)`` of a capacitated digraph"""

    inner: MatchingSketch
    m: int
    index: GadgetIndex

    TAG: ClassVar[bytes] = b"CUT1"

    @property
    def k(self) -> int:
        """Terminal count of the sketched graph"""
        return self.index.k

    @classmethod
    def compress(
        cls,
        graph: Graph,
        delta: float | Fraction,
        seed: int = 0,
        *,
        max_expanded_edges: int = 100_000,
        per_query_delta: bool = False,
    ) -> CutSketch:
        """Build a cut sketch. Undirected edges become two antiparallel arcs of the
        same capacity, self-loops are dropped and capacities are expanded into
        parallel unit edges.

        :param graph: capacitated graph with ``k >= 2`` terminals
        :param delta: failure probability of answering all ``3^k`` terminal cuts
        :param seed: RNG seed
        :param max_expanded_edges: bound on the expanded edge count
        :param per_query_delta: use ``delta`` per query instead of dividing it among
            all terminal cuts
        :return: sketch
        :raises InvalidGraphError: fewer than two terminals
        :raises CapacityOverflowError: expansion exceeds ``max_expanded_edges``
        :raises EmptyTerminalError: no capacity is incident on the terminals
        """
        if graph.k < 2:
            raise InvalidGraphError(f"Cut sketch needs two terminals, got {graph.k}")
        expanded = graph.to_directed().without_self_loops()
        gadget = CutGadget.build(expanded.expand_capacities(max_expanded_edges))

        exact_delta = cls.query_delta(delta, graph.k, per_query_delta=per_query_delta)
        inner = MatchingSketch.compress(gadget.graph, exact_delta, seed)
        log.info(
            "Built cut sketch: %s expanded edges, %s gadget terminals",
            gadget.m,
            gadget.graph.k,
        )
        return cls(inner, gadget.m, gadget.index)

    @staticmethod
    def query_delta(
        delta: float | Fraction, k: int, *, per_query_delta: bool = False
    ) -> Fraction:
        """Failure probability of a single terminal cut answer of a sketch built by
        :meth:`compress` with the same arguments"""
        exact = delta if isinstance(delta, Fraction) else Fraction(str(delta))
        return exact if per_query_delta else exact / 3**k

    def query_cut(self, cut: TerminalCut) -> int:
        """Minimum ``A``-``B`` cut, i.e. the edge connectivity from ``A`` to ``B``.

        :param cut: disjoint terminal index sets
        :return: cut value
        :raises InvalidQueryError: index out of range
        """
        value = self.inner.extract(self.index.cut_query(cut)) - self.m
        log.debug("Terminal cut %s = %s", cut, value)
        return value

    def query_bipartition_min(self, side: Iterable[int]) -> int:
        """Cut value of the bipartition ``(A, T - A)``.

        :param side: ``A``, a nonempty proper subset of terminal indices
        :return: cut value
        :raises InvalidQueryError: ``A`` is empty or contains every terminal
        """
        a = frozenset(side)
        return self.query_cut(TerminalCut(a, frozenset(range(self.k)) - a))

    def query_separating_min(self, cut: TerminalCut) -> int:
        """Minimum over all bipartitions ``(S, T - S)`` with ``A`` inside ``S`` and
        ``B`` outside, which equals the ``A``-``B`` cut value.

        :param cut: disjoint terminal index sets
        :return: cut value
        :raises InvalidQueryError: index out of range
        """
        cut.validate(self.k)
        return min(
            self.query_bipartition_min(side)
            for side in self.separating_sides(cut, self.k)
        )

    def query_st_maxflow(self, s: int, t: int, query: Query) -> int:
        """Maximum ``s``-``t`` flow of ``G^Q`` for a directed capacitated query: the
        minimum over terminal bipartitions separating ``s`` from ``t`` of the
        sketched cut plus the query capacity crossing it.

        :param s: source terminal index
        :param t: sink terminal index
        :param query: directed query whose weights are capacities
        :return: flow value
        :raises InvalidQueryError: undirected query, index out of range, or
            ``s == t``
        """
        if not query.directed:
            raise InvalidQueryError("Flow queries are directed")
        query.validate(self.k)
        cut = TerminalCut.of([s], [t])
        cut.validate(self.k)

        def crossing(side: frozenset[int]) -> int:
            return sum(e.weight for e in query if e.i in side and e.j not in side)

        return min(
            self.query_bipartition_min(side) + crossing(side)
            for side in self.separating_sides(cut, self.k)
        )

    @staticmethod
    def separating_sides(cut: TerminalCut, k: int) -> Iterator[frozenset[int]]:
        """Every bipartition side containing ``A`` and disjoint from ``B``"""
        free = sorted(set(range(k)) - cut.a - cut.b)
        for size in range(len(free) + 1):
            for extra in itertools.combinations(free, size):
                yield cut.a | frozenset(extra)

    @staticmethod
    def st_counterpart(graph: Graph) -> Graph:
        """The ``s``-``t`` counterpart: fresh vertices ``s = n`` and ``t = n + 1``,
        an edge ``s -> q`` of capacity ``c+(q)`` and ``q -> t`` of capacity
        ``c-(q)`` per terminal ``q``. Terminals become ``T + [s, t]``.

        :param graph: capacitated graph; undirected edges count in both directions
        :return: directed counterpart, zero-capacity edges included
        """
        directed = graph.to_directed()
        s, t = graph.n, graph.n + 1
        edges = [(e.u, e.v, e.weight) for e in directed.edges]
        edges += [(s, q, directed.out_capacity(q)) for q in graph.terminals]
        edges += [(q, t, directed.in_capacity(q)) for q in graph.terminals]
        return Graph.build(
            graph.n + 2,
            edges,
            graph.terminals + (s, t),
            directed=True,
            source=s,
            sink=t,
        )

    @staticmethod
    def counterpart_query(graph: Graph, cut: TerminalCut) -> tuple[Graph, Query]:
        """Counterpart with ``s`` and ``t`` left isolated, and the capacitated query
        joining ``s`` to ``A`` and ``B`` to ``t``. The maximum ``s``-``t`` flow of the
        queried counterpart is the ``A``-``B`` cut of ``graph``.

        :param graph: capacitated graph
        :param cut: terminal cut of ``graph``
        :return: counterpart base graph and query over its terminals
        """
        cut.validate(graph.k)
        directed = graph.to_directed()
        base = directed.replace(
            n=graph.n + 2,
            terminals=graph.terminals + (graph.n, graph.n + 1),
            source=graph.n,
            sink=graph.n + 1,
        )
        s, t, terminals = graph.k, graph.k + 1, graph.terminals
        pairs = [(s, i, directed.out_capacity(terminals[i])) for i in sorted(cut.a)]
        pairs += [(i, t, directed.in_capacity(terminals[i])) for i in sorted(cut.b)]
        return base, Query.of(pairs, directed=True)

    def sketch_size_words(self) -> int:
        """Exact serialized size in 64-bit words, container preamble included"""
        return 2 + len(self.to_words())

    def to_words(self) -> list[int]:
        """Container payload: ``m``, ``k``, per terminal the outgoing and incoming
        gadget pairs (each list prefixed by its length), then the matching sketch"""
        words = [self.m, self.k]
        for pairs in itertools.chain(*zip(self.index.outgoing, self.index.incoming)):
            words.append(len(pairs))
            words += [position for pair in pairs for position in pair]
        return words + self.inner.to_words()

    @classmethod
    def from_words(cls, words: Sequence[int]) -> CutSketch:
        """Parse a payload produced by :meth:`to_words`.

        :param words: payload words
        :return: sketch
        :raises ContainerError: truncated or inconsistent payload
        """
        sections: list[IndexPairs] = []
        try:
            m, k = int(words[0]), int(words[1])
            offset = 2
            for _ in range(2 * k):
                count = int(words[offset])
                flat = [int(w) for w in words[offset + 1 : offset + 1 + 2 * count]]
                if len(flat) != 2 * count:
                    raise IndexError(offset)
                sections.append(tuple(zip(flat[::2], flat[1::2])))
                offset += 1 + 2 * count
        except IndexError as ex:
            raise ContainerError("Truncated cut sketch gadget index") from ex

        inner, consumed = MatchingSketch.from_words(words[offset:])
        if offset + consumed != len(words):
            raise ContainerError("Trailing data after cut sketch")
        index = GadgetIndex(tuple(sections[::2]), tuple(sections[1::2]))
        return cls(inner, m, index)
