"""Dynamic sketch for s-t shortest path distance: the distance table between
terminals, combined with inserted terminal edges at query time"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import ClassVar, Iterable, Sequence

from dynsketch.errors import ContainerError, InvalidGraphError, InvalidQueryError
from dynsketch.graph import Edge, Graph, Query

log = logging.getLogger(__name__)

UNREACHABLE = 2**63 - 1
"""Distance of an unreachable vertex, above any finite distance"""


def saturating_add(a: int, b: int) -> int:
    """Sum of two distances, :data:`UNREACHABLE` if either is or the sum
    overflows"""
    return min(a + b, UNREACHABLE) if UNREACHABLE not in (a, b) else UNREACHABLE


def dijkstra(n: int, edges: Iterable[Edge], source: int) -> list[int]:
    """Single-source distances over directed nonnegative edges.

    :param n: vertex count
    :param edges: directed edges
    :param source: start vertex
    :return: distance per vertex, :data:`UNREACHABLE` if there is no path
    """
    adjacent: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for edge in edges:
        adjacent[edge.u].append((edge.v, edge.weight))

    distance = [UNREACHABLE] * n
    distance[source] = 0
    heap = [(0, source)]
    while heap:
        reached, vertex = heapq.heappop(heap)
        if reached > distance[vertex]:
            continue
        for other, weight in adjacent[vertex]:
            candidate = saturating_add(reached, weight)
            if candidate < distance[other]:
                distance[other] = candidate
                heapq.heappush(heap, (candidate, other))
    return distance


@dataclass(frozen=True)
class PathSketch:
    """Terminal distance table with the terminal indices of ``s`` and ``t``"""

    table: tuple[tuple[int, ...], ...]
    s: int
    t: int

    TAG: ClassVar[bytes] = b"PTH1"
    HEADER_WORDS: ClassVar[int] = 5
    """Container magic and tag, format version, ``k``, ``s`` and ``t``"""

    def __post_init__(self) -> None:
        k = len(self.table)
        if any(len(row) != k for row in self.table):
            raise InvalidGraphError("Distance table is not square")
        if not (0 <= self.s < k and 0 <= self.t < k):
            raise InvalidGraphError(f"s={self.s} or t={self.t} outside 0..{k - 1}")

    @property
    def k(self) -> int:
        """Terminal count, ``s`` and ``t`` included"""
        return len(self.table)

    @staticmethod
    def with_endpoints(
        graph: Graph, s: int | None = None, t: int | None = None
    ) -> Graph:
        """Graph whose terminal list is extended by ``s`` and ``t`` (in that order)
        unless they already are terminals, with ``s`` and ``t`` designated.

        :param graph: weighted graph
        :param s: source vertex, the designated source if omitted
        :param t: target vertex, the designated sink if omitted
        :return: graph over the sketch terminal indices
        :raises InvalidGraphError: ``s`` or ``t`` missing or out of range
        """
        s = graph.source if s is None else s
        t = graph.sink if t is None else t
        if s is None or t is None:
            raise InvalidGraphError("Shortest path sketch needs s and t")
        if not (0 <= s < graph.n and 0 <= t < graph.n):
            raise InvalidGraphError(f"s={s} or t={t} outside 0..{graph.n - 1}")
        terminals = list(graph.terminals)
        terminals += [v for v in dict.fromkeys((s, t)) if v not in terminals]
        return graph.replace(terminals=tuple(terminals), source=s, sink=t)

    @classmethod
    def compress(
        cls, graph: Graph, s: int | None = None, t: int | None = None
    ) -> PathSketch:
        """Build the sketch. ``s`` and ``t`` become terminals ``k`` and ``k + 1``
        unless they already are terminals (see :meth:`with_endpoints`).

        :param graph: weighted graph; undirected edges count in both directions
        :param s: source vertex, the designated source if omitted
        :param t: target vertex, the designated sink if omitted
        :return: sketch
        :raises InvalidGraphError: ``s`` or ``t`` missing or out of range
        """
        extended = cls.with_endpoints(graph, s, t)
        terminals = extended.terminals
        directed = graph.to_directed()
        rows = (dijkstra(graph.n, directed.edges, q) for q in terminals)
        table = tuple(tuple(row[v] for v in terminals) for row in rows)
        assert extended.source is not None and extended.sink is not None
        sketch = cls(
            table, terminals.index(extended.source), terminals.index(extended.sink)
        )
        log.info(
            "Built shortest path sketch: %s terminals, d(s, t) = %s",
            sketch.k,
            cls.describe(table[sketch.s][sketch.t]),
        )
        return sketch

    def extract(self, query: Query) -> int:
        """Shortest ``s``-``t`` distance of ``G^Q``.

        :param query: directed weighted query over the sketch terminals
        :return: distance, :data:`UNREACHABLE` if ``t`` cannot be reached
        :raises InvalidQueryError: undirected query or index out of range
        """
        if not query.directed:
            raise InvalidQueryError("Shortest path queries are directed")
        query.validate(self.k)
        edges = [
            Edge(i, j, distance)
            for i, row in enumerate(self.table)
            for j, distance in enumerate(row)
            if i != j and distance != UNREACHABLE
        ]
        edges += [Edge(e.i, e.j, e.weight) for e in query]
        return dijkstra(self.k, edges, self.s)[self.t]

    @staticmethod
    def describe(distance: int) -> str:
        """Printable distance, ``inf`` for :data:`UNREACHABLE`"""
        return "inf" if distance == UNREACHABLE else str(distance)

    def sketch_size_words(self) -> int:
        """Exact serialized size in 64-bit words"""
        return self.HEADER_WORDS + self.k**2

    def to_words(self) -> list[int]:
        """Container payload: ``k``, ``s``, ``t``, then the table row-major"""
        return [self.k, self.s, self.t] + [d for row in self.table for d in row]

    @classmethod
    def from_words(cls, words: Sequence[int]) -> PathSketch:
        """Parse a payload produced by :meth:`to_words`.

        :param words: payload words
        :return: sketch
        :raises ContainerError: truncated or inconsistent payload
        """
        if len(words) < 3:
            raise ContainerError("Truncated shortest path sketch header")
        k, s, t = (int(w) for w in words[:3])
        if len(words) != 3 + k * k:
            raise ContainerError(
                f"Shortest path sketch with k={k} needs {3 + k * k} words"
            )
        flat = [int(w) for w in words[3:]]
        table = tuple(tuple(flat[i * k : (i + 1) * k]) for i in range(k))
        try:
            return cls(table, s, t)
        except InvalidGraphError as ex:
            raise ContainerError(f"Corrupt shortest path sketch: {ex}") from ex
