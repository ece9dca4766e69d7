"""Deterministic dynamic sketch for minimum spanning forest weight: the spanning
forest is pruned down to its terminal skeleton and the removed weight is kept as a
single offset"""

from __future__ import annotations

import collections
import logging
from dataclasses import dataclass
from typing import ClassVar, Iterable, Sequence

from dynsketch.errors import ContainerError, InvalidGraphError, InvalidQueryError
from dynsketch.graph import Edge, Graph, Query

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class WeightKey:
    """Total order on edges: weight first, edge id breaks ties"""

    weight: int
    ordinal: int

    @classmethod
    def of(cls, edge: Edge) -> WeightKey:
        """Key of an edge"""
        return cls(edge.weight, edge.eid)


class DisjointSets:
    """Union-find over ``0..n-1`` with path halving"""

    def __init__(self, n: int) -> None:
        self._parent = list(range(n))
        self.count = n

    def find(self, x: int) -> int:
        """Representative of the set holding ``x``"""
        while self._parent[x] != x:
            self._parent[x] = self._parent[self._parent[x]]
            x = self._parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        """Merge the sets of ``x`` and ``y``.

        :return: whether they were distinct
        """
        root_x, root_y = self.find(x), self.find(y)
        if root_x == root_y:
            return False
        self._parent[max(root_x, root_y)] = min(root_x, root_y)
        self.count -= 1
        return True


def kruskal(n: int, edges: Iterable[Edge]) -> tuple[list[Edge], int]:
    """Minimum spanning forest under :class:`WeightKey` order.

    :param n: vertex count
    :param edges: candidate edges
    :return: forest edges in key order and the component count
    """
    sets = DisjointSets(n)
    forest = [e for e in sorted(edges, key=WeightKey.of) if sets.union(e.u, e.v)]
    return forest, sets.count


@dataclass(frozen=True)
class Skeleton:
    """Spanning forest reduced to its terminal skeleton, in original vertex ids"""

    edges: tuple[Edge, ...]
    w_star: int
    detached: int
    """Forest components without terminals, pruned away entirely"""


@dataclass(frozen=True)
class MstSketch:
    """Contracted forest ``H'`` on vertices ``0..n-1`` whose first ``k`` vertices
    are the terminals in index order, plus the weight offset ``w_star``"""

    n: int
    k: int
    edges: tuple[Edge, ...]
    w_star: int
    detached: int
    query_base: int
    """Ordinal of the first query edge, above every static edge id"""

    TAG: ClassVar[bytes] = b"MST1"
    HEADER_WORDS: ClassVar[int] = 8
    """Container magic and tag, format version, ``n``, ``k``, ``w_star``,
    ``detached``, query base ordinal and edge count"""

    @staticmethod
    def summarize(n: int, forest: Sequence[Edge], terminals: Sequence[int]) -> Skeleton:
        """Repeatedly drop non-terminal vertices of degree at most one, then replace
        every path through non-terminal degree-2 vertices with a single edge keyed
        by the maximum key along the path.

        :param n: vertex count
        :param forest: spanning forest edges
        :param terminals: terminal vertices
        :return: skeleton edges, ids of summary edges are those of their path
            maxima
        """
        terminal_set = set(terminals)
        edges = {e.eid: e for e in forest}
        incident: dict[int, set[int]] = collections.defaultdict(set)
        for edge in forest:
            incident[edge.u].add(edge.eid)
            incident[edge.v].add(edge.eid)

        pending = [
            v for v in range(n) if v not in terminal_set and len(incident[v]) <= 1
        ]
        pruned_vertices = 0
        while pending:
            vertex = pending.pop()
            if vertex not in incident or len(incident[vertex]) > 1:
                continue
            for eid in incident.pop(vertex):
                edge = edges.pop(eid)
                other = edge.v if edge.u == vertex else edge.u
                incident[other].discard(eid)
                if other not in terminal_set and len(incident[other]) <= 1:
                    pending.append(other)
            pruned_vertices += 1

        for vertex in [v for v, ids in incident.items() if len(ids) == 2]:
            if vertex in terminal_set:
                continue
            first, second = (edges.pop(eid) for eid in incident.pop(vertex))
            a = first.v if first.u == vertex else first.u
            b = second.v if second.u == vertex else second.u
            top = max(first, second, key=WeightKey.of)
            summary = Edge(a, b, top.weight, top.eid)
            edges[summary.eid] = summary
            incident[a] = (incident[a] - {first.eid}) | {summary.eid}
            incident[b] = (incident[b] - {second.eid}) | {summary.eid}

        kept = tuple(sorted(edges.values(), key=WeightKey.of))
        w_star = sum(e.weight for e in forest) - sum(e.weight for e in kept)
        kept_vertices = {v for e in kept for v in (e.u, e.v)} | terminal_set
        forest_components = n - len(forest)
        detached = forest_components - (len(kept_vertices) - len(kept))
        log.debug(
            "Pruned %s vertices, skeleton keeps %s of %s forest edges",
            pruned_vertices,
            len(kept),
            len(forest),
        )
        return Skeleton(kept, w_star, detached)

    @classmethod
    def compress(cls, graph: Graph) -> MstSketch:
        """Build the sketch of an undirected weighted graph.

        :param graph: undirected graph with ``k >= 1`` terminals
        :return: sketch; ``H'`` has at most ``4k`` vertices
        :raises InvalidGraphError: directed graph or no terminals
        """
        if graph.directed:
            raise InvalidGraphError("Spanning forest sketch needs an undirected graph")
        if graph.k == 0:
            raise InvalidGraphError("Spanning forest sketch needs a terminal")

        forest, _ = kruskal(graph.n, graph.without_self_loops().edges)
        skeleton = cls.summarize(graph.n, forest, graph.terminals)

        others = sorted(
            {v for e in skeleton.edges for v in (e.u, e.v)} - set(graph.terminals)
        )
        relabel = {v: i for i, v in enumerate(list(graph.terminals) + others)}
        edges = tuple(
            Edge(relabel[e.u], relabel[e.v], e.weight, e.eid) for e in skeleton.edges
        )
        sketch = cls(
            len(relabel),
            graph.k,
            edges,
            skeleton.w_star,
            skeleton.detached,
            graph.next_edge_id,
        )
        log.info(
            "Built spanning forest sketch: %s vertices, %s edges, w* = %s",
            sketch.n,
            len(edges),
            sketch.w_star,
        )
        return sketch

    def query_edges(self, query: Query) -> list[Edge]:
        """Query edges between terminal vertices, with ordinals above all static
        edges in query order.

        :param query: undirected weighted query
        :return: edges of ``H'`` coordinates
        :raises InvalidQueryError: directed query or index out of range
        """
        if query.directed:
            raise InvalidQueryError("Spanning forest queries are undirected")
        query.validate(self.k)
        return [
            Edge(e.i, e.j, e.weight, ordinal)
            for ordinal, e in enumerate(query, start=self.query_base)
        ]

    def extract(self, query: Query) -> int:
        """Minimum spanning forest weight of ``G^Q``.

        :param query: undirected weighted query
        :return: forest weight
        :raises InvalidQueryError: directed query or index out of range
        """
        forest, _ = kruskal(self.n, self.edges + tuple(self.query_edges(query)))
        return sum(e.weight for e in forest) + self.w_star

    def components(self, query: Query) -> int:
        """Component count of the minimum spanning forest of ``G^Q``"""
        _, count = kruskal(self.n, self.edges + tuple(self.query_edges(query)))
        return count + self.detached

    @staticmethod
    def mst_algorithm(
        n: int, forest: Sequence[Edge], inserted: Iterable[Edge]
    ) -> list[Edge]:
        """Insert edges into a minimum spanning forest one at a time; whenever an
        insertion closes a cycle, the cycle edge with the maximum key is removed
        (possibly the inserted edge itself).

        :param n: vertex count
        :param forest: acyclic edges
        :param inserted: edges to insert in order
        :return: minimum spanning forest of all edges
        """
        current = {e.eid: e for e in forest}
        for edge in inserted:
            path = MstSketch._forest_path(n, current.values(), edge.u, edge.v)
            current[edge.eid] = edge
            if path is not None:
                heaviest = max([edge] + path, key=WeightKey.of)
                del current[heaviest.eid]
        return sorted(current.values(), key=WeightKey.of)

    @staticmethod
    def _forest_path(
        n: int, forest: Iterable[Edge], source: int, target: int
    ) -> list[Edge] | None:
        """Edges of the unique forest path between two vertices, ``None`` when they
        are in different trees"""
        adjacent: list[list[Edge]] = [[] for _ in range(n)]
        for edge in forest:
            adjacent[edge.u].append(edge)
            adjacent[edge.v].append(edge)
        via: dict[int, Edge | None] = {source: None}
        frontier = collections.deque([source])
        while frontier:
            vertex = frontier.popleft()
            for edge in adjacent[vertex]:
                other = edge.v if edge.u == vertex else edge.u
                if other not in via:
                    via[other] = edge
                    frontier.append(other)
        if target not in via:
            return None
        path: list[Edge] = []
        vertex = target
        while (step := via[vertex]) is not None:
            path.append(step)
            vertex = step.v if step.u == vertex else step.u
        return path

    def as_graph(self) -> Graph:
        """``H'`` as a graph whose edge ids are the stored ordinals"""
        return Graph(self.n, self.edges, tuple(range(self.k)))

    def sketch_size_words(self) -> int:
        """Exact serialized size in 64-bit words"""
        return self.HEADER_WORDS + 4 * len(self.edges)

    def to_words(self) -> list[int]:
        """Container payload: header fields, then ``(u, v, weight, ordinal)`` per
        edge"""
        words = [self.n, self.k, self.w_star, self.detached, self.query_base]
        words.append(len(self.edges))
        for edge in self.edges:
            words += [edge.u, edge.v, edge.weight, edge.eid]
        return words

    @classmethod
    def from_words(cls, words: Sequence[int]) -> MstSketch:
        """Parse a payload produced by :meth:`to_words`.

        :param words: payload words
        :return: sketch
        :raises ContainerError: truncated or inconsistent payload
        """
        if len(words) < 6:
            raise ContainerError("Truncated spanning forest sketch header")
        n, k, w_star, detached, query_base, count = (int(w) for w in words[:6])
        if len(words) != 6 + 4 * count:
            raise ContainerError(
                f"Spanning forest sketch with {count} edges needs "
                f"{6 + 4 * count} words, got {len(words)}"
            )
        flat = [int(w) for w in words[6:]]
        edges = tuple(Edge(*flat[i : i + 4]) for i in range(0, len(flat), 4))
        try:
            Graph(n, edges, tuple(range(k)))
        except InvalidGraphError as ex:
            raise ContainerError(f"Corrupt spanning forest: {ex}") from ex
        return cls(n, k, edges, w_star, detached, query_base)
