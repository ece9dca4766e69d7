"""Exact brute-force ground truth for every sketch family, computed on the queried
graph directly. These are deliberately simple and share no code with the
sketches."""

from __future__ import annotations

import collections
import functools
import logging
from dataclasses import dataclass
from typing import Iterable

from dynsketch.errors import InvalidGraphError, InvalidQueryError, SizeLimitError
from dynsketch.graph import Graph, TerminalCut
from dynsketch.path import UNREACHABLE

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleResult:
    """Oracle answer and the method that produced it"""

    value: int
    method: str
    components: int | None = None
    """Spanning forest component count, for the spanning forest oracle only"""


class Oracle:
    """Brute-force oracles"""

    MATCHING_MAX_VERTICES = 24

    @classmethod
    def matching(cls, graph: Graph) -> OracleResult:
        """Maximum matching size by dynamic programming over sets of used vertices,
        always deciding the lowest unused vertex first. Edge directions and
        self-loops are ignored.

        :param graph: graph on at most :attr:`MATCHING_MAX_VERTICES` vertices
        :return: matching size
        :raises SizeLimitError: graph is too large
        """
        if graph.n > cls.MATCHING_MAX_VERTICES:
            raise SizeLimitError(
                f"Matching oracle handles {cls.MATCHING_MAX_VERTICES} vertices, "
                f"got {graph.n}"
            )
        neighbors = [0] * graph.n
        for edge in graph.edges:
            if edge.u != edge.v:
                neighbors[edge.u] |= 1 << edge.v
                neighbors[edge.v] |= 1 << edge.u
        everything = (1 << graph.n) - 1

        @functools.lru_cache(maxsize=None)
        def best(used: int) -> int:
            free = everything & ~used
            if not free:
                return 0
            lowest = free & -free
            vertex = lowest.bit_length() - 1
            result = best(used | lowest)
            partners = neighbors[vertex] & free & ~lowest
            while partners:
                partner = partners & -partners
                result = max(result, 1 + best(used | lowest | partner))
                partners &= partners - 1
            return result

        return OracleResult(best(0), "bitmask-dp")

    @staticmethod
    def maxflow(
        graph: Graph, sources: Iterable[int], sinks: Iterable[int]
    ) -> OracleResult:
        """Maximum flow from a vertex set to a disjoint vertex set by shortest
        augmenting paths, through a super-source and a super-sink of unbounded
        capacity. Undirected edges carry flow either way.

        :param graph: capacitated graph
        :param sources: source vertices
        :param sinks: sink vertices
        :return: flow value, equal to the minimum cut between the sets
        :raises InvalidQueryError: the sets intersect
        """
        source_set, sink_set = set(sources), set(sinks)
        if source_set & sink_set:
            raise InvalidQueryError(f"Flow endpoints overlap: {source_set & sink_set}")

        residual: dict[int, dict[int, int]] = collections.defaultdict(
            lambda: collections.defaultdict(int)
        )
        for edge in graph.to_directed().edges:
            if edge.u != edge.v:
                residual[edge.u][edge.v] += edge.weight
                residual[edge.v][edge.u] += 0
        unbounded = graph.to_directed().total_weight() + 1
        super_source, super_sink = graph.n, graph.n + 1
        for vertex in source_set:
            residual[super_source][vertex] += unbounded
            residual[vertex][super_source] += 0
        for vertex in sink_set:
            residual[vertex][super_sink] += unbounded
            residual[super_sink][vertex] += 0

        flow = 0
        while True:
            parent = {super_source: super_source}
            frontier = collections.deque([super_source])
            while frontier and super_sink not in parent:
                vertex = frontier.popleft()
                for other, capacity in residual[vertex].items():
                    if capacity > 0 and other not in parent:
                        parent[other] = vertex
                        frontier.append(other)
            if super_sink not in parent:
                return OracleResult(flow, "edmonds-karp")

            path: list[tuple[int, int]] = []
            vertex = super_sink
            while vertex != super_source:
                path.append((parent[vertex], vertex))
                vertex = parent[vertex]
            bottleneck = min(residual[u][v] for u, v in path)
            for u, v in path:
                residual[u][v] -= bottleneck
                residual[v][u] += bottleneck
            flow += bottleneck

    @classmethod
    def terminal_cut(cls, graph: Graph, cut: TerminalCut) -> OracleResult:
        """Minimum ``A``-``B`` cut between terminal index sets"""
        cut.validate(graph.k)
        return cls.maxflow(
            graph,
            (graph.terminals[i] for i in cut.a),
            (graph.terminals[i] for i in cut.b),
        )

    @classmethod
    def st_connectivity(cls, graph: Graph) -> OracleResult:
        """Edge connectivity from the designated source to the designated sink,
        capacities counting as edge multiplicities.

        :raises InvalidGraphError: ``s`` or ``t`` is not designated
        """
        if graph.source is None or graph.sink is None:
            raise InvalidGraphError("Connectivity oracle needs designated s and t")
        return cls.maxflow(graph, [graph.source], [graph.sink])

    @staticmethod
    def mst(graph: Graph) -> OracleResult:
        """Minimum spanning forest weight by Kruskal's algorithm, comparing edges by
        weight and then by edge id.

        :param graph: weighted graph, edge directions are ignored
        :return: forest weight, and the forest component count
        """
        parent = list(range(graph.n))

        def root(vertex: int) -> int:
            while parent[vertex] != vertex:
                vertex = parent[vertex]
            return vertex

        weight, components = 0, graph.n
        for edge in sorted(graph.edges, key=lambda e: (e.weight, e.eid)):
            u, v = root(edge.u), root(edge.v)
            if u != v:
                parent[u] = v
                weight += edge.weight
                components -= 1
        return OracleResult(weight, "kruskal", components)

    @staticmethod
    def shortest_path(graph: Graph, s: int, t: int) -> OracleResult:
        """Shortest ``s``-``t`` distance by quadratic Dijkstra without a heap.

        :param graph: weighted graph; undirected edges count in both directions
        :param s: start vertex
        :param t: target vertex
        :return: distance, :data:`dynsketch.path.UNREACHABLE` if there is no path
        """
        distance = [UNREACHABLE] * graph.n
        distance[s] = 0
        done = [False] * graph.n
        edges = graph.to_directed().edges
        for _ in range(graph.n):
            candidates = [v for v in range(graph.n) if not done[v]]
            vertex = min(candidates, key=lambda v: distance[v])
            if distance[vertex] == UNREACHABLE:
                break
            done[vertex] = True
            for edge in edges:
                if edge.u == vertex:
                    distance[edge.v] = min(
                        distance[edge.v], distance[vertex] + edge.weight
                    )
        return OracleResult(distance[t], "dijkstra")
