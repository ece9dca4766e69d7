"""Graph, query and terminal cut data model shared by all sketches, and their text
formats"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from dynsketch.errors import (
    CapacityOverflowError,
    DynSketchError,
    FormatError,
    InvalidGraphError,
    InvalidQueryError,
    NegativeWeightError,
)

log = logging.getLogger(__name__)

EdgeSpec = Sequence[int]
"""Edge as ``(u, v)`` or ``(u, v, weight)``"""


def _unpack(spec: EdgeSpec) -> tuple[int, int, int]:
    """Split an edge tuple into endpoints and weight, which defaults to 1"""
    if len(spec) not in (2, 3):
        raise DynSketchError(f"Edge {spec} needs two endpoints and an optional weight")
    return spec[0], spec[1], spec[2] if len(spec) == 3 else 1


@dataclass(frozen=True)
class Edge:
    """Edge ``u -> v`` (or ``u - v`` in an undirected graph) with a nonnegative
    integer weight or capacity; ``eid`` is unique within a graph and doubles as the
    tie-breaking ordinal of equal weights"""

    u: int
    v: int
    weight: int = 1
    eid: int = 0

    def endpoints(self) -> tuple[int, int]:
        """Endpoints in canonical (ascending) order"""
        return (self.u, self.v) if self.u <= self.v else (self.v, self.u)


@dataclass(frozen=True)
class Graph:
    """Static multigraph on vertices ``0..n-1`` with an ordered terminal list.
    Terminal ``i`` is ``terminals[i]``; queries address terminals by that index."""

    n: int
    edges: tuple[Edge, ...]
    terminals: tuple[int, ...]
    directed: bool = False
    source: int | None = None
    sink: int | None = None

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidGraphError(f"Negative vertex count {self.n}")
        if len(set(self.terminals)) != len(self.terminals):
            raise InvalidGraphError(f"Duplicate terminals in {self.terminals}")
        for vertex in self.terminals:
            self._check_vertex(vertex, "Terminal")
        for edge in self.edges:
            self._check_vertex(edge.u, "Edge endpoint")
            self._check_vertex(edge.v, "Edge endpoint")
            if edge.weight < 0:
                raise NegativeWeightError(f"Negative weight or capacity in {edge}")
        if len({edge.eid for edge in self.edges}) != len(self.edges):
            raise InvalidGraphError("Edge ids are not unique")
        for vertex in (self.source, self.sink):
            if vertex is not None:
                self._check_vertex(vertex, "Designated vertex")
        if self.source is not None and self.source == self.sink:
            raise InvalidGraphError(f"Source and sink coincide at {self.source}")

    def _check_vertex(self, vertex: int, role: str) -> None:
        if not 0 <= vertex < self.n:
            raise InvalidGraphError(f"{role} {vertex} is outside 0..{self.n - 1}")

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[EdgeSpec],
        terminals: Sequence[int],
        *,
        directed: bool = False,
        source: int | None = None,
        sink: int | None = None,
    ) -> Graph:
        """Build a graph from ``(u, v)`` or ``(u, v, weight)`` tuples, assigning edge
        ids in input order.

        :param n: vertex count
        :param edges: edge tuples; a missing weight is ``1``
        :param terminals: terminal vertices in query index order
        :param directed: whether edges are directed
        :param source: optional designated source vertex
        :param sink: optional designated sink vertex
        :return: validated graph
        :raises InvalidGraphError: endpoints or terminals out of range, duplicate
            terminals, negative weights, or coinciding source and sink
        """
        built = tuple(Edge(*_unpack(spec), eid) for eid, spec in enumerate(edges))
        return cls(n, built, tuple(terminals), directed, source, sink)

    @property
    def k(self) -> int:
        """Terminal count"""
        return len(self.terminals)

    @property
    def m(self) -> int:
        """Edge count, parallel edges included"""
        return len(self.edges)

    @property
    def next_edge_id(self) -> int:
        """Smallest edge id above every existing one"""
        return max((edge.eid for edge in self.edges), default=-1) + 1

    def terminal_index(self) -> dict[int, int]:
        """Mapping of terminal vertex to its index in :attr:`terminals`"""
        return {vertex: index for index, vertex in enumerate(self.terminals)}

    def replace(self, **changes: object) -> Graph:
        """Copy with some fields replaced (see :func:`dataclasses.replace`)"""
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]

    def total_weight(self) -> int:
        """Sum of all edge weights"""
        return sum(edge.weight for edge in self.edges)

    def apply_query(self, query: Query) -> Graph:
        """Graph ``G^Q`` with one new edge per query edge appended after the existing
        edges; new edge ids continue above :attr:`next_edge_id` in query order.

        :param query: query over this graph's terminal indices
        :return: new graph, ``self`` is untouched
        :raises InvalidQueryError: query does not fit this graph
        """
        query.validate(self.k)
        if query.directed != self.directed:
            raise InvalidQueryError(
                f"{'Directed' if query.directed else 'Undirected'} query "
                f"for {'directed' if self.directed else 'undirected'} graph"
            )
        first_id = self.next_edge_id
        added = tuple(
            Edge(self.terminals[edge.i], self.terminals[edge.j], edge.weight, eid)
            for eid, edge in enumerate(query.edges, start=first_id)
        )
        return self.replace(edges=self.edges + added)

    def expand_capacities(self, max_edges: int = 100_000) -> Graph:
        """Uncapacitated multigraph where every capacity-``c`` edge becomes ``c``
        parallel unit edges; zero-capacity edges disappear.

        :param max_edges: bound on the expanded edge count
        :return: expanded graph with edge ids renumbered from zero
        :raises CapacityOverflowError: expansion exceeds ``max_edges``
        """
        total = self.total_weight()
        if total > max_edges:
            raise CapacityOverflowError(
                f"Expanding capacities yields {total:,} edges, bound is {max_edges:,}"
            )
        expanded = tuple(
            Edge(edge.u, edge.v, 1, eid)
            for eid, edge in enumerate(
                edge for edge in self.edges for _ in range(edge.weight)
            )
        )
        log.debug("Expanded %s capacitated edges into %s", self.m, len(expanded))
        return self.replace(edges=expanded)

    def terminal_capacity(self) -> int:
        """Total capacity ``C`` of edges with at least one terminal endpoint, each
        such edge counted once"""
        terminals = set(self.terminals)
        return sum(
            edge.weight
            for edge in self.edges
            if edge.u in terminals or edge.v in terminals
        )

    def out_capacity(self, vertex: int) -> int:
        """Total capacity of the edges leaving ``vertex``"""
        return sum(edge.weight for edge in self.edges if edge.u == vertex)

    def in_capacity(self, vertex: int) -> int:
        """Total capacity of the edges entering ``vertex``"""
        return sum(edge.weight for edge in self.edges if edge.v == vertex)

    def to_directed(self) -> Graph:
        """Directed graph replacing every undirected edge with two antiparallel edges
        of the same capacity; a directed graph is returned unchanged"""
        if self.directed:
            return self
        doubled = tuple(
            Edge(u, v, edge.weight, eid)
            for eid, (edge, (u, v)) in enumerate(
                (edge, pair)
                for edge in self.edges
                for pair in ((edge.u, edge.v), (edge.v, edge.u))
            )
        )
        return self.replace(edges=doubled, directed=True)

    def without_self_loops(self) -> Graph:
        """Copy without self-loops"""
        return self.replace(edges=tuple(e for e in self.edges if e.u != e.v))


@dataclass(frozen=True)
class QueryEdge:
    """Edge between terminal indices ``i`` and ``j`` inserted at extraction time"""

    i: int
    j: int
    weight: int = 1


@dataclass(frozen=True)
class Query:
    """Set of terminal-terminal edges. Edges are kept sorted, so that derived edge
    ids (and MST tie-breaking ordinals) do not depend on input order."""

    edges: tuple[QueryEdge, ...] = ()
    directed: bool = False

    def __post_init__(self) -> None:
        seen: set[tuple[int, int]] = set()
        for edge in self.edges:
            if edge.i == edge.j:
                raise InvalidQueryError(f"Query self-loop at terminal {edge.i}")
            if edge.weight < 0:
                raise NegativeWeightError(f"Negative query weight in {edge}")
            key = self._key(edge.i, edge.j)
            if key in seen:
                raise InvalidQueryError(f"Duplicate query pair {key}")
            seen.add(key)

    def _key(self, i: int, j: int) -> tuple[int, int]:
        return (i, j) if self.directed or i < j else (j, i)

    @classmethod
    def of(cls, edges: Iterable[EdgeSpec], *, directed: bool = False) -> Query:
        """Build a query from ``(i, j)`` or ``(i, j, weight)`` terminal-index tuples.

        :param edges: query edges; undirected pairs are stored with ``i < j``
        :param directed: whether pairs are ordered
        :return: query with sorted edges
        :raises InvalidQueryError: self-loop, duplicate pair or negative weight
        """
        built = []
        for spec in edges:
            i, j, weight = _unpack(spec)
            if not directed and i > j:
                i, j = j, i
            built.append(QueryEdge(i, j, weight))
        built.sort(key=lambda edge: (edge.i, edge.j))
        return cls(tuple(built), directed)

    @classmethod
    def all_pairs(cls, k: int, *, directed: bool = False, weight: int = 1) -> Query:
        """The query ``Q_all`` inserting an edge between every (ordered, if
        ``directed``) pair of distinct terminals"""
        pairs = (
            itertools.permutations(range(k), 2)
            if directed
            else itertools.combinations(range(k), 2)
        )
        return cls.of(((i, j, weight) for i, j in pairs), directed=directed)

    @classmethod
    def enumerate_all(cls, k: int, *, directed: bool = False) -> Iterator[Query]:
        """Every unit-weight query over ``k`` terminals, i.e. every subset of
        :meth:`all_pairs`, in order of increasing size"""
        pairs = cls.all_pairs(k, directed=directed).edges
        for size in range(len(pairs) + 1):
            for subset in itertools.combinations(pairs, size):
                yield cls(subset, directed)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[QueryEdge]:
        return iter(self.edges)

    def pairs(self) -> set[tuple[int, int]]:
        """Query pairs, ``i < j`` for undirected queries"""
        return {(edge.i, edge.j) for edge in self.edges}

    def validate(self, k: int) -> None:
        """Verify that every index addresses one of ``k`` terminals.

        :param k: terminal count
        :raises InvalidQueryError: index out of range
        """
        for edge in self.edges:
            if not (0 <= edge.i < k and 0 <= edge.j < k):
                raise InvalidQueryError(
                    f"Query edge ({edge.i}, {edge.j}) is outside terminals 0..{k - 1}"
                )


@dataclass(frozen=True)
class TerminalCut:
    """Pair of disjoint, nonempty terminal index sets ``(A, B)``"""

    a: frozenset[int]
    b: frozenset[int]

    def __post_init__(self) -> None:
        if not self.a or not self.b:
            raise InvalidQueryError("Terminal cut sides must be nonempty")
        if self.a & self.b:
            raise InvalidQueryError(
                f"Terminal cut sides overlap at {sorted(self.a & self.b)}"
            )

    @classmethod
    def of(cls, a: Iterable[int], b: Iterable[int]) -> TerminalCut:
        """Build a cut from two iterables of terminal indices"""
        return cls(frozenset(a), frozenset(b))

    @classmethod
    def parse(cls, spec: str) -> TerminalCut:
        """Parse a ``"A:0,2 B:1"`` cut specification.

        :param spec: two whitespace-separated sides, each a label and a comma
            separated index list
        :return: terminal cut
        :raises FormatError: malformed specification
        """
        sides: dict[str, frozenset[int]] = {}
        for token in spec.split():
            label, sep, values = token.partition(":")
            if not sep or label.upper() not in ("A", "B") or not values:
                raise FormatError(f"Malformed cut side {token!r} in {spec!r}")
            try:
                sides[label.upper()] = frozenset(int(v) for v in values.split(","))
            except ValueError as ex:
                raise FormatError(f"Malformed terminal index in {token!r}") from ex
        if set(sides) != {"A", "B"}:
            raise FormatError(f"Cut {spec!r} needs both an A and a B side")
        return cls(sides["A"], sides["B"])

    def validate(self, k: int) -> None:
        """Verify that both sides address terminals ``0..k-1``"""
        for index in self.a | self.b:
            if not 0 <= index < k:
                raise InvalidQueryError(f"Cut terminal {index} outside 0..{k - 1}")

    def __str__(self) -> str:
        return "A:{} B:{}".format(
            ",".join(map(str, sorted(self.a))), ",".join(map(str, sorted(self.b)))
        )


class GraphFormat:
    """Line-oriented text formats. A graph is a header ``n k directed`` followed by
    ``t <vertex>`` per terminal in index order, optional ``s <vertex>`` and
    ``d <vertex>`` for the designated source and sink, and ``e <u> <v> [w]`` per
    edge. A query is a list of ``q <i> <j> [w]`` lines. Blank lines and ``#``
    comments are ignored."""

    @staticmethod
    def _records(text: str) -> Iterator[tuple[int, list[str]]]:
        for number, line in enumerate(text.splitlines(), start=1):
            fields = line.split("#", 1)[0].split()
            if fields:
                yield number, fields

    @staticmethod
    def _integers(fields: list[str], count: int, line: int) -> list[int]:
        """Parse the record arguments, which may omit a trailing weight"""
        if len(fields) - 1 not in ((count - 1, count) if count > 1 else (count,)):
            raise FormatError(
                f"{fields[0]!r} record expects {count} values, got {len(fields) - 1}",
                line=line,
            )
        try:
            values = [int(value) for value in fields[1:]]
        except ValueError as ex:
            raise FormatError(f"Non-integer value in {fields}", line=line) from ex
        if any(value < 0 for value in values):
            raise FormatError(f"Negative value in {fields}", line=line)
        return values

    @classmethod
    def parse_graph(cls, text: str) -> Graph:
        """Parse the graph format.

        :param text: file contents
        :return: validated graph
        :raises FormatError: malformed record (with line number), or a graph that
            fails validation
        """
        records = cls._records(text)
        try:
            line, header = next(records)
        except StopIteration as ex:
            raise FormatError("Empty graph input") from ex
        if len(header) != 3:
            raise FormatError(f"Header must be 'n k directed', got {header}", line=line)
        try:
            n, k = int(header[0]), int(header[1])
        except ValueError as ex:
            raise FormatError(f"Non-integer header in {header}", line=line) from ex
        directed_flags = {"1": True, "directed": True, "0": False, "undirected": False}
        if header[2].lower() not in directed_flags:
            raise FormatError(f"Unknown direction flag {header[2]!r}", line=line)
        directed = directed_flags[header[2].lower()]

        terminals: list[int] = []
        designated: dict[str, int] = {}
        edges: list[EdgeSpec] = []
        for line, fields in records:
            kind = fields[0]
            if kind == "t":
                terminals.append(cls._integers(fields, 1, line)[0])
            elif kind in ("s", "d"):
                designated[kind] = cls._integers(fields, 1, line)[0]
            elif kind == "e":
                edges.append(cls._integers(fields, 3, line))
            else:
                raise FormatError(f"Unknown record type {kind!r}", line=line)

        if len(terminals) != k:
            raise FormatError(f"Header declares {k} terminals, found {len(terminals)}")
        try:
            return Graph.build(
                n,
                edges,
                terminals,
                directed=directed,
                source=designated.get("s"),
                sink=designated.get("d"),
            )
        except InvalidGraphError as ex:
            raise FormatError(str(ex)) from ex

    @staticmethod
    def format_graph(graph: Graph) -> str:
        """Render a graph in the text format (edge ids are not preserved)"""
        lines = [f"{graph.n} {graph.k} {int(graph.directed)}"]
        lines += [f"t {vertex}" for vertex in graph.terminals]
        if graph.source is not None:
            lines.append(f"s {graph.source}")
        if graph.sink is not None:
            lines.append(f"d {graph.sink}")
        lines += [f"e {edge.u} {edge.v} {edge.weight}" for edge in graph.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_query(cls, text: str, *, directed: bool) -> Query:
        """Parse the query format.

        :param text: file contents
        :param directed: whether pairs are ordered
        :return: query
        :raises FormatError: malformed record or invalid query
        """
        edges: list[EdgeSpec] = []
        for line, fields in cls._records(text):
            if fields[0] != "q":
                raise FormatError(f"Unknown record type {fields[0]!r}", line=line)
            edges.append(cls._integers(fields, 3, line))
        try:
            return Query.of(edges, directed=directed)
        except InvalidQueryError as ex:
            raise FormatError(str(ex)) from ex

    @staticmethod
    def format_query(query: Query) -> str:
        """Render a query in the text format"""
        return "".join(f"q {edge.i} {edge.j} {edge.weight}\n" for edge in query)

    @classmethod
    def read_graph(cls, path: str | os.PathLike[str]) -> Graph:
        """Read and parse a graph file"""
        with open(path, encoding="utf-8") as graph_file:
            return cls.parse_graph(graph_file.read())

    @classmethod
    def read_query(cls, path: str | os.PathLike[str], *, directed: bool) -> Query:
        """Read and parse a query file"""
        with open(path, encoding="utf-8") as query_file:
            return cls.parse_query(query_file.read(), directed=directed)
