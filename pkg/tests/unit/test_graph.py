"""Graph, query and text format unit tests"""

from __future__ import annotations

import itertools
import pathlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsketch.errors import (
    CapacityOverflowError,
    DynSketchError,
    FormatError,
    InvalidGraphError,
    InvalidQueryError,
    NegativeWeightError,
)
from dynsketch.fixtures import CutLbGadget
from dynsketch.graph import Edge, Graph, GraphFormat, Query, TerminalCut
from dynsketch.oracles import Oracle

from ..strategies import queries as st_queries
from ..strategies import st_digraphs, undirected_graphs

GRAPH_TEXT = """\
# path with a heavy middle edge
4 2 0
t 0
t 3
e 0 1
e 1 2 5   # trailing comment
e 2 3 2
"""


def test_build_defaults() -> None:
    """Missing weights are 1, edge ids follow input order"""
    graph = Graph.build(3, [(0, 1), (2, 1, 4)], [2])
    assert graph.edges == (Edge(0, 1, 1, 0), Edge(2, 1, 4, 1))
    assert (graph.n, graph.m, graph.k, graph.next_edge_id) == (3, 2, 1, 2)
    assert graph.edges[1].endpoints() == (1, 2)
    assert graph.terminal_index() == {2: 0}
    assert graph.total_weight() == 5


@pytest.mark.parametrize(
    "n, edges, terminals, extra, error",
    [
        (-1, [], [], {}, InvalidGraphError),
        (3, [(0, 3)], [], {}, InvalidGraphError),
        (3, [], [1, 1], {}, InvalidGraphError),
        (3, [], [5], {}, InvalidGraphError),
        (3, [(0, 1, -2)], [], {}, NegativeWeightError),
        (3, [(0, 1, 2, 3)], [], {}, DynSketchError),
        (3, [], [], {"source": 1, "sink": 1}, InvalidGraphError),
        (3, [], [], {"sink": 3}, InvalidGraphError),
    ],
)
def test_build_invalid(
    n: int,
    edges: list[tuple[int, ...]],
    terminals: list[int],
    extra: dict[str, int],
    error: type[Exception],
) -> None:
    """Structural violations are rejected at construction"""
    with pytest.raises(error):
        Graph.build(n, edges, terminals, **extra)


def test_duplicate_edge_ids() -> None:
    """Edge ids must be unique"""
    with pytest.raises(InvalidGraphError):
        Graph(2, (Edge(0, 1, 1, 0), Edge(0, 1, 1, 0)), ())


def test_apply_query() -> None:
    """Query edges map terminal indices to vertices and continue the edge ids"""
    graph = Graph.build(5, [(0, 1), (1, 2)], [4, 0, 2])
    query = Query.of([(2, 0, 7), (0, 1)])
    augmented = graph.apply_query(query)
    assert augmented.edges[2:] == (Edge(4, 0, 1, 2), Edge(4, 2, 7, 3))
    assert graph.m == 2


@pytest.mark.parametrize(
    "query",
    [Query.of([(0, 3)]), Query.of([(0, 1)], directed=True)],
)
def test_apply_query_invalid(query: Query) -> None:
    """Out-of-range indices and mismatched directions are rejected"""
    graph = Graph.build(4, [], [0, 1, 2])
    with pytest.raises(InvalidQueryError):
        graph.apply_query(query)


def test_expand_capacities() -> None:
    """Capacity ``c`` becomes ``c`` unit edges, zero capacity vanishes"""
    graph = Graph.build(3, [(0, 1, 3), (1, 2, 0), (2, 0, 1)], [0], directed=True)
    expanded = graph.expand_capacities()
    arcs = [(e.u, e.v, e.weight) for e in expanded.edges]
    assert arcs == [(0, 1, 1), (0, 1, 1), (0, 1, 1), (2, 0, 1)]
    assert [e.eid for e in expanded.edges] == [0, 1, 2, 3]
    with pytest.raises(CapacityOverflowError):
        graph.expand_capacities(max_edges=3)


def test_capacities() -> None:
    """Terminal capacity counts each terminal-incident edge once"""
    graph = Graph.build(
        4, [(0, 1, 2), (1, 0, 3), (2, 3, 4), (0, 3, 5)], [0, 3], directed=True
    )
    assert graph.terminal_capacity() == 14
    assert (graph.out_capacity(0), graph.in_capacity(0)) == (7, 3)
    assert (graph.out_capacity(3), graph.in_capacity(3)) == (0, 9)


@pytest.mark.parametrize(
    ("bits", "links", "capacity"),
    [([0] * 6, 12, 78), ([1] * 6, 24, 90), ([1, 0, 0, 1, 1, 0], 18, 84)],
)
def test_cut_fixture_capacity(bits: list[int], links: int, capacity: int) -> None:
    """``k' = 4``, ``N = 6``: ``C = k'N + (k + 1)N + m`` and ``t`` takes
    ``(k + 1)N``"""
    fixture = CutLbGadget.generate(4, bits)
    graph = fixture.graph
    assert (graph.k, len(fixture.bits)) == (6, 6)
    assert 4 * 6 + 7 * 6 + links == capacity
    assert graph.terminal_capacity() == capacity
    assert graph.in_capacity(graph.terminals[-1]) == 7 * 6


@given(
    st_digraphs(max_n=6, max_k=3, max_capacity=3).filter(lambda g: g.k >= 2)
    | undirected_graphs(max_n=6, max_k=3, max_weight=3).filter(lambda g: g.k >= 2)
)
@settings(max_examples=40, deadline=None)
def test_expand_capacities_keeps_cuts(graph: Graph) -> None:
    """Every terminal bipartition has the same minimum cut before and after
    expansion"""
    expanded = graph.expand_capacities()
    assert expanded.total_weight() == expanded.m == graph.total_weight()
    for size in range(1, graph.k):
        for a in itertools.combinations(range(graph.k), size):
            cut = TerminalCut.of(a, set(range(graph.k)) - set(a))
            assert (
                Oracle.terminal_cut(expanded, cut).value
                == Oracle.terminal_cut(graph, cut).value
            )


@given(undirected_graphs(max_k=4, max_weight=5), st.data())
def test_apply_query_reversible(graph: Graph, data: st.DataObject) -> None:
    """Dropping the appended query edges gives back the original graph"""
    query = data.draw(st_queries(graph.k, max_weight=5))
    augmented = graph.apply_query(query)
    assert augmented.m == graph.m + len(query)
    assert augmented.replace(edges=augmented.edges[: graph.m]) == graph


@given(st_digraphs(max_capacity=3), st.data())
def test_apply_directed_query_reversible(graph: Graph, data: st.DataObject) -> None:
    """Same for directed queries, source and sink included"""
    query = data.draw(st_queries(graph.k, directed=True, max_weight=3))
    augmented = graph.apply_query(query)
    assert (augmented.source, augmented.sink) == (graph.source, graph.sink)
    assert augmented.replace(edges=augmented.edges[: graph.m]) == graph


def test_to_directed_and_self_loops() -> None:
    """Undirected edges double into antiparallel arcs"""
    graph = Graph.build(3, [(0, 1, 2), (2, 2)], [0])
    directed = graph.to_directed()
    assert directed.directed
    assert [(e.u, e.v, e.weight) for e in directed.edges] == [
        (0, 1, 2),
        (1, 0, 2),
        (2, 2, 1),
        (2, 2, 1),
    ]
    assert directed.to_directed() is directed
    assert graph.without_self_loops().m == 1


def test_query_normalization() -> None:
    """Undirected pairs are stored ascending and sorted"""
    query = Query.of([(3, 1), (0, 2, 4)])
    assert [(e.i, e.j, e.weight) for e in query] == [(0, 2, 4), (1, 3, 1)]
    assert query.pairs() == {(0, 2), (1, 3)}
    assert len(query) == 2
    directed = Query.of([(3, 1), (1, 3)], directed=True)
    assert directed.pairs() == {(1, 3), (3, 1)}


@pytest.mark.parametrize(
    "edges, error",
    [
        ([(1, 1)], InvalidQueryError),
        ([(0, 1), (1, 0)], InvalidQueryError),
        ([(0, 1, -1)], NegativeWeightError),
    ],
)
def test_query_invalid(edges: list[tuple[int, ...]], error: type[Exception]) -> None:
    """Self-loops, duplicates and negative weights are rejected"""
    with pytest.raises(error):
        Query.of(edges)


@pytest.mark.parametrize(
    "k, directed, pairs, queries",
    [(0, False, 0, 1), (1, False, 0, 1), (3, False, 3, 8), (3, True, 6, 64)],
)
def test_all_pairs_and_enumeration(
    k: int, directed: bool, pairs: int, queries: int
) -> None:
    """``Q_all`` holds every pair, enumeration yields every subset once"""
    assert len(Query.all_pairs(k, directed=directed)) == pairs
    enumerated = list(Query.enumerate_all(k, directed=directed))
    assert len(enumerated) == queries
    assert len({query.edges for query in enumerated}) == queries
    assert len(enumerated[0]) == 0


def test_terminal_cut() -> None:
    """Parsing, rendering and validation of terminal bipartitions"""
    cut = TerminalCut.parse("b:1  A:2,0")
    assert cut == TerminalCut.of([0, 2], [1])
    assert str(cut) == "A:0,2 B:1"
    cut.validate(3)
    with pytest.raises(InvalidQueryError):
        cut.validate(2)


@pytest.mark.parametrize(
    "spec, error",
    [
        ("A:0", FormatError),
        ("A:0 C:1", FormatError),
        ("A:x B:1", FormatError),
        ("A: B:1", FormatError),
        ("A:0,1 B:1", InvalidQueryError),
    ],
)
def test_terminal_cut_invalid(spec: str, error: type[Exception]) -> None:
    """Malformed or overlapping sides are rejected"""
    with pytest.raises(error):
        TerminalCut.parse(spec)
    with pytest.raises(InvalidQueryError):
        TerminalCut.of([], [1])


def test_parse_graph() -> None:
    """Comments and blank lines are skipped, weights default to one"""
    graph = GraphFormat.parse_graph(GRAPH_TEXT)
    assert graph == Graph.build(4, [(0, 1), (1, 2, 5), (2, 3, 2)], [0, 3])


def test_parse_directed_graph() -> None:
    """Designated source and sink records"""
    text = "3 1 directed\nt 1\ns 0\nd 2\ne 0 1 4\n"
    graph = GraphFormat.parse_graph(text)
    assert (graph.directed, graph.source, graph.sink) == (True, 0, 2)
    assert GraphFormat.parse_graph(GraphFormat.format_graph(graph)) == graph


@pytest.mark.parametrize(
    "text, line",
    [
        ("", None),
        ("3 1\n", 1),
        ("x 1 0\n", 1),
        ("3 1 maybe\n", 1),
        ("3 1 0\nt\n", 2),
        ("3 1 0\nt 1 2\n", 2),
        ("3 1 0\nt 1\ne 0\n", 3),
        ("3 1 0\nt 1\ne 0 1 2 3\n", 3),
        ("3 1 0\nt 1\ne 0 y\n", 3),
        ("3 1 0\nt 1\ne 0 1 -1\n", 3),
        ("3 1 0\nt 1\nz 0 1\n", 3),
        ("3 2 0\nt 1\n", None),
        ("3 1 0\nt 3\n", None),
    ],
)
def test_parse_graph_invalid(text: str, line: int | None) -> None:
    """Malformed records report their line"""
    with pytest.raises(FormatError) as ex_info:
        GraphFormat.parse_graph(text)
    assert ex_info.value.line == line


def test_parse_query() -> None:
    """Query records, rendering and direction"""
    query = GraphFormat.parse_query("q 1 0 3\n\n# x\nq 1 2\n", directed=False)
    assert query == Query.of([(0, 1, 3), (1, 2)])
    assert GraphFormat.format_query(query) == "q 0 1 3\nq 1 2 1\n"
    with pytest.raises(FormatError):
        GraphFormat.parse_query("q 0 1\nq 1 0\n", directed=False)
    with pytest.raises(FormatError):
        GraphFormat.parse_query("e 0 1\n", directed=False)
    assert len(GraphFormat.parse_query("q 0 1\nq 1 0\n", directed=True)) == 2


def test_read_files(tmp_path: pathlib.Path) -> None:
    """Graphs and queries are read from UTF-8 files"""
    (tmp_path / "g.txt").write_text(GRAPH_TEXT, encoding="utf-8")
    (tmp_path / "q.txt").write_text("q 0 1 2\n", encoding="utf-8")
    assert GraphFormat.read_graph(tmp_path / "g.txt").m == 3
    assert GraphFormat.read_query(tmp_path / "q.txt", directed=True) == Query.of(
        [(0, 1, 2)], directed=True
    )


@given(undirected_graphs(max_weight=9))
def test_format_round_trip_undirected(graph: Graph) -> None:
    """Rendering and parsing reproduces the graph"""
    assert GraphFormat.parse_graph(GraphFormat.format_graph(graph)) == graph


@given(st_digraphs(max_capacity=3))
def test_format_round_trip_directed(graph: Graph) -> None:
    """Rendering and parsing reproduces the directed graph"""
    assert GraphFormat.parse_graph(GraphFormat.format_graph(graph)) == graph
