"""Hypothesis strategies for small graphs, queries and residue matrices"""

from __future__ import annotations

import itertools

from hypothesis import strategies as st

from dynsketch.graph import Graph, Query


@st.composite
def terminal_lists(draw: st.DrawFn, n: int, max_k: int, min_k: int = 1) -> list[int]:
    """Distinct terminals of an ``n``-vertex graph"""
    k = draw(st.integers(min(min_k, n), min(max_k, n)))
    return draw(st.permutations(range(n)))[:k]


@st.composite
def undirected_graphs(
    draw: st.DrawFn, max_n: int = 8, max_k: int = 3, max_weight: int = 1
) -> Graph:
    """Simple undirected graph with terminals and optional weights"""
    n = draw(st.integers(2, max_n))
    candidates = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(candidates), unique=True))
    weights = draw(
        st.lists(
            st.integers(1, max_weight), min_size=len(chosen), max_size=len(chosen)
        )
    )
    edges = [(u, v, w) for (u, v), w in zip(chosen, weights)]
    return Graph.build(n, edges, draw(terminal_lists(n, max_k)))


@st.composite
def st_digraphs(
    draw: st.DrawFn, max_n: int = 7, max_k: int = 2, max_capacity: int = 1
) -> Graph:
    """Directed capacitated graph with a designated source and sink that may be
    terminals"""
    n = draw(st.integers(3, max_n))
    candidates = list(itertools.permutations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(candidates), unique=True, max_size=14))
    capacities = draw(
        st.lists(
            st.integers(1, max_capacity), min_size=len(chosen), max_size=len(chosen)
        )
    )
    source, sink = draw(st.permutations(range(n)))[:2]
    return Graph.build(
        n,
        [(u, v, c) for (u, v), c in zip(chosen, capacities)],
        draw(terminal_lists(n, max_k)),
        directed=True,
        source=source,
        sink=sink,
    )


@st.composite
def queries(
    draw: st.DrawFn, k: int, *, directed: bool = False, max_weight: int = 1
) -> Query:
    """Subset of the terminal pairs of ``k`` terminals"""
    pairs = sorted(Query.all_pairs(k, directed=directed).pairs())
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    weights = draw(
        st.lists(
            st.integers(0 if directed else 1, max_weight),
            min_size=len(chosen),
            max_size=len(chosen),
        )
    )
    return Query.of(
        [(i, j, w) for (i, j), w in zip(chosen, weights)], directed=directed
    )


@st.composite
def integer_matrices(
    draw: st.DrawFn, max_rows: int = 5, max_cols: int = 5, bound: int = 5
) -> list[list[int]]:
    """Small integer matrix with entries in ``-bound..bound``"""
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    row = st.lists(st.integers(-bound, bound), min_size=cols, max_size=cols)
    return draw(st.lists(row, min_size=rows, max_size=rows))
