from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaybound.exceptions import InputError
from decaybound.lattice import (
    Graph,
    format_edge_list,
    make_lattice,
    parse_edge_list,
    perimeter_constant,
    subset_diameter,
)


@st.composite
def random_graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


def brute_gamma(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n_vertices))
    G.add_edges_from(g.edges)
    best = Fraction(0)
    for x, lengths in nx.all_pairs_shortest_path_length(G):
        for radius in set(lengths.values()) - {0}:
            size = sum(1 for d in lengths.values() if d == radius)
            best = max(best, Fraction(size, radius))
    return best


@pytest.mark.parametrize("kind,dims,gamma", [
    ("square", (7, 7), 4),
    ("triangular", (7, 7), 6),
    ("chain", 2, 1),
    ("chain", 9, 2),
    ("ring", 8, 2),
    ("hexagonal", (4, 4), 3),
])
def test_gamma_known_values(kind, dims, gamma):
    assert perimeter_constant(make_lattice(kind, dims)) == gamma


def test_gamma_argmax_is_first_maximiser():
    g = make_lattice("square", (7, 7))
    gamma, (x, ell) = perimeter_constant(g, return_argmax=True)
    assert gamma == 4 and ell == 1 and g.degree(x) == 4


def test_lattice_shapes():
    assert make_lattice("square", (3, 3), "periodic").n_edges == 18
    hexa = make_lattice("hexagonal", (3, 3), "periodic")
    assert {hexa.degree(v) for v in hexa.vertices} == {3}
    kag = make_lattice("kagome", (4, 4), "periodic")
    assert {kag.degree(v) for v in kag.vertices} == {4}
    assert perimeter_constant(kag) == Fraction(14, 3)
    assert make_lattice("triangular", (2, 2)).n_edges == 5


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_bfs_matches_networkx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n_vertices))
    G.add_edges_from(g.edges)
    lengths = dict(nx.all_pairs_shortest_path_length(G))
    for x in g.vertices:
        for y in g.vertices:
            assert g.distance(x, y) == lengths[x].get(y)


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_gamma_matches_brute_force(g):
    gamma = perimeter_constant(g)
    assert gamma == brute_gamma(g)
    # a shell at radius 1 is the neighbourhood
    assert gamma >= max((g.degree(v) for v in g.vertices), default=0)


@settings(max_examples=40, deadline=None)
@given(random_graphs())
def test_edge_list_roundtrip(g):
    assert parse_edge_list(format_edge_list(g)) == g


def test_distances_read_only_and_unreachable():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert g.distance(0, 2) is None
    assert not g.is_connected()
    with pytest.raises(ValueError):
        g.distances[0, 0] = 5


def test_subset_diameter():
    g = make_lattice("square", (3, 3))
    assert subset_diameter(g, [0, 8]) == 4
    assert subset_diameter(g, [4]) == 0
    with pytest.raises(InputError):
        subset_diameter(Graph.from_edges(3, [(0, 1)]), [0, 2])
    with pytest.raises(InputError):
        subset_diameter(g, [])


@pytest.mark.parametrize("edges,msg", [
    ([(0, 0)], "self-edge"),
    ([(0, 1), (1, 0)], "duplicate"),
    ([(0, 5)], "outside"),
])
def test_graph_rejects_bad_edges(edges, msg):
    with pytest.raises(InputError, match=msg):
        Graph.from_edges(3, edges)


@pytest.mark.parametrize("text,line", [
    ("3\n0 1\n", 1),
    ("n 3\n0 1\n0 x\n", 3),
    ("n 3\n# note\n0 1\n1 7\n", 4),
    ("n 3\n0 1 2\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(InputError, match=f":{line}:"):
        parse_edge_list(text)


def test_unknown_lattice_and_vertex():
    with pytest.raises(InputError):
        make_lattice("honeycomb", (3, 3))
    with pytest.raises(InputError):
        make_lattice("square", (0, 3))
    with pytest.raises(InputError):
        make_lattice("chain", 3).distance(0, 3)
    assert np.all(make_lattice("chain", 4).distances.diagonal() == 0)
