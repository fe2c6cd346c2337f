import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from btb.divalg import DivisionAlgebra, SubalgebraSpec
from btb.errors import InvalidGraph, NotATree, UnknownVertex
from btb.graphkit import (
    Graph,
    attach,
    build_full_rose,
    build_restricted_rose,
    build_rose,
    canonical_encoding,
    figure_rose,
    foliage_window,
    maximal_thick_line_window,
    path_graph,
    regular_tree_ball,
    subdivide,
    subdues,
    thick_line,
    tree_iso,
)

from oracles import rooted_iso, to_multigraph

A = DivisionAlgebra.standard(2, 2, 12)

multigraphs = st.integers(1, 4).flatmap(lambda nv: st.builds(
    lambda es: Graph.from_edges(list(range(nv)), es),
    st.lists(st.tuples(st.integers(0, nv - 1), st.integers(0, nv - 1)), max_size=5)))


def iso(g, h):
    return nx.is_isomorphic(to_multigraph(g), to_multigraph(h))


@given(multigraphs, st.integers(1, 4))
def test_subdivision_satisfies_the_identities(G, n):
    S = subdivide(G, n)
    for a in S.A:
        assert S.s[a] == S.t[S.r[a]] and S.r[S.r[a]] == a and S.r[a] != a
    assert len(S.V) == len(G.V) + (n - 1) * len(G.A) // 2
    assert len(S.A) == n * len(G.A)


@given(multigraphs, st.integers(1, 3), st.integers(1, 3))
def test_subdivision_composes(G, a, b):
    assert iso(subdivide(subdivide(G, a), b), subdivide(G, a * b))


@given(multigraphs, st.integers(1, 4))
def test_subdivision_keeps_nodes_and_valencies(G, n):
    S = subdivide(G, n)
    assert S.nodes() == G.nodes()
    assert all(S.valency(v) == G.valency(v) for v in G.V)
    assert all(S.valency(v) == 2 for v in S.V if v not in set(G.V))


def test_subdivision_examples():
    G = Graph.from_edges(["a", "b"], [("a", "b")])
    assert iso(subdivide(G, 1), G)
    P = subdivide(G, 3)
    assert len(P.V) == 4 and iso(P, path_graph(3))
    loop = Graph.from_edges(["v"], [("v", "v")])
    assert iso(subdivide(loop, 3), nx_cycle(3))
    with pytest.raises(ValueError):
        subdivide(G, 0)


def nx_cycle(k):
    return Graph.from_edges(list(range(k)), [(i, (i + 1) % k) for i in range(k)])


def test_reverse_then_target_is_source():
    G = Graph.from_edges([0, 1, 2], [(0, 1), (1, 2), (1, 1)])
    for n in (2, 3, 5):
        S = subdivide(G, n)
        for a in S.A:
            assert S.t[S.r[a]] == S.s[a]


def test_invalid_graphs():
    with pytest.raises(InvalidGraph):
        Graph([0, 1], ["a"], {"a": 0}, {"a": 1}, {"a": "a"}).validate()
    with pytest.raises(InvalidGraph):
        Graph([0, 1], ["a", "b"], {"a": 0, "b": 0}, {"a": 1, "b": 0}, {"a": "b", "b": "a"}).validate()
    with pytest.raises(InvalidGraph):
        Graph([0, 0], [], {}, {}, {}).validate()
    with pytest.raises(InvalidGraph):
        subdivide(Graph([0], ["a"], {"a": 0}, {"a": 0}, {"a": "a"}), 2)


def test_regular_ball_sizes():
    for k, R in ((3, 3), (5, 2), (2, 4)):
        g = regular_tree_ball(k, R)
        expected = 1 + sum(k * (k - 1) ** (i - 1) for i in range(1, R + 1))
        assert len(g.V) == expected and g.is_tree()
        assert g.valency(()) == k


def test_roses():
    r = build_rose(3, 2)
    assert r.is_rose(3, 2) and not r.is_rose(3, 1) and len(r.graph.V) == 7
    fig = figure_rose()
    assert fig.is_rose(6, 14) and fig.radius == 14
    assert not fig.is_rose(5, 14)


def test_attach():
    G = path_graph(2)
    assert iso(attach(G, [1], build_rose(0, 0)), G)
    H = attach(G, [1], build_rose(2, 1))
    assert H.valency(1) == 4 and len(H.V) == 5
    H = attach(G, [0, 2], build_rose(1, 3))
    assert len(H.V) == 9 and H.is_tree()
    with pytest.raises(UnknownVertex):
        attach(G, [7], build_rose(1, 1))


def test_full_and_restricted_roses():
    B = SubalgebraSpec.full_algebra(A)
    assert build_restricted_rose(B).is_rose(2, 1)
    assert build_full_rose(B).t == 4
    F = SubalgebraSpec.unramified_field(A, 2)
    R = build_restricted_rose(F)
    assert R.t == 0 and len(R.graph.V) == 1
    full = build_full_rose(F)
    assert len(full.graph.V) == 1 + 4 + 4 and full.radius == 2
    K = SubalgebraSpec.trivial(A)
    assert len(build_full_rose(K).graph.V) == 1 + 4 + 16


def test_restricted_rose_attached_on_a_subdivided_tree():
    core = regular_tree_ball(3, 2)
    tree = attach(subdivide(core, 2), list(core.V), build_restricted_rose(SubalgebraSpec.full_algebra(A)))
    assert tree.is_tree()
    assert all(tree.valency(v) == 5 for v in core.V if core.valency(v) == 3)
    assert len(tree.V) == len(core.V) + len(core.A) // 2 + 2 * len(core.V)


def test_thick_line_and_foliage():
    assert iso(thick_line(4, 0, 2), path_graph(4))
    g = thick_line(2, 1, 2)
    assert len(g.V) == 3 + 2 + 1 + 2 and g.is_tree()
    fol, root = foliage_window(0, 2)
    assert len(fol.V) == 1
    fol, root = foliage_window(2, 2)
    # the ray's first vertex is a leaf of the foliage; later ray vertices are full
    assert fol.is_tree() and fol.valency(root) == 1 and fol.valency(("ray", 1)) == 3
    win, root = maximal_thick_line_window(1, 2, 3)
    assert win.is_tree() and max(win.distances_from(root).values()) == 3


def test_tree_iso():
    g = figure_rose().graph
    assert tree_iso(g, "O", g, "O")
    assert not tree_iso(build_rose(2, 1).graph, "c", build_rose(2, 2).graph, "c")
    assert not tree_iso(path_graph(2), 0, path_graph(2), 1)
    with pytest.raises(NotATree):
        canonical_encoding(nx_cycle(3), 0)


@given(st.integers(0, 2 ** 30))
def test_tree_iso_under_random_relabelling(seed):
    rng = random.Random(seed)
    base = regular_tree_ball(3, 3)
    keep = [v for v in base.V if rng.random() < 0.8 or len(v) <= 1]
    g = base.induced(set(keep))
    g = g.induced(g.distances_from(()))
    perm = list(g.V)
    rng.shuffle(perm)
    name = {v: perm.index(v) for v in g.V}
    h = g.relabel(lambda v: name[v])
    e = list(zip(h.edges(), range(len(h.edges()))))
    rng.shuffle(e)
    h = Graph.from_edges(sorted(h.V, key=lambda _: rng.random()), [x for x, _ in e])
    assert tree_iso(g, (), h, name[()])
    assert tree_iso(g, (), h, name[()]) == rooted_iso(g, (), h, name[()])


def test_subdues():
    star = build_rose(3, 1)
    assert subdues(star.graph, regular_tree_ball(3, 4), 3, "c", ()) == 1
    assert subdues(build_rose(4, 1).graph, regular_tree_ball(3, 4), 3, "c", ()) is None
    assert subdues(path_graph(1), path_graph(6), 5, 0, 0) == 1
    # adjacent nodes only fit once the pattern is stretched to the spacing of the host
    assert subdues(regular_tree_ball(3, 2), subdivide(regular_tree_ball(3, 3), 2), 3, (), ()) == 2


def test_serialization():
    g = path_graph(2)
    assert g.to_json() == path_graph(2).to_json()
    dot = g.to_dot(labels={0: 'a"b'})
    assert 'label="a\\"b"' in dot and dot.count("--") == 2
