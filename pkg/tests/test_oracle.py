import random

import pytest

from btb.branch import compare, compute
from btb.bttree import ORIGIN, Mat2, Vertex, ball_window, distance
from btb.divalg import DivisionAlgebra, SubalgebraSpec
from btb.errors import HypothesisViolation
from btb.graphkit import Graph, path_graph
from btb.oracle import (
    Prediction,
    conjugate_order_check,
    core_residue_degree,
    figure7e_set,
    full_rose_structure,
    lemma51_lifts,
    predict_p21,
    predict_tha,
    predict_tho,
    scan_triples,
    thm11_generators,
)

A = DivisionAlgebra.standard(2, 2, 16)
A1 = DivisionAlgebra.standard(2, 1, 24)


def branch_of(L, R):
    gens = [Mat2.scalar(x) for x in L.generators] or [Mat2.scalar(A.zero())]
    return compute(A, gens, ORIGIN, R)


def test_prediction_validates_its_tag():
    with pytest.raises(ValueError):
        Prediction("Thm9.9", Graph.point(), 0)


@pytest.mark.parametrize("kind,valency,nodes_apart", [("full", 3, 2), ("unramified", 5, 2), ("ramified", 3, 1)])
def test_decorated_tree_shapes(kind, valency, nodes_apart):
    L = {"full": SubalgebraSpec.full_algebra(A), "unramified": SubalgebraSpec.unramified_field(A, 2),
         "ramified": SubalgebraSpec.ramified_by_power(A, 2)}[kind]
    pred = predict_tha(L, 3)
    assert pred.source == "Thm1.4" and pred.graph.is_tree()
    g = pred.graph
    adj = g.adjacency()
    if kind == "unramified":
        assert set(len(adj[v]) for v in g.V if v == ()) == {valency}
        assert core_residue_degree(L) == 2
    else:
        assert len(adj[()]) == valency + 2
        assert core_residue_degree(L) == 1
    assert compare(branch_of(L, 3), g, ())


def test_double_dimension_shapes():
    assert len(predict_tho(1, {"e": 1}).graph.V) == 1
    p2 = predict_tho(2, {"n": 2, "e": 2, "has_intermediate": True})
    assert len(p2.graph.V) == 3 and p2.root == 0
    p3 = predict_tho(3, {"R": 3})
    assert len(p3.graph.V) == 7 and p3.root == 3
    with pytest.raises(HypothesisViolation):
        predict_tho(2, {"n": 2, "e": 2})
    with pytest.raises(HypothesisViolation):
        predict_tho(1, {"e": 2})
    with pytest.raises(HypothesisViolation):
        predict_tho(3, {"R": 2, "is_field": True})
    with pytest.raises(ValueError):
        predict_tho(4)


def test_double_dimension_shapes_against_branches():
    w1 = compute(A, thm11_generators(A, 1), ORIGIN, 3)
    assert compare(w1, predict_tho(1).graph, 0)
    w2 = compute(A, thm11_generators(A, 2), ORIGIN, 3)
    pred = predict_tho(2, {"n": 2, "e": 2, "has_intermediate": True, "root_index": 0})
    assert compare(w2, pred.graph, pred.root)
    w3 = compute(A, thm11_generators(A, 3), ORIGIN, 4)
    pred = predict_tho(3, {"R": 4})
    assert compare(w3, pred.graph, pred.root)


def test_windows_in_the_field_case():
    zero = Mat2.scalar(A1.zero())
    full = compute(A1, [zero], ORIGIN, 3)
    pred = predict_p21(3, {"q": 2}, 3)
    assert compare(full, pred.graph, pred.root)
    nil = compute(A1, [Mat2.elementary(A1, 0, 1)], ORIGIN, 4)
    pred = predict_p21(2, {"q": 2}, 4)
    assert compare(nil, pred.graph, pred.root)
    split = compute(A1, [Mat2.diag(A1.one(), A1.zero())], ORIGIN, 3)
    pred = predict_p21(1, {"q": 2, "r": 0}, 3)
    assert compare(split, pred.graph, pred.root)
    assert compare(split, path_graph(6), 3)
    thick = compute(A1, [Mat2.diag(A1.one(), A1.scalar(1 + 2))], ORIGIN, 3)
    pred = predict_p21(1, {"q": 2, "r": 1}, 3)
    assert compare(thick, pred.graph, pred.root)
    with pytest.raises(ValueError):
        predict_p21(4, {}, 2)


def test_full_rose_structure_small():
    for L, counts in ((SubalgebraSpec.full_algebra(A), (1, 4)),
                      (SubalgebraSpec.unramified_field(A, 2), (1, 4, 4)),
                      (SubalgebraSpec.trivial(A), (1, 4, 16))):
        st = full_rose_structure(L)
        assert st.ok and st.counts == counts
    assert full_rose_structure(SubalgebraSpec.trivial(A)).node_levels == (0, 1)


def test_lifts_small():
    assert lemma51_lifts(SubalgebraSpec.full_algebra(A)) == 4
    assert lemma51_lifts(SubalgebraSpec.ramified_by_power(A, 2)) == 4


def test_triple_scan_radius_one_is_not_strict():
    # D^[1] is itself cut out by three neighbours of the origin, so level 2 is where strictness starts
    res = scan_triples(A, t=1)
    assert res.total == 20
    assert any(why == "equal to D^[t]" for _, why in res.failures)
    assert all(why == "equal to D^[t]" for _, why in res.failures)


def test_conjugate_orders_beyond_triples():
    rng = random.Random(5)
    ball = ball_window(A, ORIGIN, 2)
    for _ in range(20):
        vs = rng.sample(ball, 3)
        assert conjugate_order_check(A, *vs) is True


def test_five_end_configuration():
    S, forced = figure7e_set(A)
    assert len(S) == 10 and forced not in S
    assert forced == Vertex(2, ((0, (1, 1)),))
    assert all(distance(v, ORIGIN) <= 2 for v in S)
