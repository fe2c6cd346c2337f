import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btb.branch import (
    BRIDGE,
    CLASSES,
    FRONTIER,
    ISOLATED,
    LEAF,
    NODE,
    admissible_check,
    check_precision,
    compare,
    compute,
    contains_ball,
    required_precision,
    residual_valency,
    seed,
)
from btb.bttree import ORIGIN, Mat2, Vertex, ball_window, distance, geodesic
from btb.divalg import DivisionAlgebra
from btb.errors import PrecisionExhausted, SeedNotFound
from btb.graphkit import path_graph, regular_tree_ball
from btb.oracle import figure7e_set, thm11_generators
from btb.orders import MaxOrder, d_tower_gens, scalar_generators
from btb.residual import invariant_line_count

A = DivisionAlgebra.standard(2, 2, 16)
E12 = Mat2.elementary(A, 0, 1)


def std_gens(alg=A):
    return [Mat2.elementary(alg, i, j, b) for i in range(2) for j in range(2) for b in alg.basis()]


def conj(g, gens):
    ginv = g.inverse()
    return [g * m * ginv for m in gens]


GEN_SETS = {
    "scalar": scalar_generators(A),
    "nilpotent": [E12],
    "diag": [Mat2.diag(A.one(), A.zero())],
    "omega": [Mat2.scalar(A.omega())],
    "mixed": [Mat2.scalar(A.omega()), E12],
    "case1": thm11_generators(A, 1),
    "case3": thm11_generators(A, 3),
}


def test_seed_examples():
    assert seed(A, scalar_generators(A)) == ORIGIN
    assert seed(A, std_gens()) == ORIGIN
    g = Mat2.diag(A.pi(), A.one())
    assert seed(A, conj(g, std_gens())) == Vertex(1, ())
    far = Mat2.diag(A.pi(3), A.one())
    assert seed(A, conj(far, std_gens())) == Vertex(3, ())
    assert seed(A, [E12], hint=Vertex(-2, ())) == Vertex(-2, ())
    with pytest.raises(SeedNotFound):
        seed(A, conj(far, std_gens()), max_steps=2)


def test_trivial_order_fills_the_window():
    win = compute(A, [Mat2(A.zero(), A.zero(), A.zero(), A.zero())], ORIGIN, 3)
    assert len(win) == len(ball_window(A, ORIGIN, 3))
    counts = win.count()
    assert counts[NODE] == len(ball_window(A, ORIGIN, 2)) and counts[FRONTIER] == 5 * 4 * 4


def test_unramified_quartic_field_is_isolated():
    win = compute(A, thm11_generators(A, 1), ORIGIN, 3)
    assert win.verts == [ORIGIN] and win.classes[ORIGIN] == ISOLATED


def test_scalar_branch():
    win = compute(A, scalar_generators(A), ORIGIN, 4)
    c = win.count()
    assert len(win) == 27
    assert c[NODE] + c[BRIDGE] + c[LEAF] + c[FRONTIER] == 27
    assert compare(win, win.to_graph(), ORIGIN)
    assert not compare(win, path_graph(8), 4)


@pytest.mark.parametrize("t", [1, 2])
def test_d_tower_branch_is_a_ball(t):
    win = compute(A, d_tower_gens(A, MaxOrder(A, ORIGIN), t), ORIGIN, t + 2)
    assert set(win.verts) == set(ball_window(A, ORIGIN, t))
    for v in win.verts:
        expected = NODE if distance(v, ORIGIN) < t else LEAF
        assert win.classes[v] == expected


@pytest.mark.parametrize("small,large", [("scalar", "mixed"), ("nilpotent", "mixed"), ("omega", "mixed"),
                                         ("omega", "case1"), ("diag", "case3")])
def test_monotonicity(small, large):
    w_small = compute(A, GEN_SETS[small], ORIGIN, 3)
    w_large = compute(A, GEN_SETS[large], ORIGIN, 3)
    assert set(w_large.verts) <= set(w_small.verts)


@pytest.mark.parametrize("name", sorted(GEN_SETS))
def test_convexity(name):
    win = compute(A, GEN_SETS[name], ORIGIN, 3)
    vs = set(win.verts)
    for u, v in itertools.combinations(win.verts, 2):
        assert set(geodesic(u, v)) <= vs


def residue_matrices(v, gens):
    g, ginv = MaxOrder(A, v).frame
    out = []
    for m in gens:
        c = ginv * m * g
        out.append(tuple(x.residue() for x in c.entries()))
    return out


@pytest.mark.parametrize("name", sorted(GEN_SETS))
def test_valency_counts_invariant_lines(name):
    gens = GEN_SETS[name]
    win = compute(A, gens, ORIGIN, 2)
    adj = win.adjacency()
    for v in win.interior():
        lines = invariant_line_count(A, residue_matrices(v, gens))
        assert lines == len(adj[v]) == residual_valency(A, v, gens)


def test_classes_follow_window_valency():
    for name, gens in GEN_SETS.items():
        win = compute(A, gens, ORIGIN, 3)
        adj = win.adjacency()
        for v, cls in win.classes.items():
            if distance(v, ORIGIN) == 3:
                assert cls == FRONTIER
            else:
                assert cls == {0: ISOLATED, 1: LEAF, 2: BRIDGE, 5: NODE}[len(adj[v])]


def test_admissibility():
    for t in (1, 2):
        res = admissible_check(A, ball_window(A, ORIGIN, t), 3, center=ORIGIN)
        assert res.exact and res.witness is None
    assert admissible_check(A, [Vertex(1, ((0, (0, 1)),))], 2).exact
    S, forced = figure7e_set(A)
    res = admissible_check(A, S, 3, center=ORIGIN)
    assert res.status == "StrictlyLarger" and res.witness == forced
    pair = admissible_check(A, [ORIGIN, Vertex(2, ())], 3, center=ORIGIN)
    assert pair.status == "StrictlyLarger" and pair.witness == Vertex(1, ())


def test_contains_ball():
    win = compute(A, [Mat2(A.zero(), A.zero(), A.zero(), A.zero())], ORIGIN, 3)
    v = contains_ball(win, 2)
    assert v is not None and distance(v, ORIGIN) <= 1
    assert contains_ball(win, 4) is None
    scal = compute(A, scalar_generators(A), ORIGIN, 4)
    assert contains_ball(scal, 2) is None


def test_precision_policy():
    assert required_precision(4) == 16
    assert required_precision(4, Vertex(2, ()), 2) == 22
    low = DivisionAlgebra.standard(2, 2, 4)
    with pytest.raises(PrecisionExhausted):
        check_precision(low, 4)
    with pytest.raises(PrecisionExhausted):
        compute(low, scalar_generators(low), ORIGIN, 4)
    with pytest.raises(SeedNotFound):
        compute(A, conj(Mat2.diag(A.pi(), A.one()), std_gens()), ORIGIN, 2)


def test_parallel_equals_serial():
    for gens in (scalar_generators(A), [E12]):
        a = compute(A, gens, ORIGIN, 3)
        b = compute(A, gens, ORIGIN, 3, parallel=True)
        assert a.to_json() == b.to_json() and a.to_dot() == b.to_dot()


def test_serialization():
    win = compute(A, scalar_generators(A), ORIGIN, 2)
    data = json.loads(win.to_json())
    assert data["radius"] == 2 and sum(data["counts"].values()) == len(win)
    assert set(data["counts"]) == set(CLASSES)
    assert len(data["edges"]) == len(win) - 1
    dot = win.to_dot()
    assert dot.startswith("graph branch {") and dot.count(" -- ") == len(win) - 1
    assert "style=dashed" in dot and "shape=doublecircle" in dot
