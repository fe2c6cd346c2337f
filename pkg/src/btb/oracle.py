"""Predicted branch shapes, as finite rooted graphs, plus the structural checks behind them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .bttree import (
    INF,
    Mat2,
    ORIGIN,
    Vertex,
    ball_window,
    ends_beyond,
    triple_transporter,
    vertex_from_ball,
)
from .divalg import DivisionAlgebra, SubalgebraSpec, ramification_data
from .errors import HypothesisViolation
from .graphkit import (
    Graph,
    Rose,
    attach,
    build_full_rose,
    build_restricted_rose,
    centralizer_residues,
    foliage_window,
    maximal_thick_line_window,
    path_graph,
    regular_tree_ball,
    subdivide,
)
from .orders import (
    LatticeFrame,
    MaxOrder,
    contains,
    d_tower,
    intersect,
    membership_all,
    order_lattice_of,
    scalar_generators,
)
from .residual import centralizer, lift_residue_to_centralizer

TAGS = ("Thm1.1case1", "Thm1.1case2", "Thm1.1case3", "Thm1.4", "Prop2.1type1", "Prop2.1type2",
        "Prop2.1type3", "Thm5.2")


@dataclass
class Prediction:
    source: str
    graph: Graph
    root: object

    def __post_init__(self):
        if self.source not in TAGS:
            raise ValueError(f"unknown prediction tag {self.source!r}")
        self.graph.validate()


# ---------------------------------------------------------------------------
# attached roses on a subdivided tree
# ---------------------------------------------------------------------------

def core_residue_degree(L: SubalgebraSpec) -> int:
    """Residue degree of the centralizer C, read off the residues of O_C."""
    return round(math.log(len(centralizer_residues(L)), L.alg.p))


def predict_tha(L: SubalgebraSpec, R: int) -> Prediction:
    """Subdivided tree of the centralizer with restricted roses at its nodes, cut to radius R."""
    alg = L.alg
    e, f, _, _ = ramification_data(L)
    fC = core_residue_degree(L)
    if fC != L.eprime:
        raise HypothesisViolation(f"centralizer residue degree {fC} differs from e' = {L.eprime}")
    core = regular_tree_ball(alg.p ** fC + 1, -(-R // f), root=())
    nodes = list(core.V)
    tree = subdivide(core, f)
    rose = build_restricted_rose(L)
    if rose.t:
        tree = attach(tree, nodes, rose)
    return Prediction("Thm1.4", tree.truncate((), R), ())


def predict_tho(case: int, params: dict | None = None) -> Prediction:
    """Shapes for 2n-dimensional commutative semisimple L in M_2(B).

    params: n, e (ramification of L/K), is_field, has_intermediate (a degree-n
    subfield F with e(L/F) = 2), root_index (position of the seed on the path)
    and R (window radius, case 3).
    """
    params = dict(params or {})
    is_field = params.get("is_field", case != 3)
    if case == 1:
        e = params.get("e", 1)
        if not is_field or e % 2 == 0:
            raise HypothesisViolation("case 1 needs a field with odd ramification index")
        return Prediction("Thm1.1case1", Graph.point(0), 0)
    if case == 2:
        n, e = params["n"], params["e"]
        if not is_field or not params.get("has_intermediate", False):
            raise HypothesisViolation("case 2 needs a field containing a degree-n F with e(L/F) = 2")
        if (2 * n) % e:
            raise HypothesisViolation("2n must be divisible by e(L/K)")
        length = 2 * n // e
        return Prediction("Thm1.1case2", path_graph(length), params.get("root_index", 0))
    if case == 3:
        if is_field:
            raise HypothesisViolation("case 3 needs L split (not a field)")
        R = params["R"]
        g = path_graph(2 * R)
        return Prediction("Thm1.1case3", g, R)
    raise ValueError("case must be 1, 2 or 3")


def predict_p21(kind: int, params: dict | None, window: int) -> Prediction:
    """Field case B = K: thick line, foliage, or the whole tree, as a window of radius `window`."""
    params = dict(params or {})
    q = params.get("q", 2)
    if kind == 1:
        g, root = maximal_thick_line_window(params.get("r", 0), q, window)
        return Prediction("Prop2.1type1", g, root)
    if kind == 2:
        g, root = foliage_window(window, q)
        return Prediction("Prop2.1type2", g, root)
    if kind == 3:
        return Prediction("Prop2.1type3", regular_tree_ball(q + 1, window), ())
    raise ValueError("type must be 1, 2 or 3")


# ---------------------------------------------------------------------------
# full rose structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoseStructure:
    counts: tuple
    node_levels: tuple
    expected_node_levels: tuple
    uniform: bool

    @property
    def ok(self) -> bool:
        return self.uniform and self.node_levels == self.expected_node_levels


def full_rose_structure(L: SubalgebraSpec, rose: Rose | None = None) -> RoseStructure:
    """Levels carrying nodes, and whether every vertex of a level has the same valency."""
    alg = L.alg
    rose = rose or build_full_rose(L)
    q_n = alg.p ** alg.n
    ep, f = L.eprime, L.f
    g = rose.graph
    by_level: dict = {}
    for v in g.V:
        by_level.setdefault(rose.levels[v], []).append(v)
    adj = g.adjacency()
    counts = tuple(len(by_level.get(r, [])) for r in range(ep + 1))
    node_levels, uniform = [], True
    for r in range(ep + 1):
        vals = {len(adj[v]) - (r > 0) for v in by_level.get(r, [])}
        uniform &= len(vals) == 1
        if vals == {q_n}:
            node_levels.append(r)
        elif r < ep and vals != {1}:
            uniform = False
    expected = tuple(r for r in range(ep) if r % f == 0)
    return RoseStructure(counts, tuple(node_levels), expected, uniform)


def lemma51_lifts(L: SubalgebraSpec) -> int:
    """Lift every residue class of F_{p^n} to the level-e' centralizer; returns how many were lifted."""
    F = L.alg.field
    table = centralizer(L, L.eprime)
    done = 0
    for b in F.elements():
        x = lift_residue_to_centralizer(b, L, table=table)
        if not table.contains(x):
            raise AssertionError("lift lies outside the centralizer")
        done += 1
    return done


# ---------------------------------------------------------------------------
# three-order intersections and conjugates of O_B
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TripleScan:
    total: int
    failures: tuple
    witnesses: dict


def scan_triples(alg: DivisionAlgebra, t: int = 2, parallel: bool = False) -> TripleScan:
    """Every triple of vertices of the radius-t ball: is D^[t] strictly inside their intersection?"""
    F = LatticeFrame.for_radius(alg, t)
    ball = ball_window(alg, ORIGIN, t)
    lats = {v: order_lattice_of(F, MaxOrder(alg, v)) for v in ball}
    Dt = d_tower(F, MaxOrder(alg, ORIGIN), t)
    pairs = {}
    for u, v in itertools.combinations(ball, 2):
        pairs[(u, v)] = intersect(lats[u], lats[v])

    def one(tri):
        u, v, w = tri
        H = intersect(pairs[(u, v)], lats[w])
        if not contains(H, Dt):
            return tri, None, "D^[t] not contained"
        if contains(Dt, H):
            return tri, None, "equal to D^[t]"
        for row in H.howell.rows:
            if not Dt.howell.contains_vector(row):
                return tri, [int(x) for x in row], None
        return tri, None, "no witness row"

    triples = list(itertools.combinations(ball, 3))
    if parallel:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(one, triples))
    else:
        results = [one(tr) for tr in triples]
    failures = tuple((tr, why) for tr, _, why in results if why)
    witnesses = {tr: w for tr, w, why in results if not why}
    return TripleScan(len(triples), failures, witnesses)


def conjugate_order_check(alg: DivisionAlgebra, v1: Vertex, v2: Vertex, v3: Vertex) -> bool | None:
    """Ends beyond three vertices give a conjugate of O_B sitting in all three maximal orders."""
    e1, e2, e3 = ends_beyond(alg, v1, v2, v3)
    g = triple_transporter(alg, e1, e2, e3)
    ginv = g.inverse()
    gens = [g * m * ginv for m in scalar_generators(alg)]
    out = True
    for v in (v1, v2, v3):
        r = membership_all(MaxOrder(alg, v), gens)
        if r is not True:
            out = r if out is True else out
            if r is False:
                return False
    return out


# ---------------------------------------------------------------------------
# canonical scenario data
# ---------------------------------------------------------------------------

def figure7e_set(alg: DivisionAlgebra, a=None) -> tuple[list[Vertex], Vertex]:
    """The non-admissible configuration through the ends inf, 0, 1, a, 1+a, and the vertex it forces."""
    if a is None:
        a = alg.omega()
    one = alg.one()
    S = {ORIGIN, Vertex(-1, ()), Vertex(-2, ())}
    for t in (alg.zero(), one, a):
        S.add(vertex_from_ball(alg, 1, t))
        S.add(vertex_from_ball(alg, 2, t))
    S.add(vertex_from_ball(alg, 1, one + a))
    forced = vertex_from_ball(alg, 2, one + a)
    return sorted(S), forced


def thm11_generators(alg: DivisionAlgebra, case: int, eps=None) -> list[Mat2]:
    """Generators of O_L for the three shapes, with L built over F = K[omega] by companion matrices."""
    one, zero = alg.one(), alg.zero()
    w = alg.omega()
    scalar = Mat2.scalar(w)
    if case == 1:
        # y^2 + y + omega is irreducible over the residue field of F
        return [scalar, Mat2(zero, -w, one, -one)]
    if case == 2:
        eps = one if eps is None else eps
        pF = alg.scalar(alg.p)
        return [scalar, Mat2(zero, -pF, one, -(eps * pF))]
    if case == 3:
        return [scalar, Mat2.diag(one, zero)]
    raise ValueError("case must be 1, 2 or 3")


__all__ = [
    "INF", "Prediction", "RoseStructure", "TAGS", "TripleScan", "conjugate_order_check", "core_residue_degree",
    "figure7e_set", "full_rose_structure", "lemma51_lifts", "predict_p21", "predict_tha", "predict_tho",
    "scan_triples", "thm11_generators",
]
