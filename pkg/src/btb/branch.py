"""Windowed branches: the maximal orders containing a finitely generated suborder.

A branch is convex, so its intersection with a ball around a branch vertex
is connected and a breadth-first search that only expands branch vertices
finds all of it.
"""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .bttree import ORIGIN, Vertex, ball_window, distance, neighbors
from .divalg import DivisionAlgebra
from .errors import PrecisionExhausted, SeedNotFound
from .graphkit import Graph, tree_iso
from .orders import (
    LatticeFrame,
    MaxOrder,
    contains,
    intersect_all,
    membership,
    membership_all,
    order_lattice_of,
)

ISOLATED, LEAF, BRIDGE, NODE, FRONTIER, IRREGULAR = (
    "Isolated", "Leaf", "Bridge", "Node", "FrontierUnknown", "Irregular")
CLASSES = (ISOLATED, LEAF, BRIDGE, NODE, FRONTIER, IRREGULAR)

DOT_SHAPES = {ISOLATED: "point", LEAF: "triangle", BRIDGE: "circle", NODE: "doublecircle",
              FRONTIER: "circle", IRREGULAR: "box"}

GUARD_DIGITS = 8


def required_precision(R: int, seed: Vertex = ORIGIN, t_max: int = 0) -> int:
    """Digits of pi-adic precision needed to decide membership on a window."""
    return 2 * (R + distance(seed, ORIGIN)) + t_max + GUARD_DIGITS


def check_precision(alg: DivisionAlgebra, R: int, seed: Vertex = ORIGIN, t_max: int = 0) -> None:
    need = required_precision(R, seed, t_max)
    if alg.cap < need:
        raise PrecisionExhausted(
            f"window of radius {R} around {seed.label()} needs n*M >= {need}, have {alg.cap}")


@dataclass
class BranchWindow:
    alg: DivisionAlgebra = field(repr=False)
    center: Vertex
    R: int
    classes: dict
    edges: list

    @property
    def verts(self) -> list[Vertex]:
        return sorted(self.classes)

    def __contains__(self, v) -> bool:
        return v in self.classes

    def __len__(self) -> int:
        return len(self.classes)

    def count(self) -> dict:
        c = Counter(self.classes.values())
        return {k: c.get(k, 0) for k in CLASSES}

    def adjacency(self) -> dict:
        adj = {v: [] for v in self.classes}
        for u, w in self.edges:
            adj[u].append(w)
            adj[w].append(u)
        return adj

    def interior(self) -> list[Vertex]:
        return [v for v in self.verts if self.classes[v] != FRONTIER]

    def to_graph(self) -> Graph:
        return Graph.from_edges(self.verts, self.edges)

    def to_json(self) -> str:
        return json.dumps({
            "center": self.center.to_json(),
            "radius": self.R,
            "p": self.alg.p,
            "n": self.alg.n,
            "counts": self.count(),
            "vertices": [{"id": v.node_id(), "vertex": v.to_json(), "class": self.classes[v],
                          "distance": distance(v, self.center)} for v in self.verts],
            "edges": [[u.node_id(), w.node_id()] for u, w in self.edges],
        }, sort_keys=True, indent=1)

    def to_dot(self, name: str = "branch") -> str:
        lines = [f"graph {name} {{"]
        for v in self.verts:
            cls = self.classes[v]
            attrs = [f'label="{v.label()}"', f"shape={DOT_SHAPES[cls]}"]
            if cls == FRONTIER:
                attrs.append("style=dashed")
            if v == self.center:
                attrs.append("penwidth=2")
            lines.append(f"  {v.node_id()} [{', '.join(attrs)}];")
        for u, w in self.edges:
            lines.append(f"  {u.node_id()} -- {w.node_id()};")
        lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------

def _defect(alg: DivisionAlgebra, v: Vertex, gens) -> int:
    """Total pole order of the frame conjugates of the generators at v."""
    D = MaxOrder(alg, v)
    g, ginv = D.frame
    total = 0
    for m in gens:
        for x in (ginv * m * g).entries():
            if not x.is_zero():
                total += max(0, -x.valuation())
    return total


def seed(alg: DivisionAlgebra, gens, hint: Vertex | None = None, max_steps: int = 64) -> Vertex:
    """A vertex whose maximal order contains every generator."""
    gens = list(gens)
    if hint is not None and membership_all(MaxOrder(alg, hint), gens) is True:
        return hint
    cur = ORIGIN
    cur_defect = _defect(alg, cur, gens)
    for _ in range(max_steps):
        if cur_defect == 0 and membership_all(MaxOrder(alg, cur), gens) is True:
            return cur
        best = min(((_defect(alg, w, gens), w) for w in neighbors(alg, cur)), key=lambda t: (t[0], t[1]))
        if best[0] >= cur_defect and cur_defect > 0:
            break
        cur, cur_defect = best[1], best[0]
    raise SeedNotFound(f"no containing vertex found within {max_steps} descent steps; supply a hint")


# ---------------------------------------------------------------------------
# branch computation
# ---------------------------------------------------------------------------

def _decide(alg, gens, v):
    res = membership_all(MaxOrder(alg, v), gens)
    if res is None:
        raise PrecisionExhausted(f"membership at {v.label()} is undecided at the working precision")
    return res


def _window_bfs(alg, start, R, center, test, parallel: bool):
    """Vertices of the test-branch within distance R of center, reached from start."""
    decided: dict = {}
    pool = ThreadPoolExecutor() if parallel else None

    def run(vs):
        vs = [v for v in vs if v not in decided]
        if pool is not None:
            results = list(pool.map(test, vs))
        else:
            results = [test(v) for v in vs]
        decided.update(zip(vs, results))

    try:
        start = sorted(set(start))
        run(start)
        inside = [v for v in start if decided[v]]
        seen = set(inside)
        frontier = inside
        while frontier:
            cand = []
            for v in frontier:
                for w in neighbors(alg, v):
                    if w not in seen and w not in decided and distance(w, center) <= R:
                        cand.append(w)
            cand = list(dict.fromkeys(cand))
            run(cand)
            frontier = [w for w in cand if decided[w]]
            seen.update(frontier)
        return seen, decided
    finally:
        if pool is not None:
            pool.shutdown()


def _classify(alg, center, R, verts) -> BranchWindow:
    q_n = alg.p ** alg.n
    classes, edges = {}, []
    vs = set(verts)
    for v in verts:
        nb = [w for w in neighbors(alg, v) if w in vs]
        for w in nb:
            if v < w:
                edges.append((v, w))
        if distance(v, center) >= R:
            classes[v] = FRONTIER
        else:
            k = len(nb)
            classes[v] = {0: ISOLATED, 1: LEAF, 2: BRIDGE}.get(k, NODE if k == q_n + 1 else IRREGULAR)
    edges.sort()
    return BranchWindow(alg, center, R, classes, edges)


def compute(alg: DivisionAlgebra, gens, seed_vertex: Vertex, R: int, parallel: bool = False,
            t_max: int = 0) -> BranchWindow:
    """The branch of O_K[gens] inside the radius-R ball around a seed it contains."""
    check_precision(alg, R, seed_vertex, t_max)
    gens = list(gens)
    if not _decide(alg, gens, seed_vertex):
        raise SeedNotFound(f"seed {seed_vertex.label()} does not contain the generators")
    verts, _ = _window_bfs(alg, [seed_vertex], R, seed_vertex, lambda v: _decide(alg, gens, v), parallel)
    win = _classify(alg, seed_vertex, R, verts)
    if not win.to_graph().is_tree():
        raise AssertionError("branch window is not connected")
    return win


def lattice_branch(frame: LatticeFrame, H, center: Vertex, R: int, start=None,
                   parallel: bool = False) -> BranchWindow:
    """Branch of an order given as a lattice: vertices whose order lattice contains it."""
    alg = frame.alg

    def test(v):
        return contains(order_lattice_of(frame, MaxOrder(alg, v)), H)

    verts, _ = _window_bfs(alg, start or [center], R, center, test, parallel)
    return _classify(alg, center, R, verts)


def frame_for_window(alg: DivisionAlgebra, center: Vertex, R: int) -> LatticeFrame:
    F = LatticeFrame.for_radius(alg, distance(center, ORIGIN) + R)
    if alg.M < F.Q + 2:
        raise PrecisionExhausted(f"lattice frame needs M >= {F.Q + 2}, have {alg.M}")
    return F


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Admissibility:
    status: str
    witness: Vertex | None
    branch: BranchWindow = field(repr=False)

    @property
    def exact(self) -> bool:
        return self.status == "ExactWithinWindow"


def admissible_check(alg: DivisionAlgebra, S, R: int, center: Vertex | None = None,
                     frame: LatticeFrame | None = None, parallel: bool = False) -> Admissibility:
    """Compare S with the branch of the intersection of its maximal orders, inside a window."""
    S = sorted(set(S))
    if not S:
        raise ValueError("S must be non-empty")
    center = S[0] if center is None else center
    F = frame or frame_for_window(alg, center, R)
    H = intersect_all(order_lattice_of(F, MaxOrder(alg, v)) for v in S)
    win = lattice_branch(F, H, center, R, start=S, parallel=parallel)
    extra = [v for v in ball_window(alg, center, R) if v in win and v not in set(S)]
    if extra:
        return Admissibility("StrictlyLarger", extra[0], win)
    return Admissibility("ExactWithinWindow", None, win)


# ---------------------------------------------------------------------------
# comparison and window queries
# ---------------------------------------------------------------------------

def compare(window: BranchWindow, predicted: Graph, root) -> bool:
    """Rooted isomorphism of the window with a prediction truncated to the same radius."""
    truth = window.to_graph()
    pred = predicted.truncate(root, window.R)
    if len(truth.V) != len(pred.V):
        return False
    return tree_iso(truth, window.center, pred, root)


def contains_ball(window: BranchWindow, radius: int) -> Vertex | None:
    """An interior vertex whose full radius-`radius` ball lies in the window, if any."""
    alg = window.alg
    for v in window.verts:
        if distance(v, window.center) + radius > window.R:
            continue
        if all(w in window for w in ball_window(alg, v, radius)):
            return v
    return None


def residual_valency(alg: DivisionAlgebra, v: Vertex, gens) -> int:
    """Branch neighbours of v counted directly, for cross-checks against residual line counts."""
    return sum(1 for w in neighbors(alg, v) if membership_all(MaxOrder(alg, w), gens) is True)


__all__ = [
    "Admissibility", "BRIDGE", "BranchWindow", "CLASSES", "FRONTIER", "ISOLATED", "IRREGULAR", "LEAF", "NODE",
    "admissible_check", "check_precision", "compare", "compute", "contains_ball", "frame_for_window",
    "lattice_branch", "membership", "required_precision", "residual_valency", "seed",
]
