"""Graphs as 5-tuples (V, A, s, t, r) with half-edges, subdivisions and roses.

Every undirected edge is a pair of half-edges {a, r(a)} with
s(a) = t(r(a)), r(r(a)) = a and r(a) != a.  Vertex and half-edge identifiers
are arbitrary hashable values; constructions build nested tuples so that the
identifiers of derived graphs mirror the formulas that define them.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .errors import InvalidGraph, NotATree, UnknownVertex


def _order_key(x):
    return repr(x)


@dataclass
class Graph:
    V: list
    A: list
    s: dict
    t: dict
    r: dict

    # -- construction --------------------------------------------------------
    @classmethod
    def from_edges(cls, vertices, edges) -> "Graph":
        """Undirected edge list -> half-edge graph; edge i yields ('e', i, 0) and ('e', i, 1)."""
        V = list(dict.fromkeys(vertices))
        A, s, t, r = [], {}, {}, {}
        for i, (u, v) in enumerate(edges):
            a, b = ("e", i, 0), ("e", i, 1)
            A += [a, b]
            s[a], t[a], r[a] = u, v, b
            s[b], t[b], r[b] = v, u, a
        g = cls(V, A, s, t, r)
        g.validate()
        return g

    @classmethod
    def point(cls, v=0) -> "Graph":
        return cls([v], [], {}, {}, {})

    def validate(self) -> "Graph":
        Vs = set(self.V)
        if len(Vs) != len(self.V):
            raise InvalidGraph("duplicate vertices")
        if Vs & set(self.A):
            raise InvalidGraph("vertex and edge sets must be disjoint")
        for a in self.A:
            if a not in self.r or a not in self.s or a not in self.t:
                raise InvalidGraph(f"edge {a!r} lacks source, target or reverse")
            ra = self.r[a]
            if ra == a:
                raise InvalidGraph(f"edge {a!r} is its own reverse")
            if self.r.get(ra) != a:
                raise InvalidGraph(f"reverse is not an involution at {a!r}")
            if self.s[a] != self.t[ra]:
                raise InvalidGraph(f"s(a) != t(r(a)) at {a!r}")
            if self.s[a] not in Vs or self.t[a] not in Vs:
                raise InvalidGraph(f"edge {a!r} has an endpoint outside V")
        return self

    # -- queries -------------------------------------------------------------
    def valency(self, v) -> int:
        return sum(1 for a in self.A if self.s[a] == v)

    def adjacency(self) -> dict:
        adj = {v: [] for v in self.V}
        for a in self.A:
            adj[self.s[a]].append(self.t[a])
        return adj

    def edges(self) -> list[tuple]:
        """One (u, v) per undirected edge."""
        seen, out = set(), []
        for a in self.A:
            if a in seen:
                continue
            seen.add(a)
            seen.add(self.r[a])
            out.append((self.s[a], self.t[a]))
        return out

    def nodes(self) -> list:
        adj = self.adjacency()
        return [v for v in self.V if len(adj[v]) >= 3]

    def distances_from(self, root) -> dict:
        if root not in set(self.V):
            raise UnknownVertex(f"{root!r} is not a vertex")
        adj = self.adjacency()
        dist = {root: 0}
        q = deque([root])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def induced(self, keep) -> "Graph":
        keep = set(keep)
        A = [a for a in self.A if self.s[a] in keep and self.t[a] in keep]
        return Graph([v for v in self.V if v in keep], A, {a: self.s[a] for a in A},
                     {a: self.t[a] for a in A}, {a: self.r[a] for a in A})

    def truncate(self, root, R: int) -> "Graph":
        """Induced subgraph on vertices within distance R of root."""
        d = self.distances_from(root)
        return self.induced(v for v, k in d.items() if k <= R)

    def is_tree(self) -> bool:
        if not self.V:
            return False
        if len(self.A) != 2 * (len(self.V) - 1):
            return False
        return len(self.distances_from(self.V[0])) == len(self.V)

    def relabel(self, fv, fa=None) -> "Graph":
        fa = fa or (lambda a: a)
        return Graph([fv(v) for v in self.V], [fa(a) for a in self.A],
                     {fa(a): fv(self.s[a]) for a in self.A}, {fa(a): fv(self.t[a]) for a in self.A},
                     {fa(a): fa(self.r[a]) for a in self.A})

    # -- output --------------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({
            "V": [repr(v) for v in self.V],
            "A": [[repr(a), repr(self.s[a]), repr(self.t[a]), repr(self.r[a])] for a in self.A],
        }, separators=(",", ":"))

    def to_dot(self, name: str = "G", labels: dict | None = None, shapes: dict | None = None) -> str:
        ids = {v: f"n{i}" for i, v in enumerate(self.V)}
        lines = [f"graph {name} {{"]
        for v in self.V:
            text = str((labels or {}).get(v, v)).replace("\\", "\\\\").replace('"', '\\"')
            attrs = [f'label="{text}"']
            if shapes and v in shapes:
                attrs.append(f"shape={shapes[v]}")
            lines.append(f"  {ids[v]} [{', '.join(attrs)}];")
        for u, v in self.edges():
            lines.append(f"  {ids[u]} -- {ids[v]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subdivision
# ---------------------------------------------------------------------------

def subdivide(G: Graph, n: int) -> Graph:
    """The n-th subdivision G/n: every edge becomes a path with n edges.

    New vertices are classes (a, k)_V, k in 1..n-1, under (a, k) ~ (r(a), n-k);
    new half-edges are (a, k)_A, k in 0..n-1, with reverse (r(a), n-1-k)_A.
    """
    if n < 1:
        raise ValueError("subdivision order must be positive")
    G.validate()

    def vclass(a, k):
        u, w = (a, k), (G.r[a], n - k)
        rep = min(u, w, key=_order_key)
        return ("V", rep[0], rep[1])

    V = list(G.V)
    seen = set(V)
    for a in G.A:
        for k in range(1, n):
            c = vclass(a, k)
            if c not in seen:
                seen.add(c)
                V.append(c)
    if len(seen) != len(G.V) + (n - 1) * len(G.A) // 2:
        raise InvalidGraph("subdivision vertex names collide with existing vertices")
    A, s, t, r = [], {}, {}, {}
    for e in G.A:
        for k in range(n):
            a = ("A", e, k)
            A.append(a)
            r[a] = ("A", G.r[e], n - 1 - k)
            s[a] = G.s[e] if k == 0 else vclass(e, k)
            t[a] = G.t[e] if k == n - 1 else vclass(e, k + 1)
    return Graph(V, A, s, t, r).validate()


# ---------------------------------------------------------------------------
# trees, roses and attachment
# ---------------------------------------------------------------------------

def regular_tree_ball(valency: int, R: int, root=()) -> Graph:
    """Ball of radius R in the valency-regular tree; vertices are child-index paths."""
    verts, edges = [root], []
    frontier = [root]
    for depth in range(R):
        nxt = []
        for v in frontier:
            k = valency if depth == 0 else valency - 1
            for i in range(k):
                w = v + (i,)
                verts.append(w)
                edges.append((v, w))
                nxt.append(w)
        frontier = nxt
    return Graph.from_edges(verts, edges)


def path_graph(length: int) -> Graph:
    return Graph.from_edges(list(range(length + 1)), [(i, i + 1) for i in range(length)])


@dataclass
class Rose:
    """A finite tree with a distinguished center; optional level function."""

    graph: Graph
    center: object
    levels: dict = field(default_factory=dict)

    @property
    def t(self) -> int:
        return self.graph.valency(self.center)

    @property
    def radius(self) -> int:
        d = self.graph.distances_from(self.center)
        return max(d.values()) if d else 0

    def is_rose(self, t: int, r: int) -> bool:
        """Tree, center valency t, every path from the center of length <= r."""
        return self.graph.is_tree() and self.t == t and self.radius <= r


def build_rose(t: int, r: int) -> Rose:
    """The (t, r)-rose made of t paths of length r from the center."""
    verts, edges = ["c"], []
    for i in range(t):
        prev = "c"
        for k in range(1, r + 1):
            w = (i, k)
            verts.append(w)
            edges.append((prev, w))
            prev = w
    return Rose(Graph.from_edges(verts, edges), "c")


def rose_from_weighted_tree(center, weighted_edges) -> Rose:
    """Tree whose edge (u, v, w) stands for a path of w edges."""
    verts, edges = [center], []
    for i, (u, v, w) in enumerate(weighted_edges):
        for x in (u, v):
            if x not in verts:
                verts.append(x)
        prev = u
        for k in range(1, w):
            mid = ("mid", i, k)
            verts.append(mid)
            edges.append((prev, mid))
            prev = mid
        edges.append((prev, v))
    return Rose(Graph.from_edges(verts, edges), center)


# A (6,14)-rose with nested branching; the third entry of each edge is a path length.
FIGURE_ROSE_EDGES = [
    ("O", "a", 14), ("O", "b", 4), ("O", "c", 1), ("O", "e", 2), ("O", "g", 1), ("O", "h", 3),
    ("h", "h3", 3), ("h3", "h4", 1), ("h3", "h5", 1), ("h", "h6", 1), ("b", "b3", 10), ("b", "b4", 7),
]


def figure_rose() -> Rose:
    return rose_from_weighted_tree("O", FIGURE_ROSE_EDGES)


def build_full_rose(L) -> Rose:
    """Levels 1..e' are the elements of the residual centralizers; edges go to reductions."""
    from .residual import centralizer

    ep = L.eprime
    verts, edges, levels = ["c"], [], {"c": 0}
    tables = [centralizer(L, r) for r in range(1, ep + 1)]
    for r, T in enumerate(tables, start=1):
        lower = tables[r - 2].ring if r > 1 else None
        for x in T.elements():
            v = (r, x)
            verts.append(v)
            levels[v] = r
            edges.append(("c" if r == 1 else (r - 1, lower.reduce(x)), v))
    return Rose(Graph.from_edges(verts, edges), "c", levels)


def centralizer_residues(L) -> set:
    """Residue classes in F_{p^n} of elements of O_C, C the centralizer of L."""
    from .residual import centralizer_residue_image

    return centralizer_residue_image(L)


def build_restricted_rose(L, full: Rose | None = None) -> Rose:
    """Drop center edges to level-1 classes meeting O_C and keep the center's component."""
    full = full or build_full_rose(L)
    bad = centralizer_residues(L)
    n = L.alg.n
    g = full.graph
    drop = set()
    for a in g.A:
        u, v = g.s[a], g.t[a]
        for x, y in ((u, v), (v, u)):
            if x == "c" and full.levels.get(y) == 1 and tuple(y[1][:n]) in bad:
                drop.add(a)
    kept = Graph(g.V, [a for a in g.A if a not in drop], {a: g.s[a] for a in g.A if a not in drop},
                 {a: g.t[a] for a in g.A if a not in drop}, {a: g.r[a] for a in g.A if a not in drop})
    comp = kept.distances_from("c")
    sub = kept.induced(comp)
    return Rose(sub, "c", {v: full.levels[v] for v in sub.V})


def attach(G: Graph, at, rose: Rose) -> Graph:
    """Glue a copy of the rose at each listed vertex, identifying its center with the vertex."""
    Vs = set(G.V)
    for v in at:
        if v not in Vs:
            raise UnknownVertex(f"{v!r} is not a vertex of the graph")
    V, A = list(G.V), list(G.A)
    s, t, r = dict(G.s), dict(G.t), dict(G.r)
    rg = rose.graph
    for v in at:
        def fv(x, v=v):
            return v if x == rose.center else ("rose", v, x)

        for x in rg.V:
            if x != rose.center:
                V.append(fv(x))
        for a in rg.A:
            na = ("rose", v, a)
            A.append(na)
            s[na], t[na], r[na] = fv(rg.s[a]), fv(rg.t[a]), ("rose", v, rg.r[a])
    return Graph(V, A, s, t, r).validate()


# ---------------------------------------------------------------------------
# field-case windows
# ---------------------------------------------------------------------------

def _hang(verts, edges, base, label, depth: int, q: int):
    """Attach a complete q-ary tree of the given depth below a new vertex adjacent to base."""
    if depth <= 0:
        return
    root = label
    verts.append(root)
    edges.append((base, root))
    frontier = [root]
    for _ in range(depth - 1):
        nxt = []
        for v in frontier:
            for i in range(q):
                w = v + (i,)
                verts.append(w)
                edges.append((v, w))
                nxt.append(w)
        frontier = nxt


def thick_line(length: int, r: int, q: int) -> Graph:
    """Union of radius-r balls around a path of the given length in the (q+1)-regular tree."""
    verts = [("p", i) for i in range(length + 1)]
    edges = [(("p", i), ("p", i + 1)) for i in range(length)]
    for i in range(length + 1):
        path_deg = (i > 0) + (i < length)
        for j in range(q + 1 - path_deg):
            _hang(verts, edges, ("p", i), ("h", i, j), r, q)
    return Graph.from_edges(verts, edges)


def maximal_thick_line_window(r: int, q: int, R: int) -> tuple[Graph, object]:
    """Radius-R window, around a line vertex, of the r-thick maximal line."""
    g = thick_line(2 * (R + r), r, q)
    root = ("p", R + r)
    return g.truncate(root, R), root


def foliage_window(R: int, q: int) -> tuple[Graph, object]:
    """Radius-R window around nu(0) of the union of the balls B(nu(i), i) along a ray nu."""
    verts = [("ray", i) for i in range(R + 1)]
    edges = [(("ray", i), ("ray", i + 1)) for i in range(R)]
    for i in range(R + 1):
        off = q if i == 0 else q - 1
        depth = min(i, R - i)
        for j in range(off):
            _hang(verts, edges, ("ray", i), ("h", i, j), depth, q)
    return Graph.from_edges(verts, edges), ("ray", 0)


# ---------------------------------------------------------------------------
# rooted tree isomorphism
# ---------------------------------------------------------------------------

def canonical_encoding(G: Graph, root) -> str:
    """AHU encoding: each vertex is '(' + sorted child encodings + ')'."""
    if not G.is_tree():
        raise NotATree("canonical encoding needs a finite tree")
    adj = G.adjacency()
    order, parent = [], {root: None}
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for w in adj[u]:
            if w != parent[u]:
                parent[w] = u
                stack.append(w)
    enc = {}
    for u in reversed(order):
        kids = sorted(enc[w] for w in adj[u] if w != parent[u])
        enc[u] = "(" + "".join(kids) + ")"
    return enc[root]


def tree_iso(g1: Graph, root1, g2: Graph, root2) -> bool:
    return canonical_encoding(g1, root1) == canonical_encoding(g2, root2)


def subdues(G: Graph, H: Graph, bound: int, root_g=None, root_h=None) -> int | None:
    """Least n <= bound with G/n embedding in H as a rooted subtree, else None (trees only)."""
    for n in range(1, bound + 1):
        S = subdivide(G, n)
        rg = S.V[0] if root_g is None else root_g
        roots = H.V if root_h is None else [root_h]
        if any(_embeds(S, rg, H, rh) for rh in roots):
            return n
    return None


def _embeds(S: Graph, rs, H: Graph, rh) -> bool:
    """Rooted subtree embedding by backtracking over child assignments."""
    if not S.is_tree() or not H.is_tree():
        raise NotATree("embedding check is implemented for trees only")
    sa, ha = S.adjacency(), H.adjacency()

    def fits(u, pu, x, px):
        kids = [w for w in sa[u] if w != pu]
        cands = [y for y in ha[x] if y != px]
        if len(kids) > len(cands):
            return False
        return _match(kids, cands, lambda k, c: fits(k, u, c, x))

    return fits(rs, None, rh, None)


def _match(kids, cands, ok, used=None) -> bool:
    used = used or frozenset()
    if not kids:
        return True
    k = kids[0]
    for c in cands:
        if c not in used and ok(k, c):
            if _match(kids[1:], cands, ok, used | {c}):
                return True
    return False
