"""The Bruhat-Tits tree of M_2(B) as the tree of closed balls in B.

A vertex is a ball ``c + pi^r O_B``.  Its canonical form keeps the radius
exponent ``r`` and the nonzero pi-adic digits of ``c`` at indices below ``r``
(digits are coefficient-wise {0..p-1} lifts of residue field elements).  The
ball corresponds to the lattice spanned by the columns of
``[[pi^r, c], [0, 1]]`` and to its endomorphism ring, a maximal order.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .divalg import EXACT, DivAlgElem, DivisionAlgebra, d_inv
from .errors import DegenerateTriple, NotFullRank, PrecisionExhausted, ZeroDivisor


@dataclass(frozen=True, order=True)
class Vertex:
    """Canonical ball: radius exponent r and sorted (index, digit) pairs with index < r."""

    r: int
    center: tuple = ()

    def digit(self, i: int, n: int):
        for j, d in self.center:
            if j == i:
                return d
        return (0,) * n

    def digit_map(self) -> dict:
        return dict(self.center)

    def to_json(self) -> dict:
        return {"r": self.r, "center": [[i, list(d)] for i, d in self.center]}

    @classmethod
    def from_json(cls, d: dict) -> "Vertex":
        return cls(int(d["r"]), tuple((int(i), tuple(int(v) for v in dig)) for i, dig in d["center"]))

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def node_id(self) -> str:
        """Stable DOT identifier derived from the canonical serialization."""
        return "v" + hashlib.sha1(self.key().encode()).hexdigest()[:12]

    def label(self) -> str:
        if not self.center:
            return f"({self.r},0)"
        parts = ",".join(f"{i}:{''.join(map(str, d))}" for i, d in self.center)
        return f"({self.r},{parts})"


ORIGIN = Vertex(0, ())


class Infinity:
    """The end of rays of increasing radius."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "inf"


INF = Infinity()


def is_inf(e) -> bool:
    return e is INF


class Mat2:
    """2x2 matrix over B; entries are DivAlgElem."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: DivAlgElem, b: DivAlgElem, c: DivAlgElem, d: DivAlgElem):
        self.a, self.b, self.c, self.d = a, b, c, d

    @property
    def alg(self) -> DivisionAlgebra:
        return self.a.alg

    @classmethod
    def identity(cls, alg: DivisionAlgebra) -> "Mat2":
        return cls(alg.one(), alg.zero(), alg.zero(), alg.one())

    @classmethod
    def scalar(cls, x: DivAlgElem) -> "Mat2":
        z = x.alg.zero()
        return cls(x, z, z, x)

    @classmethod
    def diag(cls, x: DivAlgElem, y: DivAlgElem) -> "Mat2":
        z = x.alg.zero()
        return cls(x, z, z, y)

    @classmethod
    def elementary(cls, alg: DivisionAlgebra, i: int, j: int, x: DivAlgElem | None = None) -> "Mat2":
        x = alg.one() if x is None else x
        z = alg.zero()
        ent = [z, z, z, z]
        ent[2 * i + j] = x
        return cls(*ent)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __add__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    def __sub__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, o):
        if isinstance(o, Mat2):
            return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                        self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)
        if isinstance(o, (DivAlgElem, int)):
            return Mat2(self.a * o, self.b * o, self.c * o, self.d * o)
        return NotImplemented

    def __rmul__(self, o):
        if isinstance(o, (DivAlgElem, int)):
            return Mat2(o * self.a, o * self.b, o * self.c, o * self.d)
        return NotImplemented

    def inverse(self) -> "Mat2":
        """Block inverse pivoting on the left-column entry of smaller valuation."""
        a, b, c, d = self.entries()
        if a.is_zero() and c.is_zero():
            raise NotFullRank("first column vanishes")
        swap = a.is_zero() or (not c.is_zero() and c.lo < a.lo)
        if swap:
            a, b, c, d = c, d, a, b
        ai = d_inv(a)
        s = d - c * ai * b
        if s.is_zero():
            raise NotFullRank("Schur complement vanishes")
        si = d_inv(s)
        aib = ai * b
        cai = c * ai
        inv = Mat2(ai + aib * si * cai, -(aib * si), -(si * cai), si)
        if swap:
            # inverse of P m is m^-1 P^-1, so m^-1 = inv * P
            inv = Mat2(inv.b, inv.a, inv.d, inv.c)
        return inv

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.entries())

    def min_precision(self) -> int:
        return min(x.N for x in self.entries())

    def __repr__(self):
        return f"Mat2({self.a!r}, {self.b!r}; {self.c!r}, {self.d!r})"


# ---------------------------------------------------------------------------
# vertices
# ---------------------------------------------------------------------------

def center_element(alg: DivisionAlgebra, v: Vertex) -> DivAlgElem:
    if not v.center:
        return alg.zero()
    lo = v.center[0][0]
    digits = [(0,) * alg.n] * (v.r - lo)
    for i, d in v.center:
        digits[i - lo] = d
    return alg.from_digits(lo, digits)


def vertex_from_ball(alg: DivisionAlgebra, r: int, c: DivAlgElem) -> Vertex:
    """Canonical vertex of the ball c + pi^r O_B."""
    if c.is_zero():
        if c.N < r:
            raise PrecisionExhausted(f"center known mod pi^{c.N}, ball radius needs {r}")
        return Vertex(r, ())
    if c.N < r:
        raise PrecisionExhausted(f"center known mod pi^{c.N}, ball radius needs {r}")
    zero = (0,) * alg.n
    items = tuple((i, c.digit(i)) for i in range(c.lo, r) if c.digit(i) != zero)
    return Vertex(r, items)


def parent(v: Vertex) -> Vertex:
    return Vertex(v.r - 1, tuple((i, d) for i, d in v.center if i < v.r - 1))


def children(alg: DivisionAlgebra, v: Vertex) -> list[Vertex]:
    zero = (0,) * alg.n
    out = []
    for d in alg.digit_set:
        if d == zero:
            out.append(Vertex(v.r + 1, v.center))
        else:
            out.append(Vertex(v.r + 1, v.center + ((v.r, d),)))
    return out


def neighbors(alg: DivisionAlgebra, v: Vertex) -> list[Vertex]:
    """Parent ball followed by the p^n maximal sub-balls."""
    return [parent(v)] + children(alg, v)


def _first_difference(v1: Vertex, v2: Vertex, bound: int) -> int:
    d1, d2 = v1.digit_map(), v2.digit_map()
    idx = sorted(set(d1) | set(d2))
    for i in idx:
        if i >= bound:
            break
        if d1.get(i) != d2.get(i):
            return i
    return bound


def meet(v1: Vertex, v2: Vertex) -> Vertex:
    """Smallest ball containing both."""
    s = _first_difference(v1, v2, min(v1.r, v2.r))
    return Vertex(s, tuple((i, d) for i, d in v1.center if i < s))


def distance(v1: Vertex, v2: Vertex) -> int:
    s = _first_difference(v1, v2, min(v1.r, v2.r))
    return (v1.r - s) + (v2.r - s)


def is_ancestor(u: Vertex, v: Vertex) -> bool:
    """True when the ball u contains the ball v (u = v allowed)."""
    return u.r <= v.r and meet(u, v) == u


def truncate_vertex(v: Vertex, r: int) -> Vertex:
    return Vertex(r, tuple((i, d) for i, d in v.center if i < r))


def geodesic(v1: Vertex, v2: Vertex) -> list[Vertex]:
    """Vertices on the path from v1 to v2, both included."""
    m = meet(v1, v2)
    up = [truncate_vertex(v1, r) for r in range(v1.r, m.r, -1)]
    down = [truncate_vertex(v2, r) for r in range(m.r, v2.r + 1)]
    return up + down


def median(v1: Vertex, v2: Vertex, v3: Vertex) -> Vertex:
    best = None
    for w in geodesic(v1, v2):
        dw = distance(w, v3)
        if best is None or dw < best[0]:
            best = (dw, w)
    return best[1]


def ball_window(alg: DivisionAlgebra, center: Vertex, R: int) -> list[Vertex]:
    """All vertices within distance R of ``center``, in BFS order."""
    seen = {center}
    order = [center]
    frontier = [center]
    for _ in range(R):
        nxt = []
        for v in frontier:
            for w in neighbors(alg, v):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    return order


# ---------------------------------------------------------------------------
# group action
# ---------------------------------------------------------------------------

def vertex_to_lattice(alg: DivisionAlgebra, v: Vertex) -> Mat2:
    """Frame [[pi^r, c], [0, 1]] whose columns span the lattice of v."""
    return Mat2(alg.pi(v.r), center_element(alg, v), alg.zero(), alg.one())


def lattice_to_vertex(g: Mat2) -> Vertex:
    """Vertex of the right O_B-lattice spanned by the columns of g.

    Right column reduction: put the column with the smaller bottom valuation
    second, clear the other bottom entry, rescale by the bottom pivot, then
    normalize the first column to pi^r.
    """
    alg = g.alg
    x1, y1, x2, y2 = g.a, g.c, g.b, g.d
    if y1.is_zero() and y2.is_zero():
        if x1.is_zero() or x2.is_zero():
            raise NotFullRank("lattice is not of rank 2")
        raise NotFullRank("columns are right-dependent")
    if y2.is_zero() or (not y1.is_zero() and y1.lo < y2.lo):
        x1, y1, x2, y2 = x2, y2, x1, y1
    y2i = d_inv(y2)
    if not y1.is_zero():
        beta = y2i * y1
        x1 = x1 - x2 * beta
    u1 = x1 * y2i
    if u1.is_zero():
        raise NotFullRank("columns are right-dependent at working precision")
    c = x2 * y2i
    return vertex_from_ball(alg, u1.lo, c)


def conjugate_vertex(g: Mat2, v: Vertex) -> Vertex:
    """Vertex of the lattice g * Lambda_v; the order becomes g D_v g^-1."""
    return lattice_to_vertex(g * vertex_to_lattice(g.alg, v))


def mobius_upper(g: Mat2, v: Vertex) -> Vertex:
    """Image of the ball U under U -> (xU + y) z^-1 for g = [[x, y], [0, z]]."""
    if not g.c.is_zero():
        raise ValueError("mobius_upper needs an upper-triangular matrix")
    x, y, z = g.a, g.b, g.d
    if x.is_zero() or z.is_zero():
        raise ZeroDivisor("diagonal entries must be invertible")
    alg = g.alg
    zi = d_inv(z)
    c = (x * center_element(alg, v) + y) * zi
    return vertex_from_ball(alg, v.r + x.lo - z.lo, c)


def act_on_end(g: Mat2, e):
    """Linear fractional action x -> (a x + b)(c x + d)^-1 on P^1(B)."""
    if is_inf(e):
        if g.c.is_zero():
            return INF
        return g.a * d_inv(g.c)
    den = g.c * e + g.d
    if den.is_zero():
        return INF
    return (g.a * e + g.b) * d_inv(den)


def ends_equal(e1, e2) -> bool:
    if is_inf(e1) or is_inf(e2):
        return is_inf(e1) and is_inf(e2)
    return (e1 - e2).is_zero()


def triple_transporter(alg: DivisionAlgebra, e1, e2, e3) -> Mat2:
    """g with g(inf) = e1, g(0) = e2, g(1) = e3."""
    if ends_equal(e1, e2) or ends_equal(e1, e3) or ends_equal(e2, e3):
        raise DegenerateTriple("ends must be pairwise distinct")
    one, zero = alg.one(), alg.zero()
    if is_inf(e1):
        return Mat2(e3 - e2, e2, zero, one)
    h = Mat2(zero, one, one, -e1)
    hinv = Mat2(e1, one, one, zero)
    f2, f3 = act_on_end(h, e2), act_on_end(h, e3)
    return hinv * Mat2(f3 - f2, f2, zero, one)


def ray_toward(alg: DivisionAlgebra, v: Vertex, e, k: int) -> list[Vertex]:
    """The first k steps of the geodesic ray from v toward the end e."""
    out, cur = [], v
    for _ in range(k):
        if is_inf(e):
            cur = parent(cur)
        else:
            if e.N < cur.r + 1:
                raise PrecisionExhausted("end known to too few digits for the requested ray")
            here = vertex_from_ball(alg, cur.r, e)
            cur = vertex_from_ball(alg, cur.r + 1, e) if here == cur else parent(cur)
        out.append(cur)
    return out


def end_beyond(alg: DivisionAlgebra, m: Vertex, v: Vertex, avoid: list[Vertex]):
    """An end whose ray from m passes through v; if v = m, one in an unused direction."""
    if v != m:
        if is_ancestor(v, m):
            return INF
        return center_element(alg, v)
    blocked = set()
    for w in avoid:
        if w != m:
            blocked.add(geodesic(m, w)[1])
    for w in neighbors(alg, m):
        if w not in blocked:
            if w.r < m.r:
                return INF
            return center_element(alg, w)
    raise DegenerateTriple("no free direction at the median")


def ends_beyond(alg: DivisionAlgebra, v1: Vertex, v2: Vertex, v3: Vertex):
    """Three distinct ends whose geodesic triangle passes through v1, v2, v3."""
    if len({v1, v2, v3}) < 3:
        raise DegenerateTriple("vertices must be distinct")
    m = median(v1, v2, v3)
    vs = [v1, v2, v3]
    return tuple(end_beyond(alg, m, v, [w for w in vs if w != v]) for v in vs)


def frame_exact(alg: DivisionAlgebra, v: Vertex) -> tuple[Mat2, Mat2]:
    """Frame g of v and its exact inverse [[pi^-r, -pi^-r c], [0, 1]]."""
    g = vertex_to_lattice(alg, v)
    pinv = alg.pi(-v.r)
    ginv = Mat2(pinv, -(pinv * g.b), alg.zero(), alg.one())
    return g, ginv


__all__ = [
    "EXACT", "INF", "Infinity", "Mat2", "ORIGIN", "Vertex", "act_on_end", "ball_window", "center_element",
    "children", "conjugate_vertex", "distance", "end_beyond", "ends_equal", "ends_beyond", "frame_exact", "geodesic",
    "is_ancestor", "is_inf", "lattice_to_vertex", "median", "meet", "mobius_upper", "neighbors", "parent",
    "ray_toward", "triple_transporter", "truncate_vertex", "vertex_from_ball", "vertex_to_lattice",
]
