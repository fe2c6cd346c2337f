"""Maximal orders, membership, and orders as Z_p-lattices in M_2(B).

Lattices use the global basis E_ij (x) x^k pi^l of M_2(B), so an order is a
submodule of Q_p^(4 n^2).  A :class:`LatticeFrame` fixes a scale ``s`` and a
precision ``Q``: the stored object is the Howell form of ``p^s L`` modulo
``p^Q``.  When ``p^s L`` is integral and contains ``p^Q`` times the standard
lattice, that truncation loses nothing, so equality, containment and
intersection are exact.  Every order attached to a vertex at distance ``d``
from the origin lies between ``pi^d M_2(O_B)`` and ``pi^-d M_2(O_B)``; the
frame therefore certifies vertices with ``d <= n*min(s, Q - s)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

from . import zplinalg
from .bttree import (
    INF,
    Mat2,
    ORIGIN,
    Vertex,
    distance,
    frame_exact,
    triple_transporter,
)
from .divalg import EXACT, DivAlgElem, DivisionAlgebra
from .errors import ClosureNotReached, PrecisionExhausted
from .residual import center_of_order_quotient

UNKNOWN = None


def _and3(values):
    """Three-valued conjunction: False dominates, then Unknown."""
    out = True
    for v in values:
        if v is False:
            return False
        if v is None:
            out = None
    return out


@dataclass(frozen=True)
class MaxOrder:
    """The maximal order End(Lambda_v) attached to a vertex."""

    alg: DivisionAlgebra = field(repr=False, compare=False, hash=False)
    vertex: Vertex

    @cached_property
    def frame(self) -> tuple[Mat2, Mat2]:
        return frame_exact(self.alg, self.vertex)

    @property
    def basis(self) -> Mat2:
        return self.frame[0]


def membership(D: MaxOrder, m: Mat2):
    """Whether g^-1 m g is integral for the frame g of D: True, False, or None (unknown).

    For g = [[pi^r, c], [0, 1]] and m = [[a, b], [u, w]] the conjugate has
    entries pi^-r (a - c u) pi^r, pi^-r (a c + b - c u c - c w), u pi^r and
    u c + w, so only valuations of four elements are needed.
    """
    r = D.vertex.r
    c = D.frame[0].b
    a, b, u, w = m.entries()
    cu = c * u
    e11 = a - cu
    e12 = a * c + b - cu * c - c * w
    e22 = u * c + w
    return _and3([e11.val_ge(0), e12.val_ge(r), u.val_ge(-r), e22.val_ge(0)])


def membership_all(D: MaxOrder, gens) -> bool | None:
    return _and3(membership(D, g) for g in gens)


def conjugate(g: Mat2, ginv: Mat2, m: Mat2) -> Mat2:
    return g * m * ginv


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeFrame:
    """Scale and precision shared by a family of order lattices."""

    alg: DivisionAlgebra = field(repr=False, compare=False, hash=False)
    s: int
    Q: int

    @classmethod
    def for_radius(cls, alg: DivisionAlgebra, R: int) -> "LatticeFrame":
        s = max(1, -((-R) // alg.n))
        return cls(alg, s, 2 * s)

    @property
    def dim(self) -> int:
        return 4 * self.alg.n ** 2

    @property
    def max_distance(self) -> int:
        return self.alg.n * min(self.s, self.Q - self.s)

    def coords(self, m: Mat2) -> list[int]:
        """Coordinates of p^s m modulo p^Q."""
        alg = self.alg
        mod = alg.p ** self.Q
        shift = alg.pi(alg.n * self.s)
        out = []
        for x in m.entries():
            y = x * shift
            if y.is_zero():
                if y.N < alg.n * self.Q:
                    raise PrecisionExhausted("matrix entry not known to the lattice precision")
                out.extend([0] * alg.n ** 2)
                continue
            if y.lo < 0:
                raise PrecisionExhausted("matrix entry has a pole beyond the lattice scale")
            if y.N < alg.n * self.Q:
                raise PrecisionExhausted("matrix entry not known to the lattice precision")
            out.extend(y.coords(mod))
        return out

    def matrix(self, row) -> Mat2:
        """The matrix p^-s * (row), with entries known modulo pi^(n(Q-s))."""
        alg = self.alg
        n2 = alg.n ** 2
        N = alg.n * self.Q
        unshift = alg.pi(-alg.n * self.s)
        ents = []
        for k in range(4):
            x = alg.from_coords([int(v) for v in row[k * n2:(k + 1) * n2]], N=N)
            ents.append(x * unshift)
        return Mat2(*ents)

    def lattice(self, mats, label: str = "", zp_rank: int | None = None) -> "OrderLattice":
        rows = [self.coords(m) for m in mats]
        if not rows:
            rows = [[0] * self.dim]
        return OrderLattice(self, zplinalg.Howell.of(rows, self.alg.p, self.Q, self.dim), label, zp_rank)

    def standard(self) -> "OrderLattice":
        return order_lattice_of(self, MaxOrder(self.alg, ORIGIN))


@dataclass(frozen=True, eq=False)
class OrderLattice:
    """Howell-canonical lattice p^s L mod p^Q."""

    frame: LatticeFrame = field(repr=False)
    howell: zplinalg.Howell = field(repr=False)
    label: str = ""
    zp_rank: int | None = None

    @property
    def is_full(self) -> bool:
        """Full-rank over Z_p; non-full lattices are only known up to p^Q Std."""
        return self.zp_rank == self.frame.dim

    def basis_matrices(self) -> list[Mat2]:
        return [self.frame.matrix(r) for r in self.howell.rows]

    def __eq__(self, other):
        return isinstance(other, OrderLattice) and self.frame == other.frame and self.howell == other.howell

    def __hash__(self):
        return hash((self.frame.s, self.frame.Q, self.howell))

    def to_json(self) -> str:
        return json.dumps({
            "scale": self.frame.s,
            "Q": self.frame.Q,
            "p": self.frame.alg.p,
            "basis": [[int(v) for v in r] for r in self.howell.rows],
        }, sort_keys=True, separators=(",", ":"))

    def index_log(self) -> int:
        """log_p of the index of p^s L + p^Q Std in the standard lattice."""
        return self.frame.dim * self.frame.Q - self.howell.log_size()


def _check_frame(F: LatticeFrame, v: Vertex):
    d = distance(v, ORIGIN)
    if d > F.max_distance:
        raise PrecisionExhausted(
            f"vertex at distance {d} needs a lattice frame certifying distance >= {d} (have {F.max_distance})")


def order_lattice_of(F: LatticeFrame, D: MaxOrder) -> OrderLattice:
    _check_frame(F, D.vertex)
    g, ginv = D.frame
    alg = F.alg
    mats = []
    for i in range(2):
        for j in range(2):
            for b in alg.basis():
                mats.append(g * Mat2.elementary(alg, i, j, b) * ginv)
    return F.lattice(mats, label=f"D{D.vertex.label()}", zp_rank=F.dim)


@dataclass(frozen=True)
class GenSet:
    """Generators of the order O_K[gens] (1 is always implied)."""

    gens: tuple
    label: str = ""

    def __iter__(self):
        return iter(self.gens)

    def __len__(self):
        return len(self.gens)


def order_lattice_of_gens(F: LatticeFrame, G, cap: int | None = None) -> OrderLattice:
    """Z_p-span of all monomials in the generators, closed under multiplication."""
    alg = F.alg
    gens = list(G)
    one = Mat2.identity(alg)
    rows = [F.coords(one)]
    H = zplinalg.Howell.of(rows, alg.p, F.Q, F.dim)
    frontier = [one]
    rounds = cap or 2 * F.dim
    while True:
        for _ in range(rounds):
            new = []
            for x in frontier:
                for g in gens:
                    y = x * g
                    c = F.coords(y)
                    if not H.contains_vector(c):
                        rows = [list(map(int, r)) for r in H.rows] + [c]
                        H = zplinalg.Howell.of(rows, alg.p, F.Q, F.dim)
                        new.append(y)
            if not new:
                return OrderLattice(F, H, getattr(G, "label", ""), _span_rank(F, gens))
            frontier = new
        if cap is not None:
            raise ClosureNotReached("multiplicative closure not reached within the round cap")
        rounds *= 2
        if rounds > 64 * F.dim:
            raise ClosureNotReached("multiplicative closure not reached; the generators may not be integral")


def _span_rank(F: LatticeFrame, gens) -> int:
    """Q_p-rank of the monomial span, read off pivots at precision Q + 2*slack.

    Pivot exponents of at least s + slack are treated as truncation artifacts.
    """
    slack = max(1, min(8, (F.alg.M - F.Q) // 2))
    wide = LatticeFrame(F.alg, F.s, F.Q + 2 * slack)
    one = Mat2.identity(F.alg)
    Hw = zplinalg.Howell.of([wide.coords(one)], F.alg.p, wide.Q, wide.dim)
    frontier = [one]
    for _ in range(2 * F.dim):
        new = []
        for x in frontier:
            for g in gens:
                y = x * g
                c = wide.coords(y)
                if not Hw.contains_vector(c):
                    Hw = zplinalg.Howell.of([list(map(int, r)) for r in Hw.rows] + [c], F.alg.p, wide.Q, wide.dim)
                    new.append(y)
        if not new:
            break
        frontier = new
    return sum(1 for _, e in Hw.pivots if e < F.s + slack)


def intersect(O1: OrderLattice, O2: OrderLattice) -> OrderLattice:
    if O1.frame != O2.frame:
        raise ValueError("lattices live in different frames")
    full = O1.is_full and O2.is_full
    return OrderLattice(O1.frame, zplinalg.intersect(O1.howell, O2.howell), "", O1.frame.dim if full else None)


def intersect_all(lattices) -> OrderLattice:
    it = iter(lattices)
    acc = next(it)
    for L in it:
        acc = intersect(acc, L)
    return acc


def contains(O1: OrderLattice, O2: OrderLattice) -> bool:
    """O2 is a subset of O1."""
    if O1.frame != O2.frame:
        raise ValueError("lattices live in different frames")
    return O1.howell.contains(O2.howell)


def d_tower_gens(alg: DivisionAlgebra, D: MaxOrder, t: int) -> list[Mat2]:
    """Generators of D^[t]: elements of D central modulo the t-th power of its maximal ideal."""
    g, ginv = D.frame
    return [g * m * ginv for _, m in center_of_order_quotient(alg, t)]


def d_tower(F: LatticeFrame, D: MaxOrder, t: int) -> OrderLattice:
    if t == 0:
        return order_lattice_of(F, D)
    _check_frame(F, D.vertex)
    return F.lattice(d_tower_gens(F.alg, D, t), label=f"D^[{t}]", zp_rank=F.dim)


def scalar_generators(alg: DivisionAlgebra) -> list[Mat2]:
    """diag(omega, omega) and diag(pi, pi): generators of the scalar copy of O_B."""
    if alg.n == 1:
        return []
    return [Mat2.scalar(alg.omega()), Mat2.scalar(alg.pi())]


def scalar_conjugate_order(alg: DivisionAlgebra, e1, e2, e3) -> GenSet:
    """Generators of g O_B g^-1 with g the transporter of (inf, 0, 1) to (e1, e2, e3)."""
    g = triple_transporter(alg, e1, e2, e3)
    ginv = g.inverse()
    return GenSet(tuple(g * m * ginv for m in scalar_generators(alg)), label="gO_Bg^-1")


__all__ = [
    "GenSet", "INF", "LatticeFrame", "MaxOrder", "OrderLattice", "UNKNOWN", "contains", "d_tower",
    "d_tower_gens", "intersect", "intersect_all", "membership", "membership_all", "order_lattice_of",
    "order_lattice_of_gens", "scalar_conjugate_order", "scalar_generators",
]
