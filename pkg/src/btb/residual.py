"""Quotient rings O_B / pi^r O_B, centralizers of suborders in them, and centers.

Additively, pi^r O_B is the sum over j of p^e_j O_F pi^j with
e_j = ceil((r - j)/n), so an element of the quotient is a coordinate vector
in the basis x^i pi^j whose (j, i) entry lives modulo p^e_j.  All module
computations happen in (Z/p^s)^(n^2) with s = ceil(r/n) = e_0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import zplinalg
from .divalg import DivAlgElem, DivisionAlgebra, SubalgebraSpec, centralizer_lattice, residue_image
from .errors import LiftNotFound, PrecisionExhausted


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class ResidualRing:
    """The finite ring O_B / pi^r O_B of order p^(n r)."""

    def __init__(self, alg: DivisionAlgebra, r: int):
        if r < 0:
            raise ValueError("level must be nonnegative")
        if r > alg.cap:
            raise PrecisionExhausted(f"level {r} exceeds the coefficient precision n*M = {alg.cap}")
        self.alg, self.r = alg, r
        n, p = alg.n, alg.p
        self.s = _ceil_div(r, n) if r else 0
        self.exps = [max(0, _ceil_div(r - j, n)) for j in range(n)]
        self.mods = [p ** self.exps[j] for j in range(n) for _ in range(n)]
        self.dim = n * n

    @property
    def size(self) -> int:
        return self.alg.p ** (self.alg.n * self.r)

    def reduce(self, vec) -> tuple:
        return tuple(int(v) % m for v, m in zip(vec, self.mods))

    def image(self, x: DivAlgElem) -> tuple:
        """Canonical image of an integral element."""
        if x.val_ge(0) is not True:
            raise ValueError("only integral elements have residual images")
        if x.N < self.r:
            raise PrecisionExhausted(f"element known mod pi^{x.N}, level {self.r} requested")
        return self.reduce(x.coords())

    def lift(self, vec) -> DivAlgElem:
        return self.alg.from_coords(vec)

    def mul(self, u, v) -> tuple:
        return self.image(self.lift(u) * self.lift(v))

    def add(self, u, v) -> tuple:
        return self.reduce([a + b for a, b in zip(u, v)])

    def ideal_rows(self, k: int | None = None):
        """Generators of pi^r O_B inside (Z/p^k)^(n^2)."""
        n, p = self.alg.n, self.alg.p
        k = self.s if k is None else k
        rows = []
        for j in range(n):
            for i in range(n):
                row = [0] * self.dim
                row[j * n + i] = p ** self.exps[j] % p ** k
                rows.append(row)
        return rows

    def elements(self):
        """Every element, by coordinates; a generator of length p^(n r)."""
        return itertools.product(*[range(m) for m in self.mods])

    def residue(self, vec) -> tuple:
        """Image in O_B / pi O_B = F_{p^n}."""
        n, p = self.alg.n, self.alg.p
        return tuple(int(vec[i]) % p for i in range(n))

    def __repr__(self):
        return f"ResidualRing(level={self.r}, size={self.size})"


@dataclass
class CentralizerTable:
    """Centralizer of the image of a suborder in O_B / pi^r; stored as a module X / pi^r O_B."""

    ring: ResidualRing
    module: zplinalg.Howell = field(repr=False)
    count: int

    @property
    def r(self) -> int:
        return self.ring.r

    @cached_property
    def basis(self) -> list[tuple]:
        return [self.ring.reduce(row) for row in self.module.rows if any(self.ring.reduce(row))]

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.ring.reduce(v) for v in self.module.elements())

    def elements(self) -> list[tuple]:
        return sorted(self.element_set)

    def contains(self, vec) -> bool:
        return self.ring.reduce(vec) in self.element_set

    def reduction(self, vec, lower: ResidualRing) -> tuple:
        """Reduction map to a lower level."""
        return lower.reduce(vec)


def _commutator_rows(alg: DivisionAlgebra, gens, k: int):
    """Row b: coordinates of (b g - g b) for every generator g, concatenated."""
    mod = alg.p ** k
    rows = []
    for b in alg.basis():
        row = []
        for g in gens:
            row.extend(v % mod for v in (b * g - g * b).coords())
        rows.append(row)
    return rows


def centralizer_of_gens(alg: DivisionAlgebra, gens, r: int) -> CentralizerTable:
    ring = ResidualRing(alg, r)
    n2 = ring.dim
    if r == 0:
        H = zplinalg.Howell.of([[0] * n2], alg.p, 1, n2)
        return CentralizerTable(ring, H, 1)
    s = ring.s
    gens = list(gens)
    ideal = ring.ideal_rows()
    if not gens:
        H = zplinalg.Howell.of(np.eye(n2, dtype=np.int64), alg.p, s, n2)
    else:
        A = _commutator_rows(alg, gens, s)
        targets = []
        for gi in range(len(gens)):
            for row in ideal:
                t = [0] * (n2 * len(gens))
                t[gi * n2:(gi + 1) * n2] = row
                targets.append(t)
        H = zplinalg.preimage(A, targets, alg.p, s)
    ideal_H = zplinalg.Howell.of(ideal, alg.p, s, n2)
    count = alg.p ** (H.log_size() - ideal_H.log_size())
    return CentralizerTable(ring, H, count)


def centralizer(L: SubalgebraSpec, r: int) -> CentralizerTable:
    """C_r: elements of O_B / pi^r commuting with the image of O_L."""
    return centralizer_of_gens(L.alg, L.generators, r)


def brute_force_centralizer(alg: DivisionAlgebra, gens, r: int, limit: int = 1 << 20) -> set[tuple]:
    """Exhaustive commutant: every ring element tested against every generator."""
    ring = ResidualRing(alg, r)
    if ring.size > limit:
        raise ValueError(f"ring of size {ring.size} exceeds the enumeration limit {limit}")
    if r == 0:
        return {tuple([0] * ring.dim)}
    s = ring.s
    mod = alg.p ** s
    X = np.array(list(ring.elements()), dtype=np.int64)
    keep = np.ones(len(X), dtype=bool)
    mods = np.array(ring.mods, dtype=np.int64)
    for g in gens:
        right = np.array([(b * g).coords(mod) for b in alg.basis()], dtype=np.int64)
        left = np.array([(g * b).coords(mod) for b in alg.basis()], dtype=np.int64)
        D = (X @ ((right - left) % mod)) % mod
        keep &= np.all(D % mods == 0, axis=1)
    return {tuple(int(v) for v in row) for row in X[keep]}


def lift_residue_to_centralizer(b, L: SubalgebraSpec, level: int | None = None,
                                table: CentralizerTable | None = None) -> tuple:
    """An element of C_{e'} whose residue is b; existence is guaranteed for simple L."""
    alg = L.alg
    level = L.eprime if level is None else level
    if table is None or table.r != level:
        table = centralizer(L, level)
    rows = [list(r) for r in table.module.rows]
    n, p = alg.n, alg.p
    target = [int(v) % p for v in b]
    if not any(target):
        return table.ring.reduce([0] * table.ring.dim)
    coeffs = zplinalg.fp_solve([r[:n] for r in rows], target, p)
    if coeffs is None:
        raise LiftNotFound(f"residue {tuple(b)} has no lift to the level-{level} centralizer")
    vec = [sum(c * int(r[k]) for c, r in zip(coeffs, rows)) for k in range(table.ring.dim)]
    out = table.ring.reduce(vec)
    if table.ring.residue(out) != tuple(target):
        raise LiftNotFound("lift does not reduce to the requested residue")
    return out


def center_preimage(alg: DivisionAlgebra, t: int) -> CentralizerTable:
    """Elements of O_B central modulo pi^t (the centralizer of omega and pi)."""
    return centralizer(SubalgebraSpec.full_algebra(alg), t)


def center_of_order_quotient(alg: DivisionAlgebra, t: int):
    """Generators (as exact 2x2 matrices) of the preimage of Z(M_2(O_B / pi^t)) in M_2(O_B).

    Returns pairs (kind, Mat2) where kind is 'scalar' for z*I with z central
    mod pi^t and 'ideal' for the generators of pi^t M_2(O_B).
    """
    from .bttree import Mat2

    out = []
    if t == 0:
        for i in range(2):
            for j in range(2):
                for b in alg.basis():
                    out.append(("ideal", Mat2.elementary(alg, i, j, b)))
        return out
    table = center_preimage(alg, t)
    one = alg.one()
    out.append(("scalar", Mat2.scalar(one)))
    for row in table.module.rows:
        vec = [int(v) for v in row]
        if any(table.ring.reduce(vec)):
            out.append(("scalar", Mat2.scalar(alg.from_coords(vec))))
    pit = alg.pi(t)
    for i in range(2):
        for j in range(2):
            for b in alg.basis():
                out.append(("ideal", Mat2.elementary(alg, i, j, pit * b)))
    return out


def invariant_line_count(alg: DivisionAlgebra, residue_mats) -> int:
    """Number of lines in F_{p^n}^2 stable under every given residual 2x2 matrix.

    Each matrix is a 4-tuple (a, b, c, d) of residue field elements acting on
    column vectors.
    """
    F = alg.field
    zero, one = F.zero, F.one
    lines = [(zero, one)] + [(one, t) for t in F.elements()]
    count = 0
    for (x, y) in lines:
        ok = True
        for a, b, c, d in residue_mats:
            u = F.add(F.mul(a, x), F.mul(b, y))
            w = F.add(F.mul(c, x), F.mul(d, y))
            # (u, w) must be proportional to (x, y): u*y - w*x = 0
            if F.sub(F.mul(u, y), F.mul(w, x)) != zero:
                ok = False
                break
        count += ok
    return count


def centralizer_residue_image(L: SubalgebraSpec) -> set:
    """Residue classes of O_C in F_{p^n}, C the centralizer of L in B."""
    return residue_image(L.alg, centralizer_lattice(L.alg, list(L.generators)))
