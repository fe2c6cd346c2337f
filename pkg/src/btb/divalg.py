"""Truncated arithmetic in the cyclic division algebra B = sum_j F pi^j.

Relations: ``pi * a = sigma(a) * pi`` for ``a`` in the unramified field F and
``pi^n = p``.  An element is stored as

    x = sum_{j<n} c_j * pi^(lo + j),      c_j in O_F (coefficient tuples)

with coefficients on the *left* of the powers of pi.  Because ``pi^n = p`` is
central, the pi-adic digit of ``x`` at index ``lo + q*n + j`` is just the q-th
base-p digit of ``c_j`` (coefficient-wise).  Each element knows itself modulo
``pi^N``; nonzero elements are normalized so that ``lo`` is the valuation, and
the relative precision ``N - lo`` is capped at ``n*M`` (the most the
coefficient ring W = O_F/p^M can hold).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

from . import zplinalg
from .errors import ConfigMismatch, NotAUnit, NotSimple, PrecisionExhausted, ZeroDivisor
from .ring_arith import AlgebraConfig, UnramifiedRing

# Absolute precision carried by an exact zero.
EXACT = 1 << 40


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _vp_int(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class DivisionAlgebra:
    """Context object: the algebra B for a given :class:`AlgebraConfig`."""

    def __init__(self, config: AlgebraConfig):
        self.config = config
        self.p, self.n, self.M = config.p, config.n, config.M
        self.W = UnramifiedRing(config)
        self.field = self.W.residue_field
        self.cap = self.n * self.M

    @classmethod
    def standard(cls, p: int, n: int, M: int = 32) -> "DivisionAlgebra":
        return cls(AlgebraConfig.standard(p, n, M))

    def __eq__(self, other):
        return isinstance(other, DivisionAlgebra) and other.config == self.config

    def __hash__(self):
        return hash(self.config)

    def __repr__(self):
        return f"DivisionAlgebra(p={self.p}, n={self.n}, M={self.M})"

    # -- construction ------------------------------------------------------
    def _rebase(self, comps, k: int):
        """Rewrite sum c_j pi^(lo+j) over the base lo+k (exact division when k > 0)."""
        n, p = self.n, self.p
        out = [None] * n
        for j, c in enumerate(comps):
            t = j - k
            q, jj = divmod(t, n)
            if q >= 0:
                f = p ** q
                out[jj] = tuple(v * f for v in c)
            else:
                f = p ** (-q)
                out[jj] = tuple(v // f for v in c)
        return out

    def make(self, lo: int, N: int, comps) -> "DivAlgElem":
        """Normalize raw integer coefficient tuples into a canonical element."""
        n, p = self.n, self.p
        best = None
        for j, c in enumerate(comps):
            if any(c):
                q = min(_vp_int(v, p) for v in c if v)
                idx = lo + j + n * q
                if best is None or idx < best:
                    best = idx
        if best is None or best >= N:
            return DivAlgElem(self, N, N, (self.W.zero,) * n)
        if best != lo:
            comps = self._rebase(comps, best - lo)
            lo = best
        N = min(N, lo + self.cap)
        rel = N - lo
        out = []
        for j, c in enumerate(comps):
            m = p ** max(0, _ceil_div(rel - j, n))
            out.append(tuple(v % m for v in c))
        return DivAlgElem(self, lo, N, tuple(out))

    def zero(self, N: int = EXACT) -> "DivAlgElem":
        return DivAlgElem(self, N, N, (self.W.zero,) * self.n)

    def from_w(self, a, index: int = 0, N: int | None = None) -> "DivAlgElem":
        """The element a * pi^index for a coefficient tuple a of O_F."""
        comps = [self.W.zero] * self.n
        comps[0] = tuple(int(v) for v in a)
        return self.make(index, EXACT if N is None else N, comps)

    def scalar(self, m: int, N: int | None = None) -> "DivAlgElem":
        return self.from_w((m,) + (0,) * (self.n - 1), 0, N)

    def one(self) -> "DivAlgElem":
        return self.scalar(1)

    def pi(self, k: int = 1) -> "DivAlgElem":
        return self.from_w(self.W.one, k)

    def omega(self) -> "DivAlgElem":
        """The generator x of O_F = Z_p[x]/(h); for n = 1 this is a Teichmuller unit."""
        if self.n == 1:
            return self.from_w(self.W.teichmuller(self.field.generator))
        return self.from_w((0, 1) + (0,) * (self.n - 2))

    def from_digits(self, lo: int, digits, N: int | None = None) -> "DivAlgElem":
        """Build sum d_i pi^(lo+i) from residue digits (coefficient tuples in [0,p))."""
        n, p = self.n, self.p
        comps = [[0] * n for _ in range(n)]
        for i, d in enumerate(digits):
            q, j = divmod(i, n)
            f = p ** q
            for k, v in enumerate(d):
                comps[j][k] += int(v) * f
        return self.make(lo, EXACT if N is None else N, [tuple(c) for c in comps])

    def from_coords(self, vec, N: int | None = None) -> "DivAlgElem":
        """Inverse of :meth:`DivAlgElem.coords`: vec[j*n + i] is coefficient i of c_j."""
        n = self.n
        comps = [tuple(int(vec[j * n + i]) for i in range(n)) for j in range(n)]
        return self.make(0, EXACT if N is None else N, comps)

    def basis(self):
        """O_K-basis x^i pi^j of O_B, in coordinate order j*n + i."""
        out = []
        for j in range(self.n):
            for i in range(self.n):
                w = [0] * self.n
                w[i] = 1
                out.append(self.from_w(tuple(w), j))
        return out

    @cached_property
    def digit_set(self):
        """Canonical digits: coefficient-wise {0..p-1} lifts of residue field elements."""
        return self.field.elements()

    # -- JSON --------------------------------------------------------------
    def element_to_json(self, x: "DivAlgElem") -> dict:
        if x.is_zero():
            return {"lo": x.N, "N": x.N, "digits": []}
        return {"lo": x.lo, "N": x.N, "digits": [list(d) for d in x.digit_list()]}

    def element_from_json(self, d: dict) -> "DivAlgElem":
        if not d["digits"]:
            return self.zero(int(d["N"]))
        return self.from_digits(int(d["lo"]), [tuple(v) for v in d["digits"]], int(d["N"]))


@dataclass(frozen=True, eq=False)
class DivAlgElem:
    """Element of B known modulo pi^N.  See the module docstring for layout."""

    alg: DivisionAlgebra = field(repr=False)
    lo: int
    N: int
    comps: tuple

    # -- basic queries -----------------------------------------------------
    def is_zero(self) -> bool:
        return self.lo >= self.N

    def valuation(self) -> int:
        """Exact valuation; raises if the element vanishes at its precision."""
        if self.is_zero():
            raise PrecisionExhausted("valuation of an element that is zero at working precision")
        return self.lo

    def val_ge(self, k: int):
        """Tri-state test val(x) >= k: True, False, or None when undecided."""
        if not self.is_zero():
            return self.lo >= k
        return True if self.N >= k else None

    def digit(self, i: int):
        n, p = self.alg.n, self.alg.p
        if i >= self.N:
            raise PrecisionExhausted(f"digit {i} beyond precision {self.N}")
        if i < self.lo:
            return (0,) * n
        q, j = divmod(i - self.lo, n)
        f = p ** q
        return tuple((v // f) % p for v in self.comps[j])

    def digit_list(self, upto: int | None = None):
        """Digits at indices lo .. upto-1 (default: up to N)."""
        upto = self.N if upto is None else upto
        return [self.digit(i) for i in range(self.lo, upto)]

    def residue(self):
        """Image in O_B / pi O_B = F_{p^n}; needs val >= 0."""
        if self.val_ge(0) is not True:
            raise NotAUnit("residue of a non-integral element")
        if self.N < 1:
            raise PrecisionExhausted("residue needs precision >= 1")
        return self.digit(0)

    def is_unit(self) -> bool:
        """Unit of O_B, i.e. valuation exactly 0."""
        if self.is_zero():
            if self.N >= 1:
                return False
            raise PrecisionExhausted("unit test needs precision >= 1")
        return self.lo == 0

    def coords(self, mod: int | None = None):
        """Coordinates in the basis x^i pi^j of O_B (integral elements only)."""
        if self.is_zero():
            return (0,) * (self.alg.n ** 2)
        if self.lo < 0:
            raise NotAUnit("coordinates requested for a non-integral element")
        mod = self.alg.W.modulus if mod is None else mod
        comps = self.alg._rebase(self.comps, -self.lo)
        return tuple(v % mod for c in comps for v in c)

    def with_precision(self, N: int) -> "DivAlgElem":
        if N >= self.N:
            return self
        return self.alg.make(self.lo, N, self.comps)

    def truncate(self, r: int) -> "DivAlgElem":
        """The exact element whose digits agree with self below index r and vanish above."""
        if r > self.N:
            raise PrecisionExhausted(f"truncation at {r} beyond precision {self.N}")
        x = self.alg.make(self.lo, r, self.comps)
        if x.is_zero():
            return self.alg.zero()
        return self.alg.make(x.lo, EXACT, x.comps)

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, DivAlgElem):
            return NotImplemented
        if other.alg.config != self.alg.config:
            raise ConfigMismatch("elements of different algebras")
        return other

    def __add__(self, other):
        if isinstance(other, int):
            other = self.alg.scalar(other)
        other = self._check(other)
        return d_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return DivAlgElem(self.alg, self.lo, self.N, tuple(tuple(-v for v in c) for c in self.comps)).renorm()

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.alg.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.alg.make(self.lo, self.N + self.alg.n * _vp_safe(other, self.alg.p),
                                 [tuple(v * other for v in c) for c in self.comps]) if other else self.alg.zero()
        other = self._check(other)
        return d_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.__mul__(other)
        return NotImplemented

    def inverse(self) -> "DivAlgElem":
        return d_inv(self)

    def renorm(self) -> "DivAlgElem":
        return self.alg.make(self.lo, self.N, self.comps)

    def eq_at_precision(self, other) -> bool:
        """Agreement modulo the smaller of the two precisions."""
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, DivAlgElem):
            return NotImplemented
        return (self.alg.config, self.lo, self.N, self.comps) == (other.alg.config, other.lo, other.N, other.comps)

    def __hash__(self):
        return hash((self.lo, self.N, self.comps))

    def __repr__(self):
        if self.is_zero():
            return f"0 (mod pi^{self.N})" if self.N < EXACT else "0"
        terms = []
        for j, c in enumerate(self.comps):
            if any(c):
                terms.append(f"{list(c)}*pi^{self.lo + j}")
        return " + ".join(terms) + f" (mod pi^{self.N})"


def _vp_safe(m: int, p: int) -> int:
    return _vp_int(m, p) if m else 0


def d_add(a: DivAlgElem, b: DivAlgElem) -> DivAlgElem:
    alg = a.alg
    N = min(a.N, b.N)
    base = min(a.lo, b.lo)
    n = alg.n
    acc = [[0] * n for _ in range(n)]
    for x in (a, b):
        if x.is_zero() or x.lo >= N:
            continue
        comps = alg._rebase(x.comps, base - x.lo) if x.lo != base else x.comps
        for j, c in enumerate(comps):
            row = acc[j]
            for i, v in enumerate(c):
                row[i] += v
    return alg.make(base, N, [tuple(r) for r in acc])


def d_mul(a: DivAlgElem, b: DivAlgElem) -> DivAlgElem:
    """Product with precision min(N_a + val b, N_b + val a)."""
    alg = a.alg
    if a.alg.config != b.alg.config:
        raise ConfigMismatch("elements of different algebras")
    N = min(a.N + b.lo, b.N + a.lo)
    lo = a.lo + b.lo
    if a.is_zero() or b.is_zero():
        return alg.zero(N)
    W, n, p = alg.W, alg.n, alg.p
    acc = [[0] * n for _ in range(n)]
    for j, aj in enumerate(a.comps):
        if not any(aj):
            continue
        shift = a.lo + j
        for k, bk in enumerate(b.comps):
            if not any(bk):
                continue
            t = W.mul(aj, W.sigma(bk, shift))
            idx = j + k
            if idx >= n:
                idx -= n
                t = tuple(v * p for v in t)
            row = acc[idx]
            for i, v in enumerate(t):
                row[i] += v
    return alg.make(lo, N, [tuple(r) for r in acc])


def d_inv(a: DivAlgElem) -> DivAlgElem:
    """Inverse of a = y pi^v: sigma^(-v)(y^-1) pi^(-v); precision N - 2v."""
    alg = a.alg
    if a.is_zero():
        raise ZeroDivisor("inverse of an element that is zero at working precision")
    v, rel = a.lo, a.N - a.lo
    y = DivAlgElem(alg, 0, rel, a.comps)
    z = alg.from_w(alg.W.lift(alg.field.inv(y.residue())))
    one = alg.one()
    for _ in range(max(1, math.ceil(math.log2(max(rel, 2)))) + 1):
        e = one - y * z
        if e.is_zero():
            break
        z = z + z * e
    z = alg.make(z.lo, rel, z.comps)
    W = alg.W
    comps = [W.sigma(c, -v) for c in z.comps]
    return alg.make(-v, -v + rel, comps)


def is_unit(a: DivAlgElem) -> bool:
    return a.is_unit()


# ---------------------------------------------------------------------------
# subalgebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubalgebraSpec:
    """A simple K-subalgebra L of B given by generators of O_L, with (e, f) data."""

    alg: DivisionAlgebra = field(repr=False)
    generators: tuple
    kind: str
    e: int
    f: int

    @property
    def eprime(self) -> int:
        return self.alg.n // self.e

    @property
    def dim(self) -> int:
        return self.e * self.f

    # -- factories -----------------------------------------------------------
    @classmethod
    def trivial(cls, alg: DivisionAlgebra) -> "SubalgebraSpec":
        return cls(alg, (), "K", 1, 1)

    @classmethod
    def unramified_field(cls, alg: DivisionAlgebra, f: int) -> "SubalgebraSpec":
        if alg.n % f:
            raise ValueError(f"no unramified subfield of degree {f} when n = {alg.n}")
        if f == 1:
            return cls.trivial(alg)
        return cls(alg, (_unramified_generator(alg, f),), f"UnramifiedField({f})", 1, f)

    @classmethod
    def ramified_by_power(cls, alg: DivisionAlgebra, e: int) -> "SubalgebraSpec":
        if alg.n % e:
            raise ValueError(f"e = {e} does not divide n = {alg.n}")
        if e == 1:
            return cls.trivial(alg)
        return cls(alg, (alg.pi(alg.n // e),), f"RamifiedByPower({e})", e, 1)

    @classmethod
    def mixed(cls, alg: DivisionAlgebra, f: int, e: int) -> "SubalgebraSpec":
        if alg.n % e or (alg.n // e) % f:
            raise ValueError("Mixed(f, e) needs e | n and f | n/e so the generators commute")
        gens = []
        if f > 1:
            gens.append(_unramified_generator(alg, f))
        if e > 1:
            gens.append(alg.pi(alg.n // e))
        return cls(alg, tuple(gens), f"Mixed({f},{e})", e, f)

    @classmethod
    def full_algebra(cls, alg: DivisionAlgebra) -> "SubalgebraSpec":
        gens = (alg.omega(), alg.pi()) if alg.n > 1 else ()
        return cls(alg, gens, "FullAlgebra", alg.n, alg.n)

    @classmethod
    def custom(cls, alg: DivisionAlgebra, generators) -> "SubalgebraSpec":
        gens = tuple(generators)
        e, f, _, _ = _ramification(alg, gens)
        return cls(alg, gens, "Custom", e, f)


def _unramified_generator(alg: DivisionAlgebra, f: int) -> DivAlgElem:
    if f == alg.n:
        return alg.omega()
    zeta = alg.field.subfield_generator(f)
    return alg.from_w(alg.W.teichmuller(zeta))


def _span_matrix(alg: DivisionAlgebra, gens, cap_rounds: int | None = None):
    """Coordinates of the monomials in gens until the Z_p-span stabilizes."""
    p, M = alg.p, alg.M
    one = alg.one()
    elems = [one]
    H = zplinalg.Howell.of([one.coords()], p, M, alg.n ** 2)
    rounds = cap_rounds or 2 * alg.n ** 2
    frontier = [one]
    for _ in range(rounds):
        new = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y.val_ge(0) is not True:
                    raise NotAUnit("generator is not integral")
                c = y.coords()
                if not H.contains_vector(c):
                    H = zplinalg.Howell.of(list(H.rows) + [c], p, M, alg.n ** 2)
                    new.append(y)
                    elems.append(y)
        if not new:
            return H
        frontier = new
    from .errors import ClosureNotReached

    raise ClosureNotReached("monomial span did not stabilize; raise the round cap")


def saturation(rows, p: int, k: int, d: int, guard: int) -> zplinalg.Howell:
    """Saturation in Z_p^d of the span of ``rows``, known mod p^(k - 2*guard)."""
    A = [list(map(int, r)) for r in rows]
    # right kernel of A = left kernel of A^T
    AT = [[A[i][j] for i in range(len(A))] for j in range(d)]
    K1 = zplinalg.saturated(zplinalg.left_kernel(AT, p, k), guard)
    k1 = K1.k
    if not any(any(int(v) for v in r) for r in K1.rows):
        return zplinalg.Howell.of([[1 if i == j else 0 for j in range(d)] for i in range(d)], p, k1 - guard, d)
    KT = [[int(K1.rows[i][j]) for i in range(K1.rows.shape[0])] for j in range(d)]
    return zplinalg.saturated(zplinalg.left_kernel(KT, p, k1), guard)


def _sat_dims(H: zplinalg.Howell, p: int) -> tuple[int, int]:
    """(Z_p-rank, F_p-rank of the residue image) of a saturated module."""
    rows = [r for r in H.rows if any(int(v) for v in r)]
    rank = H.free_rank()
    res = zplinalg.Howell.of([[int(v) % p for v in r] for r in rows] or [[0] * H.d], p, 1, H.d)
    return rank, res.log_size()


def _residue_rank(alg: DivisionAlgebra, H: zplinalg.Howell) -> int:
    """F_p-dimension of the image of the module in O_B / pi O_B."""
    n, p = alg.n, alg.p
    rows = [[int(r[i]) % p for i in range(n)] for r in H.rows if any(int(v) for v in r)]
    if not rows:
        return 0
    return zplinalg.Howell.of(rows, p, 1, n).log_size()


def centralizer_lattice(alg: DivisionAlgebra, gens) -> zplinalg.Howell:
    """O_C = C cap O_B for the centralizer C of gens: saturated kernel of x -> xg - gx."""
    p, M, d = alg.p, alg.M, alg.n ** 2
    guard = max(2, M // 4)
    basis = alg.basis()
    if not gens:
        return zplinalg.Howell.of([b.coords() for b in basis], p, M - guard, d)
    A = []
    for b in basis:
        row = []
        for g in gens:
            row.extend((b * g - g * b).coords())
        A.append(row)
    return zplinalg.saturated(zplinalg.left_kernel(A, p, M), guard)


def residue_image(alg: DivisionAlgebra, H: zplinalg.Howell) -> set:
    """Elements of F_{p^n} hit by the module H of O_B (an F_p-subspace)."""
    n, p = alg.n, alg.p
    rows = [[int(r[i]) % p for i in range(n)] for r in H.rows if any(int(v) % p for v in list(r)[:n])]
    if not rows:
        return {(0,) * n}
    R = zplinalg.Howell.of(rows, p, 1, n)
    return set(R.elements())


def _ramification(alg: DivisionAlgebra, gens):
    n, p, M = alg.n, alg.p, alg.M
    d = n * n
    guard = max(2, M // 4)
    span = _span_matrix(alg, gens)
    OL = saturation(span.rows, p, M, d, guard)
    dim_L = OL.free_rank()
    f_L = _residue_rank(alg, OL)
    if f_L == 0 or dim_L % f_L:
        raise NotSimple("generator algebra has inconsistent residue data")
    e_L = dim_L // f_L
    OC = centralizer_lattice(alg, gens)
    dim_C = OC.free_rank()
    f_C = _residue_rank(alg, OC)
    if f_C == 0 or dim_C % f_C:
        raise NotSimple("centralizer has inconsistent residue data")
    e_C = dim_C // f_C
    if n % e_C or n % f_C:
        raise NotSimple("centralizer invariants do not divide n")
    return e_L, f_L, n // e_C, n // f_C


def ramification_data(L: SubalgebraSpec) -> tuple[int, int, int, int]:
    """(e(L/K), f(L/K), e(B/C), f(B/C)) computed from generators; C the centralizer of L."""
    e, f, eBC, fBC = _ramification(L.alg, L.generators)
    if (e, f) != (L.e, L.f):
        raise NotSimple(f"declared (e, f) = {(L.e, L.f)} but computed {(e, f)}")
    if e != fBC or f != eBC:
        raise NotSimple(f"centralizer data {(eBC, fBC)} inconsistent with {(e, f)}")
    return e, f, eBC, fBC


def element_to_json(x: DivAlgElem) -> str:
    return json.dumps(x.alg.element_to_json(x), sort_keys=True)
