"""Residue field F_{p^n} and the truncated unramified ring W = (Z/p^M)[x]/(h).

Elements are stored as coefficient tuples in the power basis of ``h``.  The
tuple-level functions on :class:`UnramifiedRing` are the hot path used by the
division-algebra layer; :class:`WElem` and :class:`FqElem` are thin value
wrappers for callers that want operators.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

from .errors import ConfigMismatch, NotAUnit

# Conway polynomials, coefficients listed low degree first.
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
}


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


def _poly_mulmod_p(a, b, h, p):
    n = len(h) - 1
    out = [0] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    for i in range(2 * n - 2, n - 1, -1):
        c = out[i] % p
        if c:
            for j in range(n):
                out[i - n + j] -= c * h[j]
    return tuple(x % p for x in out[:n])


def _fq_pow(a, e, h, p):
    n = len(h) - 1
    result = (1,) + (0,) * (n - 1)
    base = a
    while e:
        if e & 1:
            result = _poly_mulmod_p(result, base, h, p)
        base = _poly_mulmod_p(base, base, h, p)
        e >>= 1
    return result


def _prime_factors(m: int) -> list[int]:
    out, d = [], 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def is_irreducible_mod_p(h, p) -> bool:
    """Rabin-style check: x^(p^n) = x mod h and no proper subfield collapse."""
    n = len(h) - 1
    if n == 1:
        return True
    if h[0] % p == 0:
        return False
    x = (0, 1) + (0,) * (n - 2)

    def frob_iter(k):
        y = x
        for _ in range(k):
            y = _fq_pow(y, p, h, p)
        return y

    if frob_iter(n) != x:
        return False
    for q in _prime_factors(n):
        y = frob_iter(n // q)
        diff = tuple((yi - xi) % p for yi, xi in zip(y, x))
        # gcd(x^(p^(n/q)) - x, h) must be 1; h irreducible iff it is for every q
        if not _poly_gcd_is_one(diff, h, p):
            return False
    return True


def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_gcd_is_one(a, b, p) -> bool:
    a = _poly_trim([c % p for c in a])
    b = _poly_trim([c % p for c in b])
    while a:
        # b mod a
        inv = pow(a[-1], -1, p)
        while len(b) >= len(a):
            c = b[-1] * inv % p
            shift = len(b) - len(a)
            for i, ai in enumerate(a):
                b[shift + i] = (b[shift + i] - c * ai) % p
            b = _poly_trim(b)
        a, b = b, a
    return len(b) == 1


def is_primitive_mod_p(h, p) -> bool:
    n = len(h) - 1
    order = p ** n - 1
    if n == 1:
        g = (-h[0]) % p
        return g != 0 and all(pow(g, order // q, p) != 1 for q in _prime_factors(order))
    x = (0, 1) + (0,) * (n - 2)
    one = (1,) + (0,) * (n - 1)
    return all(_fq_pow(x, order // q, h, p) != one for q in _prime_factors(order))


def default_modulus(p: int, n: int) -> tuple[int, ...]:
    """Conway polynomial when tabulated, else the first primitive polynomial."""
    if (p, n) in CONWAY:
        return CONWAY[(p, n)]
    for tail in itertools.product(range(p), repeat=n):
        h = tuple(tail) + (1,)
        if is_irreducible_mod_p(h, p) and is_primitive_mod_p(h, p):
            return h
    raise ValueError(f"no primitive polynomial of degree {n} over F_{p}")


@dataclass(frozen=True)
class AlgebraConfig:
    """Parameters (p, n, M, h) shared by every arithmetic object."""

    p: int
    n: int
    M: int
    h: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.n < 1 or self.M < 1:
            raise ValueError("n and M must be positive")
        h = tuple(int(c) for c in self.h)
        object.__setattr__(self, "h", h)
        if len(h) != self.n + 1 or h[-1] != 1:
            raise ValueError("h must be monic of degree n (coefficients low degree first)")
        if any(not 0 <= c < self.p for c in h):
            raise ValueError("h coefficients must lie in {0, ..., p-1}")
        if not is_irreducible_mod_p(h, self.p):
            raise ValueError("h is not irreducible mod p")

    @classmethod
    def standard(cls, p: int, n: int, M: int = 32) -> "AlgebraConfig":
        return cls(p, n, M, default_modulus(p, n))

    def to_json(self) -> str:
        return json.dumps({"p": self.p, "n": self.n, "M": self.M, "h": list(self.h)}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AlgebraConfig":
        d = json.loads(text)
        return cls(int(d["p"]), int(d["n"]), int(d["M"]), tuple(d["h"]))


class ResidueField:
    """F_{p^n} = F_p[x]/(h mod p); elements are coefficient tuples."""

    def __init__(self, config: AlgebraConfig):
        self.config = config
        self.p, self.n, self.h = config.p, config.n, config.h
        self.zero = (0,) * self.n
        self.one = (1,) + (0,) * (self.n - 1)
        self.size = self.p ** self.n

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def mul(self, a, b):
        if self.n == 1:
            return (a[0] * b[0] % self.p,)
        return _poly_mulmod_p(a, b, self.h, self.p)

    def pow(self, a, e):
        if self.n == 1:
            return (pow(a[0], e, self.p),)
        return _fq_pow(a, e, self.h, self.p)

    def inv(self, a):
        if not any(a):
            raise ZeroDivisionError("zero has no inverse in the residue field")
        return self.pow(a, self.size - 2)

    def frobenius(self, a, k: int = 1):
        return self.pow(a, self.p ** (k % self.n))

    def elements(self):
        """All field elements in lexicographic order of coefficient tuples."""
        return [tuple(reversed(t)) for t in itertools.product(range(self.p), repeat=self.n)]

    @cached_property
    def generator(self):
        """Image of x; primitive when h is a Conway (or primitive) polynomial."""
        if self.n == 1:
            return ((-self.h[0]) % self.p,)
        return (0, 1) + (0,) * (self.n - 2)

    def subfield_generator(self, f: int):
        """A generator of the unique subfield F_{p^f}."""
        if self.n % f:
            raise ValueError(f"F_{{p^{f}}} is not a subfield of F_{{p^{self.n}}}")
        return self.pow(self.generator, (self.size - 1) // (self.p ** f - 1))

    def in_subfield(self, a, f: int) -> bool:
        return self.pow(a, self.p ** f) == tuple(a)


class UnramifiedRing:
    """W = O_F / p^M, the truncated ring of integers of the unramified degree-n extension."""

    def __init__(self, config: AlgebraConfig):
        self.config = config
        self.p, self.n, self.M, self.h = config.p, config.n, config.M, config.h
        self.modulus = self.p ** self.M
        self.residue_field = ResidueField(config)
        self.zero = (0,) * self.n
        self.one = (1,) + (0,) * (self.n - 1)
        self._sigma_tables = self._build_sigma_tables()

    # -- tuple level -------------------------------------------------------
    def reduce(self, a, mod=None):
        mod = self.modulus if mod is None else mod
        return tuple(x % mod for x in a)

    def add(self, a, b, mod=None):
        mod = self.modulus if mod is None else mod
        return tuple((x + y) % mod for x, y in zip(a, b))

    def sub(self, a, b, mod=None):
        mod = self.modulus if mod is None else mod
        return tuple((x - y) % mod for x, y in zip(a, b))

    def neg(self, a, mod=None):
        mod = self.modulus if mod is None else mod
        return tuple((-x) % mod for x in a)

    def scale(self, a, c, mod=None):
        mod = self.modulus if mod is None else mod
        return tuple(x * c % mod for x in a)

    def mul(self, a, b, mod=None):
        mod = self.modulus if mod is None else mod
        n = self.n
        if n == 1:
            return (a[0] * b[0] % mod,)
        h = self.h
        out = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        for i in range(2 * n - 2, n - 1, -1):
            c = out[i]
            if c:
                for j in range(n):
                    if h[j]:
                        out[i - n + j] -= c * h[j]
        return tuple(x % mod for x in out[:n])

    def residue(self, a):
        return tuple(x % self.p for x in a)

    def lift(self, fq):
        return tuple(int(x) for x in fq)

    def is_unit(self, a) -> bool:
        return any(x % self.p for x in a)

    def inv(self, a, mod=None):
        """Inverse mod p, then Newton-Hensel lifting z <- z(2 - az)."""
        mod = self.modulus if mod is None else mod
        if not self.is_unit(a):
            raise NotAUnit("element is divisible by p")
        z = self.lift(self.residue_field.inv(self.residue(a)))
        prec = 1
        two = (2,) + (0,) * (self.n - 1)
        while self.p ** prec < mod:
            prec *= 2
            m = min(self.p ** prec, mod)
            z = self.mul(z, self.sub(two, self.mul(a, z, m), m), m)
        return self.reduce(z, mod)

    def valuation(self, a) -> int:
        """p-adic valuation of the element (min over coefficients); M if zero."""
        best = self.M
        p = self.p
        for x in a:
            x %= self.modulus
            if x:
                v = 0
                while x % p == 0:
                    x //= p
                    v += 1
                best = min(best, v)
        return best

    def _hensel_root(self, z0):
        """Newton iteration for h(z) = 0 starting from z0 (simple root mod p)."""
        h = self.h
        dh = tuple(i * h[i] for i in range(1, len(h)))

        def ev(poly, z):
            acc = self.zero
            for c in reversed(poly):
                acc = self.add(self.mul(acc, z), (c,) + (0,) * (self.n - 1))
            return acc

        z = self.reduce(z0)
        for _ in range(self.M.bit_length() + 2):
            z = self.sub(z, self.mul(ev(h, z), self.inv(ev(dh, z))))
        if any(ev(h, z)):
            raise ArithmeticError("Hensel iteration did not converge")
        return z

    def _build_sigma_tables(self):
        n = self.n
        if n == 1:
            return [((1,),)]
        x = (0, 1) + (0,) * (n - 2)
        x_p = self.lift(self.residue_field.pow(self.residue(x), self.p))
        sx = self._hensel_root(x_p)
        images = [x]
        for _ in range(n - 1):
            # sigma^(k+1)(x) = sigma(sigma^k(x)) = sum c_i sx^i
            images.append(self._apply_poly(images[-1], sx))
        tables = []
        for img in images:
            cols, acc = [], self.one
            for _ in range(n):
                cols.append(acc)
                acc = self.mul(acc, img)
            tables.append(tuple(cols))
        return tables

    def _apply_poly(self, coeffs, z):
        acc, power = self.zero, self.one
        for c in coeffs:
            if c:
                acc = self.add(acc, self.scale(power, c))
            power = self.mul(power, z)
        return acc

    @property
    def frobenius_of_generator(self):
        """sigma(x) as a W element."""
        if self.n == 1:
            return self.one
        return self._sigma_tables[1][1]

    def sigma(self, a, k: int = 1, mod=None):
        k %= self.n
        if k == 0:
            return self.reduce(a, mod) if mod is not None else tuple(a)
        mod = self.modulus if mod is None else mod
        cols = self._sigma_tables[k]
        out = [0] * self.n
        for c, col in zip(a, cols):
            if c:
                for i, v in enumerate(col):
                    out[i] += c * v
        return tuple(v % mod for v in out)

    def teichmuller(self, fq):
        """Teichmuller lift: the root of unity in W reducing to ``fq``."""
        z = self.lift(fq)
        if not any(z):
            return self.zero
        q = self.p ** self.n
        for _ in range(self.M + 1):
            z = self._pow(z, q)
        return z

    def _pow(self, a, e):
        result, base = self.one, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    # -- wrapped values ----------------------------------------------------
    def element(self, coeffs) -> "WElem":
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != self.n:
            raise ValueError(f"expected {self.n} coefficients")
        return WElem(self.reduce(coeffs), self)

    def __eq__(self, other):
        return isinstance(other, UnramifiedRing) and other.config == self.config

    def __hash__(self):
        return hash(self.config)


@dataclass(frozen=True)
class FqElem:
    coeffs: tuple[int, ...]
    field: ResidueField

    def _check(self, other):
        if self.field.config != other.field.config:
            raise ConfigMismatch("residue field elements from different configs")

    def __add__(self, other):
        self._check(other)
        return FqElem(self.field.add(self.coeffs, other.coeffs), self.field)

    def __sub__(self, other):
        self._check(other)
        return FqElem(self.field.sub(self.coeffs, other.coeffs), self.field)

    def __mul__(self, other):
        self._check(other)
        return FqElem(self.field.mul(self.coeffs, other.coeffs), self.field)

    def __pow__(self, e):
        return FqElem(self.field.pow(self.coeffs, e), self.field)

    def inverse(self):
        return FqElem(self.field.inv(self.coeffs), self.field)

    def __eq__(self, other):
        return isinstance(other, FqElem) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)


@dataclass(frozen=True, eq=False)
class WElem:
    coeffs: tuple[int, ...]
    ring: UnramifiedRing

    def _check(self, other):
        if self.ring.config != other.ring.config:
            raise ConfigMismatch("W elements from different configs")

    def __add__(self, other):
        return w_add(self, other)

    def __sub__(self, other):
        self._check(other)
        return WElem(self.ring.sub(self.coeffs, other.coeffs), self.ring)

    def __neg__(self):
        return WElem(self.ring.neg(self.coeffs), self.ring)

    def __mul__(self, other):
        return w_mul(self, other)

    def __eq__(self, other):
        return isinstance(other, WElem) and self.ring.config == other.ring.config and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def residue(self) -> FqElem:
        return FqElem(self.ring.residue(self.coeffs), self.ring.residue_field)


def w_add(a: WElem, b: WElem) -> WElem:
    a._check(b)
    return WElem(a.ring.add(a.coeffs, b.coeffs), a.ring)


def w_mul(a: WElem, b: WElem) -> WElem:
    a._check(b)
    return WElem(a.ring.mul(a.coeffs, b.coeffs), a.ring)


def w_inv(a: WElem) -> WElem:
    return WElem(a.ring.inv(a.coeffs), a.ring)


def frobenius(a: WElem, k: int = 1) -> WElem:
    return WElem(a.ring.sigma(a.coeffs, k), a.ring)
