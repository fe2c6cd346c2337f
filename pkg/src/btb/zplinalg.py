"""Linear algebra over Z/p^k via the Howell normal form.

Gaussian elimination is unsound over Z/p^k because of zero divisors; the
Howell form fixes this by adding ``p^(k-e) * row`` back into the pool after a
pivot ``p^e`` is chosen.  The resulting basis is canonical, and every
submodule element whose first ``j`` coordinates vanish lies in the span of
the basis rows with the same property.  Kernels and intersections below rely
on that property.
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import PrecisionExhausted


def _dtype(mod: int):
    return np.int64 if mod <= 2 ** 31 else object


def as_matrix(rows, d: int, mod: int) -> np.ndarray:
    dt = _dtype(mod)
    if len(rows) == 0:
        return np.zeros((0, d), dtype=dt)
    A = np.array(rows, dtype=object) % mod
    return A.astype(dt) if dt is not object else A


def vp(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class Howell:
    """Canonical Howell basis of a submodule of (Z/p^k)^d."""

    __slots__ = ("p", "k", "d", "rows", "pivots", "mod")

    def __init__(self, p: int, k: int, d: int, rows: np.ndarray, pivots: list[tuple[int, int]]):
        self.p, self.k, self.d = p, k, d
        self.mod = p ** k
        self.rows = rows
        self.pivots = pivots

    @classmethod
    def of(cls, A, p: int, k: int, d: int | None = None) -> "Howell":
        mod = p ** k
        if d is None:
            d = len(A[0])
        W = as_matrix(A, d, mod) if not isinstance(A, np.ndarray) else A.astype(_dtype(mod)) % mod
        if W.dtype != object:
            W = W.astype(np.int64)
        W = W[np.any(W != 0, axis=1)]
        piv_rows, info = [], []
        for col in range(d):
            if W.shape[0] == 0:
                break
            column = W[:, col]
            nz = np.nonzero(column != 0)[0]
            if len(nz) == 0:
                continue
            vals = [vp(int(column[i]), p, k) for i in nz]
            best = int(np.argmin(vals))
            i, e = int(nz[best]), vals[best]
            pe = p ** e
            row = W[i]
            unit = int(row[col]) // pe
            row = (row * pow(unit, -1, mod)) % mod
            rest = np.delete(W, i, axis=0)
            if rest.shape[0]:
                f = rest[:, col] // pe
                rest = (rest - (f[:, None] * row) % mod) % mod
            if e > 0:
                extra = (row * p ** (k - e)) % mod
                if np.any(extra != 0):
                    rest = np.vstack([rest, extra[None, :]])
            W = rest[np.any(rest != 0, axis=1)] if rest.shape[0] else rest
            piv_rows.append(row)
            info.append((col, e))
        H = np.array(piv_rows, dtype=_dtype(mod)).reshape(len(piv_rows), d)
        for i in range(len(info)):
            for j in range(i + 1, len(info)):
                cj, ej = info[j]
                q = int(H[i, cj]) // p ** ej
                if q:
                    H[i] = (H[i] - (q * H[j]) % mod) % mod
        return cls(p, k, d, H, info)

    # -- queries -----------------------------------------------------------
    def reduce(self, v) -> tuple[np.ndarray, bool]:
        """Remainder of ``v`` against the basis and whether it reduced to zero."""
        mod, p = self.mod, self.p
        v = np.array([int(x) % mod for x in v], dtype=self.rows.dtype if self.rows.size else _dtype(mod))
        for (col, e), row in zip(self.pivots, self.rows):
            x = int(v[col])
            if x % p ** e:
                continue
            q = x // p ** e
            if q:
                v = (v - (q * row) % mod) % mod
        return v, not np.any(v != 0)

    def contains_vector(self, v) -> bool:
        return self.reduce(v)[1]

    def contains(self, other: "Howell") -> bool:
        return all(self.contains_vector(r) for r in other.rows)

    def log_size(self) -> int:
        """log_p of the number of elements of the submodule."""
        return sum(self.k - e for _, e in self.pivots)

    def free_rank(self) -> int:
        """Rank of a free module: log_size / k."""
        return self.log_size() // self.k

    def rank(self, guard: int = 0) -> int:
        """Number of generators that are not p^(k-guard)-torsion: the Z_p-rank estimate."""
        return sum(1 for _, e in self.pivots if e < self.k - guard)

    def key(self) -> tuple:
        return (self.p, self.k, self.d, tuple(tuple(int(x) for x in r) for r in self.rows))

    def __eq__(self, other):
        return isinstance(other, Howell) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def elements(self):
        """Every element of the submodule, each exactly once."""
        ranges = [range(self.p ** (self.k - e)) for _, e in self.pivots]
        for coeffs in itertools.product(*ranges):
            v = np.zeros(self.d, dtype=object)
            for c, r in zip(coeffs, self.rows):
                if c:
                    v = v + c * r.astype(object)
            yield tuple(int(x) % self.mod for x in v)

    def reduce_precision(self, k2: int) -> "Howell":
        """Image of the module in (Z/p^k2)^d for k2 <= k."""
        return Howell.of(self.rows.astype(object) % self.p ** k2 if self.rows.size else self.rows, self.p, k2, self.d)

    def lift_precision(self, k2: int, shift: int) -> "Howell":
        """Module p^shift * M seen in (Z/p^k2)^d where k2 <= k + shift."""
        if k2 > self.k + shift:
            raise PrecisionExhausted("cannot lift a module beyond its known precision")
        rows = [[int(x) * self.p ** shift for x in r] for r in self.rows]
        if not rows:
            rows = [[0] * self.d]
        return Howell.of(rows, self.p, k2, self.d)


def left_kernel(A, p: int, k: int) -> Howell:
    """{x : x A = 0 mod p^k} for an m x c matrix A."""
    A = [list(map(int, r)) for r in A]
    m = len(A)
    c = len(A[0]) if m else 0
    aug = [A[i] + [1 if j == i else 0 for j in range(m)] for i in range(m)]
    H = Howell.of(aug, p, k, c + m)
    rows = [r[c:] for r, (col, _) in zip(H.rows, H.pivots) if col >= c]
    if not rows:
        rows = [[0] * m]
    return Howell.of(rows, p, k, m)


def preimage(A, targets, p: int, k: int) -> Howell:
    """{x : x A lies in the row span of ``targets``} mod p^k."""
    A = [list(map(int, r)) for r in A]
    T = [list(map(int, r)) for r in targets]
    m = len(A)
    c = len(A[0])
    aug = [A[i] + [1 if j == i else 0 for j in range(m)] for i in range(m)]
    aug += [t + [0] * m for t in T]
    H = Howell.of(aug, p, k, c + m)
    rows = [r[c:] for r, (col, _) in zip(H.rows, H.pivots) if col >= c]
    if not rows:
        rows = [[0] * m]
    return Howell.of(rows, p, k, m)


def intersect(H1: Howell, H2: Howell) -> Howell:
    """Zassenhaus intersection of two submodules with the same (p, k, d)."""
    if (H1.p, H1.k, H1.d) != (H2.p, H2.k, H2.d):
        raise ValueError("modules live in different ambient spaces")
    d, mod = H1.d, H1.mod
    dt = _dtype(mod)
    top = np.hstack([H1.rows, H1.rows]) if H1.rows.size else np.zeros((0, 2 * d), dtype=dt)
    bot = np.hstack([H2.rows, np.zeros_like(H2.rows)]) if H2.rows.size else np.zeros((0, 2 * d), dtype=dt)
    Z = np.vstack([top.astype(dt), bot.astype(dt)])
    if Z.shape[0] == 0:
        return Howell.of([[0] * d], H1.p, H1.k, d)
    H = Howell.of(Z, H1.p, H1.k, 2 * d)
    rows = [r[d:] for r, (col, _) in zip(H.rows, H.pivots) if col >= d]
    if not rows:
        rows = [[0] * d]
    return Howell.of(np.array(rows, dtype=dt), H1.p, H1.k, d)


def saturated(H: Howell, guard: int) -> Howell:
    """The Z_p-saturated part of a kernel computed mod p^k, seen mod p^(k-guard).

    Spurious torsion solutions of a kernel taken mod p^k are divisible by
    p^(k - d_max), d_max the largest finite elementary divisor; they vanish
    mod p^(k-guard) once guard >= d_max.  What is left must be free with a
    free reduction mod p (echelon pivots need not be units, since the column
    order is fixed); anything else means the guard was too small.
    """
    k2 = H.k - guard
    if k2 < 1:
        raise PrecisionExhausted("guard leaves no precision")
    R = Howell.of(H.rows.astype(object) % H.p ** k2 if H.rows.size else [[0] * H.d], H.p, k2, H.d)
    res = Howell.of(R.rows.astype(object) % H.p, H.p, 1, H.d)
    if R.log_size() != k2 * res.log_size():
        raise PrecisionExhausted("kernel still shows torsion after the guard; raise M")
    return R


def fp_solve(rows, target, p: int):
    """Solve sum c_i rows[i] = target over F_p; returns coefficients or None."""
    m = len(rows)
    d = len(target)
    # columns = rows, solve A c = target with A (d x m)
    A = [[int(rows[i][r]) % p for i in range(m)] + [int(target[r]) % p] for r in range(d)]
    piv_cols = []
    r = 0
    for c in range(m):
        pr = next((i for i in range(r, d) if A[i][c]), None)
        if pr is None:
            continue
        A[r], A[pr] = A[pr], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(d):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
        if r == d:
            break
    if any(A[i][m] for i in range(r, d)):
        return None
    sol = [0] * m
    for i, c in enumerate(piv_cols):
        sol[c] = A[i][m]
    return sol
