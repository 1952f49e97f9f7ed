"""Ground-truth verification engines.

Two independent oracles live here and deliberately share nothing with the
p-adic pipeline:

* exhaustive point counting over small finite fields (vectorized with
  numpy, packed-integer field elements), used to check every zeta output
  at desk scale;
* an exact-rational replay of the solver recursion, used to check the
  fixed-precision solver coefficient by coefficient.

Counting uses the projective odd-degree model: one point at infinity plus
sum over x of 1 + chi(Q(x)), chi the quadratic character with chi(0) = 0.
"""

from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded, InvalidInput
from .exactmath import lexmin_irreducible

DEFAULT_BUDGET = 1 << 24
_CHUNK = 1 << 20


class SmallField:
    """F_{p^k} with elements packed as integers in [0, p^k).

    All operations accept numpy integer arrays (or Python ints) of packed
    elements; digit vectors use the power basis of a monic irreducible
    ``modulus`` (the deterministic lexicographically-least choice by
    default, matching the rest of the package).
    """

    def __init__(self, p, k, modulus=None):
        self.p = p
        self.k = k
        self.q = p ** k
        self.modulus = list(modulus) if modulus is not None else lexmin_irreducible(p, k)
        if len(self.modulus) != k + 1 or self.modulus[-1] % p != 1:
            raise InvalidInput("modulus must be monic of degree k")
        self._powers = np.array([p ** i for i in range(k)], dtype=np.int64)
        # x^{k+j} = sum_i rows[j][i] x^i  (mod modulus, p), j = 0..k-2
        rows = []
        if k > 1:
            base = [(-c) % p for c in self.modulus[:k]]
            rows.append(base)
            for _ in range(k - 2):
                prev = rows[-1]
                shifted = [0] + prev[: k - 1]
                top = prev[k - 1]
                rows.append([(shifted[i] + top * base[i]) % p for i in range(k)])
        self._red = np.array(rows, dtype=np.int64).reshape(max(0, k - 1), k)
        self._squares = None

    # -- packing -------------------------------------------------------------

    def digits(self, a):
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._powers) % self.p

    def pack(self, d):
        return (np.asarray(d, dtype=np.int64) * self._powers).sum(axis=-1)

    def elements(self):
        return np.arange(self.q, dtype=np.int64)

    # -- arithmetic ----------------------------------------------------------

    def add(self, a, b):
        d = (self.digits(a) + self.digits(b)) % self.p
        return self.pack(d)

    def neg(self, a):
        return self.pack((-self.digits(a)) % self.p)

    def mul(self, a, b):
        p, k = self.p, self.k
        if k == 1:
            return (np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64)) % p
        da = self.digits(a)
        db = self.digits(b)
        shape = np.broadcast_shapes(da.shape[:-1], db.shape[:-1])
        conv = np.zeros(shape + (2 * k - 1,), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                conv[..., i + j] += da[..., i] * db[..., j]
        conv %= p
        for t in range(2 * k - 2, k - 1, -1):
            c = conv[..., t]
            conv[..., :k] += c[..., None] * self._red[t - k]
        return self.pack(conv[..., :k] % p)

    def pow(self, a, e):
        out = np.ones_like(np.asarray(a, dtype=np.int64))
        base = np.asarray(a, dtype=np.int64)
        e = int(e)
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def inv(self, a):
        return self.pow(a, self.q - 2)

    def eval_poly(self, coeffs, xs):
        """Horner evaluation; ``coeffs`` packed ints, ascending, full length
        including the leading coefficient."""
        acc = np.full_like(np.asarray(xs, dtype=np.int64), int(coeffs[-1]))
        for c in reversed(coeffs[:-1]):
            acc = self.mul(acc, xs)
            if c:
                acc = self.add(acc, np.int64(c))
        return acc

    # -- quadratic character ---------------------------------------------------

    def squares_mask(self):
        """Boolean table of squares (including 0), built in chunks."""
        if self._squares is None:
            mask = np.zeros(self.q, dtype=bool)
            for lo in range(0, self.q, _CHUNK):
                ys = np.arange(lo, min(lo + _CHUNK, self.q), dtype=np.int64)
                mask[self.mul(ys, ys)] = True
            self._squares = mask
        return self._squares

    def chi(self, vals, method="table"):
        """Quadratic character: +1 square unit, -1 non-square, 0 at zero."""
        vals = np.asarray(vals, dtype=np.int64)
        if method == "table":
            mask = self.squares_mask()
            out = np.where(mask[vals], np.int8(1), np.int8(-1))
        elif method == "pow":
            powed = self.pow(vals, (self.q - 1) // 2)
            out = np.where(powed == 1, np.int8(1), np.int8(-1))
        else:
            raise InvalidInput(f"unknown character method {method!r}")
        return np.where(vals == 0, np.int8(0), out)

    def find_root(self, poly_coeffs):
        """Smallest packed root of a polynomial with packed coefficients."""
        best = None
        for lo in range(0, self.q, _CHUNK):
            xs = np.arange(lo, min(lo + _CHUNK, self.q), dtype=np.int64)
            vals = self.eval_poly(poly_coeffs, xs)
            hits = xs[vals == 0]
            if hits.size:
                best = int(hits[0])
                break
        return best

    def __repr__(self):
        return f"SmallField(p={self.p}, k={self.k})"


_FIELD_CACHE = {}


def get_field(p, k):
    key = (p, k)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = SmallField(p, k)
    return _FIELD_CACHE[key]


def _embed_coefficient(field, coeff, root_powers, p):
    """Residue of F_{p^n} (int or digit sequence) -> packed element."""
    if isinstance(coeff, int):
        digits = [coeff % p]
    else:
        digits = [int(c) % p for c in coeff]
    acc = np.int64(0)
    for c, rp in zip(digits, root_powers):
        if c:
            acc = field.add(acc, field.mul(np.int64(c), rp))
    return int(acc)


def count_points(p, n, coeffs, k=1, budget=DEFAULT_BUDGET, base_modulus=None,
                 chi_method="table"):
    """Points of y^2 = Q(x) over F_{p^{nk}} (monic odd-degree model).

    ``coeffs`` are the low coefficients a_0 .. a_{2g} of Q over F_{p^n}
    (the monic leading coefficient is implicit), each an int (n = 1) or a
    length-n digit sequence over the canonical modulus of F_{p^n} (or
    ``base_modulus`` when supplied).

    Exhaustive: 1 + sum_x (1 + chi(Q(x))).  Raises BudgetExceeded beyond
    the enumeration budget.
    """
    N = n * k
    q = p ** N
    if q > budget:
        raise BudgetExceeded(f"q = p^{N} = {q} exceeds budget {budget}")
    field = get_field(p, N)
    if n == 1:
        packed = [int(c if isinstance(c, int) else c[0]) % p for c in coeffs]
    else:
        sub = list(base_modulus) if base_modulus is not None else lexmin_irreducible(p, n)
        if N == n:
            # same field: the canonical modulus is the context of the input
            if sub != field.modulus:
                # embed anyway via a root of sub in this presentation
                root = field.find_root([c % p for c in sub])
            else:
                root = p  # packed representation of t itself
        else:
            root = field.find_root([c % p for c in sub])
        if root is None:
            raise InvalidInput("base-field modulus has no root in extension")
        root_powers = [np.int64(1)]
        for _ in range(n - 1):
            root_powers.append(field.mul(root_powers[-1], np.int64(root)))
        packed = [_embed_coefficient(field, c, root_powers, p) for c in coeffs]
    full = packed + [1]  # monic
    total = 1  # the point at infinity
    for lo in range(0, q, _CHUNK):
        xs = np.arange(lo, min(lo + _CHUNK, q), dtype=np.int64)
        vals = field.eval_poly(full, xs)
        ch = field.chi(vals, method=chi_method)
        total += int(ch.size + ch.sum(dtype=np.int64))
    return total


def hasse_weil_ok(p, n, k, g, count):
    """|#C - (q+1)| <= 2g sqrt(q), checked with exact integers."""
    q = p ** (n * k)
    diff = count - (q + 1)
    return diff * diff <= 4 * g * g * q


# ---------------------------------------------------------------------------
# Exact-rational replay of the solver recursion


def _fmat_mul(a, b):
    d = len(a)
    return [
        [sum(a[i][h] * b[h][j] for h in range(d)) for j in range(d)] for i in range(d)
    ]


def _fmat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _fmat_scale(c, a):
    return [[c * x for x in row] for row in a]


def _fmat_zero(d):
    return [[Fraction(0)] * d for _ in range(d)]


def _fmat_inv(a):
    d = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(d)]
         for i, row in enumerate(a)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix in rational replay")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(d):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[d:] for row in m]


def rational_recursion_replay(A, B, X, Y, K0, ell):
    """Replay the defining recursion in exact rational arithmetic.

    A, B, X, Y are lists of d x d matrices (Fraction/int entries), index =
    Gamma-degree; K0 is the boundary matrix.  Returns the list
    [K_0, ..., K_{ell-1}].  Independent of the fixed-precision solver: the
    expected-value oracle for its tests.
    """

    def conv(polys):
        return [[[Fraction(x) for x in row] for row in mat] for mat in polys]

    A, B, X, Y = map(conv, (A, B, X, Y))
    K0 = [[Fraction(x) for x in row] for row in K0]
    d = len(K0)
    A0inv = _fmat_inv(A[0])
    B0inv = _fmat_inv(B[0])
    Ap = [_fmat_mul(A0inv, c) for c in A]
    Bp = [_fmat_mul(c, B0inv) for c in B]
    Xt = [_fmat_mul(c, B0inv) for c in X]
    Yt = [_fmat_mul(A0inv, c) for c in Y]
    Ks = [K0]

    def K(j):
        if j < 0 or j >= len(Ks):
            return None
        return Ks[j]

    for k in range(ell - 1):
        acc = _fmat_zero(d)
        for a in range(len(Ap)):
            for c in range(len(Bp)):
                if a + c == 0:
                    continue
                j = k - a - c + 1  # contributes j * K_j, zero unless j >= 1
                Kj = K(j)
                if Kj is None or j < 1:
                    continue
                acc = _fmat_add(acc, _fmat_scale(j, _fmat_mul(_fmat_mul(Ap[a], Kj), Bp[c])))
        for a in range(len(Ap)):
            for c in range(len(Xt)):
                Kj = K(k - a - c)
                if Kj is not None:
                    acc = _fmat_add(acc, _fmat_mul(_fmat_mul(Ap[a], Kj), Xt[c]))
        for a in range(len(Yt)):
            for c in range(len(Bp)):
                Kj = K(k - a - c)
                if Kj is not None:
                    acc = _fmat_add(acc, _fmat_mul(_fmat_mul(Yt[a], Kj), Bp[c]))
        Ks.append(_fmat_scale(Fraction(-1, k + 1), acc))
    return Ks
