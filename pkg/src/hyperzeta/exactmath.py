"""Exact integer/rational helpers shared across the package.

Everything here is deliberately float-free: precision budgets and
valuation bounds are derived from quantities of the shape
``u + v*log_p(w)`` and must round identically on every machine, so all
floor/ceil/comparison decisions are made by comparing integer powers.
"""

from fractions import Fraction
from math import gcd, inf


def vp(x, p):
    """p-adic valuation of a nonzero integer; ``inf`` for 0."""
    x = int(x)
    if x == 0:
        return inf
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def split_unit(x, p):
    """Write x = u * p^v with p not dividing u. Returns (v, u)."""
    x = int(x)
    if x == 0:
        raise ValueError("split_unit(0)")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v, x


def floor_log(p, x):
    """Largest k >= 0 with p^k <= x, for integers p >= 2, x >= 1."""
    if x < 1:
        raise ValueError("floor_log needs x >= 1")
    k, q = 0, p
    while q <= x:
        q *= p
        k += 1
    return k


def ceil_log(p, x):
    """Smallest k >= 0 with p^k >= x, for integers p >= 2, x >= 1."""
    if x < 1:
        raise ValueError("ceil_log needs x >= 1")
    k, q = 0, 1
    while q < x:
        q *= p
        k += 1
    return k


def centered_residue(x, modulus):
    """Representative of x mod modulus in (-modulus/2, modulus/2]."""
    r = x % modulus
    if 2 * r > modulus:
        r -= modulus
    return r


class LogValue:
    """The exact real number u + v*log_p(w)  (u, v rational, w >= 1 integer).

    Supports the arithmetic actually needed by precision formulas
    (addition, scaling by rationals, adding integers) and exact
    floor/ceil/comparison against rationals via integer power
    comparisons.  Plain rationals embed as v = 0.
    """

    __slots__ = ("u", "v", "p", "w")

    def __init__(self, u, v=0, p=2, w=1):
        self.u = Fraction(u)
        self.v = Fraction(v)
        self.p = p
        self.w = w
        if w == 1:
            self.v = Fraction(0)
        if self.v == 0:
            self.w = 1

    @staticmethod
    def log(p, w):
        """log_p(w) as a LogValue."""
        return LogValue(0, 1, p, w)

    def _compatible(self, other):
        if self.v and other.v and (self.p, self.w) != (other.p, other.w):
            raise ValueError("mixed log bases are not supported")

    def __add__(self, other):
        if isinstance(other, LogValue):
            self._compatible(other)
            p = self.p if self.v else other.p
            w = self.w if self.v else other.w
            return LogValue(self.u + other.u, self.v + other.v, p, w)
        return LogValue(self.u + Fraction(other), self.v, self.p, self.w)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * (other if isinstance(other, LogValue) else LogValue(other))

    def __rsub__(self, other):
        return LogValue(other) + (-1) * self

    def __mul__(self, scalar):
        scalar = Fraction(scalar)
        return LogValue(self.u * scalar, self.v * scalar, self.p, self.w)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def _cmp_rational(self, t):
        """Sign of (self - t) for rational t, decided exactly."""
        t = Fraction(t)
        if self.v == 0:
            d = self.u - t
            return (d > 0) - (d < 0)
        # self - t = v*log_p(w) - (t - u); compare v*log_p(w) with s := t-u.
        s = t - self.u
        v = self.v
        # v > 0 here or flip both sides (w >= 2 so log > 0 exactly when w > 1).
        flip = 1
        if v < 0:
            v, s, flip = -v, -s, -1
        # v*log_p(w) vs s  <=>  w^(v*D) vs p^(s*D) for a common denominator D.
        D = (v.denominator * s.denominator) // gcd(v.denominator, s.denominator)
        a = self.w ** int(v * D)
        if s < 0:
            return flip  # positive vs negative
        b = self.p ** int(s * D)
        return flip * ((a > b) - (a < b))

    def __le__(self, other):
        return self._cmp_rational(other) <= 0

    def __lt__(self, other):
        return self._cmp_rational(other) < 0

    def __ge__(self, other):
        return self._cmp_rational(other) >= 0

    def __gt__(self, other):
        return self._cmp_rational(other) > 0

    def __ceil__(self):
        n = self._float_guess()
        while self._cmp_rational(n) > 0:
            n += 1
        while self._cmp_rational(n - 1) <= 0:
            n -= 1
        return n

    def __floor__(self):
        n = self._float_guess()
        while self._cmp_rational(n) < 0:
            n -= 1
        while self._cmp_rational(n + 1) >= 0:
            n += 1
        return n

    def ceil(self):
        return self.__ceil__()

    def floor(self):
        return self.__floor__()

    def _float_guess(self):
        from math import log as _ln

        val = float(self.u)
        if self.v:
            val += float(self.v) * _ln(self.w) / _ln(self.p)
        return round(val)

    def __float__(self):
        from math import log as _ln

        val = float(self.u)
        if self.v:
            val += float(self.v) * _ln(self.w) / _ln(self.p)
        return val

    def __repr__(self):
        if self.v == 0:
            return f"LogValue({self.u})"
        return f"LogValue({self.u} + {self.v}*log_{self.p}({self.w}))"


def ceil_mixed(rat, coef, p, w):
    """ceil(rat + coef*log_p(w)) computed exactly; rat, coef rational."""
    return LogValue(rat, coef, p, w).ceil()


def floor_mixed(rat, coef, p, w):
    """floor(rat + coef*log_p(w)) computed exactly."""
    return LogValue(rat, coef, p, w).floor()


# ---------------------------------------------------------------------------
# Polynomials over F_p (dense lists of small ints, index = degree) -- used for
# modulus selection and irreducibility testing.


def _pm_trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def pm_mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            out[i + j] = (out[i + j] + a * b) % p
    return _pm_trim(out)

def pm_rem(f, g, p):
    """f mod g over F_p; g monic-normalized internally."""
    f = [c % p for c in f]
    _pm_trim(f)
    g = [c % p for c in g]
    _pm_trim(g)
    if not g:
        raise ZeroDivisionError("polynomial mod 0")
    inv_lead = pow(g[-1], p - 2, p)
    dg = len(g) - 1
    while len(f) - 1 >= dg and f:
        coef = (f[-1] * inv_lead) % p
        shift = len(f) - 1 - dg
        for i, b in enumerate(g):
            f[shift + i] = (f[shift + i] - coef * b) % p
        _pm_trim(f)
    return f


def pm_gcd(f, g, p):
    f, g = [c % p for c in f], [c % p for c in g]
    _pm_trim(f)
    _pm_trim(g)
    while g:
        f, g = g, pm_rem(f, g, p)
    if f:
        inv = pow(f[-1], p - 2, p)
        f = [(c * inv) % p for c in f]
    return f


def pm_powmod_x(e, modpoly, p):
    """x^e mod (modpoly, p) by square-and-multiply."""
    result = [1]
    base = pm_rem([0, 1], modpoly, p)
    while e:
        if e & 1:
            result = pm_rem(pm_mul(result, base, p), modpoly, p)
        base = pm_rem(pm_mul(base, base, p), modpoly, p)
        e >>= 1
    return result


def is_irreducible(poly, p):
    """Rabin irreducibility test for a monic polynomial over F_p."""
    poly = [c % p for c in poly]
    n = len(poly) - 1
    if n < 1 or poly[-1] != 1:
        return False
    if n == 1:
        return True
    # x^(p^n) == x mod poly
    xq = pm_powmod_x(p ** n, poly, p)
    if pm_rem([c - b for c, b in zip_longest_sub(xq, [0, 1])], poly, p):
        return False
    # for each prime divisor q of n: gcd(x^(p^(n/q)) - x, poly) == 1
    for q in prime_divisors(n):
        xr = pm_powmod_x(p ** (n // q), poly, p)
        diff = [c - b for c, b in zip_longest_sub(xr, [0, 1])]
        if len(pm_gcd(diff, poly, p)) != 1:
            return False
    return True


def zip_longest_sub(a, b):
    m = max(len(a), len(b))
    return zip(a + [0] * (m - len(a)), b + [0] * (m - len(b)))


def prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def lexmin_irreducible(p, n):
    """The monic irreducible of degree n over F_p whose coefficient vector
    (c_0, ..., c_{n-1}) encodes the smallest integer sum(c_i * p^i).

    Deterministic and implementation-independent; degree 1 gives ``t``.
    """
    if n == 1:
        return [0, 1]
    for m in range(p ** n):
        digits = []
        mm = m
        for _ in range(n):
            digits.append(mm % p)
            mm //= p
        cand = digits + [1]
        if is_irreducible(cand, p):
            return cand
    raise AssertionError("no irreducible polynomial found")  # unreachable


def is_prime(m):
    """Deterministic Miller-Rabin for word-sized integers."""
    if m < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if m % q == 0:
            return m == q
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True
