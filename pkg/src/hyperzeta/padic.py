"""Fixed absolute-precision arithmetic in unramified p-adic rings.

A :class:`PadicContext` models Z_{p^n} / p^W for an odd prime p: elements
are length-n coefficient vectors over Z/p^W in the power basis of a monic
integral polynomial ``phi`` whose reduction mod p is irreducible.  The
context precomputes the Frobenius image sigma(t) (Hensel lift of t^p) so
that sigma acts Z_p-linearly, and provides Teichmueller lifts and unit
inversion by Newton iteration.

Two element layers coexist:

* a *raw* layer used by the solvers -- an ``mpz`` for n = 1, a tuple of
  ``mpz`` otherwise, always reduced mod p^W; all raw kernels live on the
  context so hot loops pay one attribute lookup;
* thin wrapper classes :class:`ZqElement` (integral elements) and
  :class:`ScaledElement` (mantissa * p^-scale, housing every quantity of
  negative valuation) for the public surface and the tests.

Absolute-precision semantics throughout: two values are the same mod p^a
iff their difference has valuation >= a.  There is no floating
normalization and no relative-precision tracking.
"""

from math import inf

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    mpz = int

from .errors import InvalidInput, NonUnit
from .exactmath import (
    is_irreducible,
    is_prime,
    lexmin_irreducible,
    pm_powmod_x,
    vp,
)


class PadicContext:
    """Immutable description of Z_{p^n}/p^W plus precomputed structure.

    Safe to share between threads/processes; all operations are pure.
    """

    def __init__(self, p, n, W, phi=None):
        if not is_prime(p):
            raise InvalidInput(f"p = {p} is not prime")
        if p == 2:
            raise InvalidInput("even characteristic is out of scope")
        if n < 1:
            raise InvalidInput("extension degree must be >= 1")
        if W < 1:
            raise InvalidInput("working precision must be >= 1")
        self.p = p
        self.n = n
        self.W = W
        self.pW = mpz(p) ** W
        if phi is None:
            phi = lexmin_irreducible(p, n)
        else:
            phi = [int(c) for c in phi]
            if len(phi) != n + 1 or phi[-1] != 1:
                raise InvalidInput("phi must be monic of degree n")
            if not is_irreducible([c % p for c in phi], p):
                raise InvalidInput("phi is not irreducible mod p")
        self.phi = tuple(phi)
        self.q = p ** n
        # t^{n+j} = sum_i red[j][i] t^i  (mod phi), for j = 0 .. n-2
        self._red = self._reduction_rows()
        # sigma(t)^i for i = 0..n-1, sigma(t) the Hensel lift of t^p
        if n > 1:
            self._sigma_pows = self._compute_sigma_pows()
        else:
            self._sigma_pows = None

    # -- raw element layer ---------------------------------------------------

    def zero(self):
        return mpz(0) if self.n == 1 else (mpz(0),) * self.n

    def one(self):
        return self.from_int(1)

    def from_int(self, c):
        c = mpz(c) % self.pW
        if self.n == 1:
            return c
        return (c,) + (mpz(0),) * (self.n - 1)

    def from_coeffs(self, coeffs):
        """Raw element from a length-n integer coefficient sequence."""
        coeffs = list(coeffs)
        if len(coeffs) != self.n:
            raise InvalidInput(f"expected {self.n} coefficients")
        if self.n == 1:
            return mpz(coeffs[0]) % self.pW
        return tuple(mpz(c) % self.pW for c in coeffs)

    def coeffs(self, a):
        """Raw element -> tuple of plain ints in [0, p^W)."""
        if self.n == 1:
            return (int(a),)
        return tuple(int(c) for c in a)

    def is_zero(self, a):
        if self.n == 1:
            return a == 0
        return all(c == 0 for c in a)

    def add(self, a, b):
        if self.n == 1:
            return (a + b) % self.pW
        pW = self.pW
        return tuple((x + y) % pW for x, y in zip(a, b))

    def sub(self, a, b):
        if self.n == 1:
            return (a - b) % self.pW
        pW = self.pW
        return tuple((x - y) % pW for x, y in zip(a, b))

    def neg(self, a):
        if self.n == 1:
            return (-a) % self.pW
        pW = self.pW
        return tuple((-x) % pW for x in a)

    def smul(self, c, a):
        """Scalar (integer) times raw element."""
        if self.n == 1:
            return (c * a) % self.pW
        pW = self.pW
        return tuple((c * x) % pW for x in a)

    def mul(self, a, b):
        n = self.n
        pW = self.pW
        if n == 1:
            return (a * b) % pW
        if n == 2:
            a0, a1 = a
            b0, b1 = b
            c2 = a1 * b1
            r = self._red[0]
            return ((a0 * b0 + c2 * r[0]) % pW, (a0 * b1 + a1 * b0 + c2 * r[1]) % pW)
        # schoolbook convolution then fold t^{n}..t^{2n-2} via reduction rows
        conv = [mpz(0)] * (2 * n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        for j in range(2 * n - 2, n - 1, -1):
            c = conv[j]
            if c:
                row = self._red[j - n]
                for i in range(n):
                    conv[i] += c * row[i]
        return tuple(c % pW for c in conv[:n])

    def pow(self, a, e):
        result = self.one()
        base = a
        e = int(e)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def val(self, a):
        """Valuation of a raw element; inf if zero at full width."""
        p = self.p
        if self.n == 1:
            return vp(a, p) if a else inf
        v = inf
        for c in a:
            if c:
                w = vp(c, p)
                if w < v:
                    v = w
                    if v == 0:
                        return 0
        return v

    def inv(self, a):
        """Inverse of a unit mod p^W by Newton iteration."""
        res = self.residue(a)
        if self.res_is_zero(res):
            raise NonUnit("element has positive valuation")
        x = self.from_coeffs(self.res_inv(res))
        # x correct mod p; each step doubles the correct digits
        steps = max(1, (self.W - 1).bit_length())
        two = self.from_int(2)
        for _ in range(steps):
            x = self.mul(x, self.sub(two, self.mul(a, x)))
        return x

    def sigma(self, a, k=1):
        """sigma^k of a raw element; sigma fixes Z_p, sends t to the
        precomputed Hensel lift of t^p."""
        k %= self.n
        if self.n == 1 or k == 0:
            return a
        for _ in range(k):
            acc = [mpz(0)] * self.n
            for i, c in enumerate(a):
                if c:
                    img = self._sigma_pows[i]
                    for j in range(self.n):
                        acc[j] += c * img[j]
            a = tuple(c % self.pW for c in acc)
        return a

    def exact_div_p(self, a, k):
        """Divide by p^k, exact; raises if any coefficient is not divisible."""
        if k == 0:
            return a
        pk = mpz(self.p) ** k
        if self.n == 1:
            q, r = divmod(a, pk)
            if r:
                raise NonUnit("inexact division by p^k")
            return q
        out = []
        for c in a:
            q, r = divmod(c, pk)
            if r:
                raise NonUnit("inexact division by p^k")
            out.append(q)
        return tuple(out)

    def reduce_width(self, a, w):
        """Truncate a raw element to w base-p digits (w <= W)."""
        m = mpz(self.p) ** w
        if self.n == 1:
            return a % m
        return tuple(c % m for c in a)

    # -- residue field F_{p^n} (length-n int tuples mod p) -------------------

    def residue(self, a):
        p = self.p
        if self.n == 1:
            return (int(a % p),)
        return tuple(int(c % p) for c in a)

    def res_is_zero(self, r):
        return all(c == 0 for c in r)

    def res_mul(self, r, s):
        n, p = self.n, self.p
        if n == 1:
            return ((r[0] * s[0]) % p,)
        conv = [0] * (2 * n - 1)
        for i, x in enumerate(r):
            for j, y in enumerate(s):
                conv[i + j] += x * y
        for j in range(2 * n - 2, n - 1, -1):
            c = conv[j]
            if c:
                row = self._red[j - n]
                for i in range(n):
                    conv[i] += c * int(row[i] % p)
        return tuple(c % p for c in conv[:n])

    def res_add(self, r, s):
        p = self.p
        return tuple((x + y) % p for x, y in zip(r, s))

    def res_pow(self, r, e):
        out = (1,) + (0,) * (self.n - 1)
        base = r
        while e:
            if e & 1:
                out = self.res_mul(out, base)
            base = self.res_mul(base, base)
            e >>= 1
        return out

    def res_inv(self, r):
        if self.res_is_zero(r):
            raise NonUnit("zero residue")
        return self.res_pow(r, self.q - 2)

    def teichmuller_raw(self, residue):
        """Teichmueller lift of a residue (tuple mod p) as a raw element."""
        res = tuple(int(c) % self.p for c in residue)
        if self.res_is_zero(res):
            return self.zero()
        z = self.from_coeffs(res)
        if self.q == 2:  # unreachable (p odd) but keeps the formula total
            return z
        qm1 = self.q - 1
        inv_qm1 = self.from_int(pow(qm1, -1, int(self.pW)))
        steps = max(1, (self.W - 1).bit_length()) + 1
        for _ in range(steps):
            w = self.pow(z, qm1 - 1)  # z^{q-2}
            f = self.sub(self.mul(w, z), self.one())  # z^{q-1} - 1
            if self.is_zero(f):
                break
            # z <- z - f / ((q-1) z^{q-2})
            delta = self.mul(self.mul(f, self.inv(w)), inv_qm1)
            z = self.sub(z, delta)
        assert self.is_zero(self.sub(self.pow(z, self.q), z))
        return z

    # -- construction internals ----------------------------------------------

    def _reduction_rows(self):
        n, pW = self.n, self.pW
        if n == 1:
            return ()
        # t^n = -(phi_0 + ... + phi_{n-1} t^{n-1})
        rows = [tuple(mpz(-self.phi[i]) % pW for i in range(n))]
        for _ in range(n - 2):
            prev = rows[-1]
            shifted = [mpz(0)] + list(prev[: n - 1])
            top = prev[n - 1]
            row0 = rows[0]
            rows.append(tuple((shifted[i] + top * row0[i]) % pW for i in range(n)))
        return tuple(rows)

    def _compute_sigma_pows(self):
        # Hensel-lift the root t^p of phi from precision 1 to W.
        z = self.from_coeffs(_pad(pm_powmod_x(self.p, list(self.phi), self.p), self.n))
        steps = max(1, (self.W - 1).bit_length()) + 1
        for _ in range(steps):
            fz = self._eval_phi(z)
            if self.is_zero(fz):
                break
            dfz = self._eval_dphi(z)
            z = self.sub(z, self.mul(fz, self.inv(dfz)))
        assert self.is_zero(self._eval_phi(z)), "sigma(t) lift did not converge"
        pows = [self.one(), z]
        for _ in range(self.n - 2):
            pows.append(self.mul(pows[-1], z))
        return tuple(pows)

    def _eval_phi(self, z):
        acc = self.from_int(self.phi[-1])
        for c in reversed(self.phi[:-1]):
            acc = self.add(self.mul(acc, z), self.from_int(c))
        return acc

    def _eval_dphi(self, z):
        acc = self.zero()
        for i in range(len(self.phi) - 1, 0, -1):
            acc = self.add(self.mul(acc, z), self.from_int(i * self.phi[i]))
        return acc

    def __repr__(self):
        return f"PadicContext(p={self.p}, n={self.n}, W={self.W})"

    def __eq__(self, other):
        return (
            isinstance(other, PadicContext)
            and (self.p, self.n, self.W, self.phi) == (other.p, other.n, other.W, other.phi)
        )

    def __hash__(self):
        return hash((self.p, self.n, self.W, self.phi))


def _pad(coeffs, n):
    coeffs = list(coeffs)
    return coeffs + [0] * (n - len(coeffs))


class ZqElement:
    """An element of Z_{p^n}/p^W: a thin wrapper over the raw layer."""

    __slots__ = ("ctx", "raw")

    def __init__(self, ctx, raw):
        self.ctx = ctx
        self.raw = raw

    @classmethod
    def from_coeffs(cls, ctx, coeffs):
        return cls(ctx, ctx.from_coeffs(coeffs))

    @classmethod
    def from_int(cls, ctx, c):
        return cls(ctx, ctx.from_int(c))

    @property
    def coeffs(self):
        return self.ctx.coeffs(self.raw)

    def __add__(self, other):
        return ZqElement(self.ctx, self.ctx.add(self.raw, _raw(self.ctx, other)))

    __radd__ = __add__

    def __sub__(self, other):
        return ZqElement(self.ctx, self.ctx.sub(self.raw, _raw(self.ctx, other)))

    def __rsub__(self, other):
        return ZqElement(self.ctx, self.ctx.sub(_raw(self.ctx, other), self.raw))

    def __mul__(self, other):
        return ZqElement(self.ctx, self.ctx.mul(self.raw, _raw(self.ctx, other)))

    __rmul__ = __mul__

    def __neg__(self):
        return ZqElement(self.ctx, self.ctx.neg(self.raw))

    def __pow__(self, e):
        return ZqElement(self.ctx, self.ctx.pow(self.raw, e))

    def __eq__(self, other):
        if isinstance(other, int):
            other = ZqElement.from_int(self.ctx, other)
        return isinstance(other, ZqElement) and self.ctx.is_zero(
            self.ctx.sub(self.raw, other.raw)
        )

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return self.ctx.is_zero(self.raw)

    def valuation(self):
        return self.ctx.val(self.raw)

    def is_unit(self):
        return not self.ctx.res_is_zero(self.ctx.residue(self.raw))

    def residue(self):
        return self.ctx.residue(self.raw)

    def __repr__(self):
        return f"Zq{self.coeffs}"


class ScaledElement:
    """mantissa * p^-scale with the mantissa a width-W element of Z_{p^n}.

    Houses every quantity of negative valuation; the representable
    absolute precision is W - scale, so callers keep scales at or below
    the headroom their width budget reserved.
    """

    __slots__ = ("ctx", "raw", "scale")

    def __init__(self, ctx, raw, scale=0):
        if scale < 0:
            raise ValueError("scale must be >= 0")
        self.ctx = ctx
        self.raw = raw
        self.scale = scale

    @classmethod
    def from_zq(cls, x, scale=0):
        return cls(x.ctx, x.raw, scale)

    @property
    def mantissa(self):
        return ZqElement(self.ctx, self.raw)

    def valuation(self):
        v = self.ctx.val(self.raw)
        if v == inf:
            return inf  # only known to be >= W - scale
        return v - self.scale

    def normalized(self):
        """Equal value with minimal scale (p factors moved into the scale)."""
        if self.scale == 0:
            return self
        v = self.ctx.val(self.raw)
        if v == inf:
            return ScaledElement(self.ctx, self.ctx.zero(), 0)
        k = min(self.scale, int(v))
        if k == 0:
            return self
        return ScaledElement(self.ctx, self.ctx.exact_div_p(self.raw, k), self.scale - k)

    def _aligned(self, other):
        s = max(self.scale, other.scale)
        a = self.raw if self.scale == s else self.ctx.smul(self.ctx.p ** (s - self.scale), self.raw)
        b = other.raw if other.scale == s else self.ctx.smul(self.ctx.p ** (s - other.scale), other.raw)
        return a, b, s

    def __add__(self, other):
        other = _scaled(self.ctx, other)
        a, b, s = self._aligned(other)
        return ScaledElement(self.ctx, self.ctx.add(a, b), s)

    __radd__ = __add__

    def __sub__(self, other):
        other = _scaled(self.ctx, other)
        a, b, s = self._aligned(other)
        return ScaledElement(self.ctx, self.ctx.sub(a, b), s)

    def __mul__(self, other):
        other = _scaled(self.ctx, other)
        return ScaledElement(
            self.ctx, self.ctx.mul(self.raw, other.raw), self.scale + other.scale
        )

    __rmul__ = __mul__

    def __neg__(self):
        return ScaledElement(self.ctx, self.ctx.neg(self.raw), self.scale)

    def congruent(self, other, a):
        """True iff self == other mod p^a (difference valuation >= a)."""
        other = _scaled(self.ctx, other)
        d = self - other
        return d.valuation() >= a

    def __eq__(self, other):
        """Equality of represented values at full common width."""
        if not isinstance(other, (ScaledElement, ZqElement, int)):
            return NotImplemented
        other = _scaled(self.ctx, other)
        a, b, _ = self._aligned(other)
        return self.ctx.is_zero(self.ctx.sub(a, b))

    def __hash__(self):
        n = self.normalized()
        return hash((n.ctx.coeffs(n.raw), n.scale))

    def __repr__(self):
        return f"Scaled({self.ctx.coeffs(self.raw)}, p^-{self.scale})"


def _raw(ctx, x):
    if isinstance(x, ZqElement):
        return x.raw
    if isinstance(x, int):
        return ctx.from_int(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Zq")


def _scaled(ctx, x):
    if isinstance(x, ScaledElement):
        return x
    if isinstance(x, ZqElement):
        return ScaledElement(ctx, x.raw, 0)
    if isinstance(x, int):
        return ScaledElement(ctx, ctx.from_int(x), 0)
    raise TypeError(f"cannot coerce {type(x).__name__} to ScaledElement")


# ---------------------------------------------------------------------------
# Spec-level convenience operations


def make_context(p, n, W, phi=None):
    """Create the canonical context: phi is the lexicographically least
    monic irreducible of degree n mod p (lifted with digits in [0, p)),
    unless an explicit modulus is supplied."""
    return PadicContext(p, n, W, phi)


def invert(x):
    """Inverse of a unit in Z_{p^n}/p^W; raises NonUnit otherwise."""
    return ZqElement(x.ctx, x.ctx.inv(x.raw))


def frobenius(x, k=1):
    """sigma^k(x) for the p-power Frobenius sigma."""
    return ZqElement(x.ctx, x.ctx.sigma(x.raw, k))


def teichmuller(ctx, residue):
    """Teichmueller lift of a residue of F_{p^n}.

    ``residue`` is an int (n = 1) or a length-n coefficient sequence mod p;
    teichmuller(0) = 0 by convention.
    """
    if isinstance(residue, int):
        residue = (residue,) + (0,) * (ctx.n - 1)
    return ZqElement(ctx, ctx.teichmuller_raw(residue))


def valuation(x):
    """Valuation of a ZqElement or ScaledElement (inf if zero at width)."""
    if isinstance(x, (ZqElement, ScaledElement)):
        return x.valuation()
    raise TypeError("valuation expects a ZqElement or ScaledElement")
