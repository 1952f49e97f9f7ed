"""Streaming solver for the matrix differential equation

    A dK/dGamma B + A K X + Y K B = 0,   K(0) = K0,

over Z_{p^n} at fixed absolute precision.  Writing A' = A0^-1 A,
B' = B B0^-1, Xt = X B0^-1, Yt = A0^-1 Y, the Gamma^k coefficient of the
normalized equation isolates K_{k+1}:

    (k+1) K_{k+1} = f_k(K_k, ..., K_{k-(zeta-1)}),

a window recursion touching at most zeta earlier coefficients.  Three
modes share the recursion: a full polynomial solve retaining every
coefficient, a streaming evaluation at an integral point gamma' that
retains only the window plus the running accumulator
L_k = L_{k-1} + K_k gamma'^k, and a multipoint evaluation over a
subproduct tree.

Divisions by k+1 = unit * p^v are exact: multiply by the unit inverse and
push v into the shared power-of-p denominator, which guard digits absorb.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import inf

from .errors import (
    DomainError,
    GuardExhausted,
    InvalidInput,
    SingularLeadingCoefficient,
    ValuationViolation,
)
from .exactmath import LogValue, ceil_log, split_unit
from .padic import ScaledElement, ZqElement


class ScaledMatrix:
    """Square matrix over Z_{p^n} with one shared power-of-p denominator.

    ``entries`` is a flat row-major list of raw context elements; the
    represented matrix is entries * p^-scale.  A detected scalar matrix
    (c * I) short-circuits multiplication from d^3 to d^2 products.
    """

    __slots__ = ("ctx", "d", "entries", "scale", "_scalar")

    def __init__(self, ctx, d, entries, scale=0, _detect_scalar=True):
        self.ctx = ctx
        self.d = d
        self.entries = entries
        self.scale = scale
        self._scalar = None
        if _detect_scalar and d > 1:
            diag = entries[0]
            is_zero = ctx.is_zero
            ok = True
            for i in range(d):
                for j in range(d):
                    e = entries[i * d + j]
                    if i == j:
                        if ctx.is_zero(ctx.sub(e, diag)):
                            continue
                        ok = False
                        break
                    elif not is_zero(e):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                self._scalar = diag
        elif d == 1:
            self._scalar = entries[0]

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, ctx, d):
        return cls(ctx, d, [ctx.zero()] * (d * d), 0, _detect_scalar=False)._mark_scalar(ctx.zero())

    @classmethod
    def identity(cls, ctx, d):
        z, o = ctx.zero(), ctx.one()
        ent = [o if i == j else z for i in range(d) for j in range(d)]
        return cls(ctx, d, ent, 0, _detect_scalar=False)._mark_scalar(o)

    @classmethod
    def scalar(cls, ctx, d, raw, scale=0):
        z = ctx.zero()
        ent = [raw if i == j else z for i in range(d) for j in range(d)]
        return cls(ctx, d, ent, scale, _detect_scalar=False)._mark_scalar(raw)

    @classmethod
    def from_rows(cls, ctx, rows, scale=0):
        """Rows of ZqElement/ScaledElement/int; scales are unified."""
        d = len(rows)
        flat = [x for row in rows for x in row]
        max_s = scale
        coerced = []
        for x in flat:
            if isinstance(x, ScaledElement):
                coerced.append((x.raw, x.scale))
                max_s = max(max_s, x.scale)
            elif isinstance(x, ZqElement):
                coerced.append((x.raw, 0))
            elif isinstance(x, int):
                coerced.append((ctx.from_int(x), 0))
            else:
                raise TypeError(f"bad matrix entry type {type(x).__name__}")
        ent = [
            ctx.smul(ctx.p ** (max_s - s), r) if s < max_s else r for r, s in coerced
        ]
        return cls(ctx, d, ent, max_s)

    def _mark_scalar(self, raw):
        self._scalar = raw
        return self

    # -- accessors -----------------------------------------------------------

    def entry(self, i, j):
        return ScaledElement(self.ctx, self.entries[i * self.d + j], self.scale)

    def rows(self):
        d = self.d
        return [[self.entry(i, j) for j in range(d)] for i in range(d)]

    def is_zero(self):
        z = self.ctx.is_zero
        return all(z(e) for e in self.entries)

    # -- arithmetic ----------------------------------------------------------

    def _aligned_entries(self, other):
        s = max(self.scale, other.scale)
        ctx = self.ctx
        a = self.entries
        b = other.entries
        if self.scale < s:
            f = ctx.p ** (s - self.scale)
            a = [ctx.smul(f, e) for e in a]
        if other.scale < s:
            f = ctx.p ** (s - other.scale)
            b = [ctx.smul(f, e) for e in b]
        return a, b, s

    def add(self, other):
        a, b, s = self._aligned_entries(other)
        ctx = self.ctx
        return ScaledMatrix(ctx, self.d, [ctx.add(x, y) for x, y in zip(a, b)], s)

    def sub(self, other):
        a, b, s = self._aligned_entries(other)
        ctx = self.ctx
        return ScaledMatrix(ctx, self.d, [ctx.sub(x, y) for x, y in zip(a, b)], s)

    def neg(self):
        ctx = self.ctx
        return ScaledMatrix(
            ctx, self.d, [ctx.neg(e) for e in self.entries], self.scale, _detect_scalar=False
        )

    def smul_int(self, c):
        """Multiply by a plain integer."""
        ctx = self.ctx
        return ScaledMatrix(
            ctx, self.d, [ctx.smul(c, e) for e in self.entries], self.scale, _detect_scalar=False
        )

    def mul_raw(self, raw, add_scale=0):
        """Multiply by a raw ring scalar, optionally adding to the scale."""
        ctx = self.ctx
        mul = ctx.mul
        return ScaledMatrix(
            ctx,
            self.d,
            [mul(e, raw) for e in self.entries],
            self.scale + add_scale,
            _detect_scalar=False,
        )

    def matmul(self, other):
        if self._scalar is not None:
            return other.mul_raw(self._scalar, self.scale)
        if other._scalar is not None:
            return self.mul_raw(other._scalar, other.scale)
        ctx = self.ctx
        d = self.d
        A = self.entries
        B = other.entries
        out = []
        if ctx.n == 1:
            pW = ctx.pW
            for i in range(d):
                r = i * d
                for j in range(d):
                    s = A[r] * B[j]
                    for h in range(1, d):
                        s += A[r + h] * B[h * d + j]
                    out.append(s % pW)
        else:
            mul, add = ctx.mul, ctx.add
            for i in range(d):
                r = i * d
                for j in range(d):
                    s = mul(A[r], B[j])
                    for h in range(1, d):
                        s = add(s, mul(A[r + h], B[h * d + j]))
                    out.append(s)
        return ScaledMatrix(ctx, d, out, self.scale + other.scale, _detect_scalar=False)

    def sigma(self, k=1):
        ctx = self.ctx
        if ctx.n == 1 or k % ctx.n == 0:
            return self
        return ScaledMatrix(
            ctx, self.d, [ctx.sigma(e, k) for e in self.entries], self.scale, _detect_scalar=False
        )

    # -- precision management -------------------------------------------------

    def normalized(self):
        """Equal value with minimal scale."""
        if self.scale == 0:
            return self
        ctx = self.ctx
        v = min((ctx.val(e) for e in self.entries), default=inf)
        if v == inf:
            return ScaledMatrix.zeros(ctx, self.d)
        k = min(self.scale, int(v))
        if k == 0:
            return self
        ent = [ctx.exact_div_p(e, k) for e in self.entries]
        return ScaledMatrix(ctx, self.d, ent, self.scale - k, _detect_scalar=False)

    def valuation(self):
        ctx = self.ctx
        v = min((ctx.val(e) for e in self.entries), default=inf)
        return v if v == inf else v - self.scale

    def reduced(self, m):
        """Truncate to absolute precision m (mantissas mod p^(m+scale))."""
        ctx = self.ctx
        w = min(ctx.W, m + self.scale)
        return ScaledMatrix(
            ctx, self.d, [ctx.reduce_width(e, w) for e in self.entries], self.scale
        )

    def congruent(self, other, a):
        """Entrywise equality mod p^a."""
        x, y, s = self._aligned_entries(other)
        ctx = self.ctx
        need = a + s
        if need > ctx.W:
            raise ValueError("congruence asked beyond representable width")
        for u, v in zip(x, y):
            dv = ctx.val(ctx.sub(u, v))
            if dv < need:
                return False
        return True

    def __repr__(self):
        return f"ScaledMatrix(d={self.d}, scale={self.scale})"


class MatPoly:
    """Matrix polynomial sum_i C_i Gamma^i with ScaledMatrix coefficients."""

    __slots__ = ("ctx", "d", "coeffs")

    def __init__(self, ctx, d, coeffs):
        self.ctx = ctx
        self.d = d
        self.coeffs = list(coeffs)
        while self.coeffs and self.coeffs[-1].is_zero() and len(self.coeffs) > 1:
            self.coeffs.pop()

    @classmethod
    def from_scalar_coeffs(cls, ctx, d, raws, scale=0):
        """Scalar polynomial sum raws_i Gamma^i embedded as c*I matrices."""
        return cls(ctx, d, [ScaledMatrix.scalar(ctx, d, r, scale) for r in raws])

    @classmethod
    def zero(cls, ctx, d):
        return cls(ctx, d, [ScaledMatrix.zeros(ctx, d)])

    @property
    def degree(self):
        i = len(self.coeffs) - 1
        while i > 0 and self.coeffs[i].is_zero():
            i -= 1
        return i

    def coeff(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return ScaledMatrix.zeros(self.ctx, self.d)

    def add(self, other):
        m = max(len(self.coeffs), len(other.coeffs))
        return MatPoly(self.ctx, self.d, [self.coeff(i).add(other.coeff(i)) for i in range(m)])

    def sub(self, other):
        m = max(len(self.coeffs), len(other.coeffs))
        return MatPoly(self.ctx, self.d, [self.coeff(i).sub(other.coeff(i)) for i in range(m)])

    def mul(self, other, truncate=None):
        """Full (or Gamma^truncate-truncated) convolution product."""
        dlim = self.degree + other.degree
        if truncate is not None:
            dlim = min(dlim, truncate - 1)
        out = []
        for k in range(dlim + 1):
            acc = None
            for a in range(max(0, k - other.degree), min(self.degree, k) + 1):
                t = self.coeff(a).matmul(other.coeff(k - a))
                acc = t if acc is None else acc.add(t)
            out.append(acc if acc is not None else ScaledMatrix.zeros(self.ctx, self.d))
        return MatPoly(self.ctx, self.d, out)

    def matmul_scalar_poly(self, other):
        return self.mul(other)

    def derivative(self):
        if len(self.coeffs) == 1:
            return MatPoly.zero(self.ctx, self.d)
        return MatPoly(
            self.ctx,
            self.d,
            [self.coeffs[i].smul_int(i) for i in range(1, len(self.coeffs))],
        )

    def sigma(self, k=1):
        return MatPoly(self.ctx, self.d, [c.sigma(k) for c in self.coeffs])

    def dilate(self, e):
        """Gamma -> Gamma^e."""
        if e == 1:
            return self
        out = [ScaledMatrix.zeros(self.ctx, self.d)] * (self.degree * e + 1)
        for i, c in enumerate(self.coeffs):
            out[i * e] = c
        return MatPoly(self.ctx, self.d, out)

    def shift(self, e):
        """Multiply by Gamma^e."""
        pad = [ScaledMatrix.zeros(self.ctx, self.d)] * e
        return MatPoly(self.ctx, self.d, pad + self.coeffs)

    def evaluate(self, point):
        """Horner evaluation at an integral point (ZqElement or int)."""
        raw = _point_raw(self.ctx, point)
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc.mul_raw(raw).add(c)
        return acc

    def valuation(self):
        return min((c.valuation() for c in self.coeffs), default=inf)

    def reduced(self, m):
        return MatPoly(self.ctx, self.d, [c.reduced(m) for c in self.coeffs])

    def congruent(self, other, a, upto=None):
        n = max(len(self.coeffs), len(other.coeffs))
        if upto is not None:
            n = min(n, upto)
        return all(self.coeff(i).congruent(other.coeff(i), a) for i in range(n))

    def __repr__(self):
        return f"MatPoly(d={self.d}, deg={self.degree})"


def _point_raw(ctx, point):
    if isinstance(point, ZqElement):
        return point.raw
    if isinstance(point, int):
        return ctx.from_int(point)
    if isinstance(point, ScaledElement):
        if point.scale > 0 and point.normalized().scale > 0:
            raise DomainError("evaluation point must be integral")
        return point.normalized().raw
    raise TypeError(f"bad evaluation point type {type(point).__name__}")


def matrix_inverse(M):
    """Inverse of a ScaledMatrix whose mantissa matrix is invertible mod p.

    Gauss-Jordan with unit pivots; raises SingularLeadingCoefficient when
    no unit pivot exists (determinant not a unit).
    """
    ctx = M.ctx
    d = M.d
    if M.scale != 0:
        M = M.normalized()
        if M.scale != 0:
            raise SingularLeadingCoefficient("matrix has negative valuation")
    a = [list(M.entries[i * d : (i + 1) * d]) for i in range(d)]
    inv = [[ctx.one() if i == j else ctx.zero() for j in range(d)] for i in range(d)]
    for col in range(d):
        piv = None
        for r in range(col, d):
            if not ctx.res_is_zero(ctx.residue(a[r][col])):
                piv = r
                break
        if piv is None:
            raise SingularLeadingCoefficient("matrix is singular mod p")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        pi = ctx.inv(a[col][col])
        a[col] = [ctx.mul(pi, x) for x in a[col]]
        inv[col] = [ctx.mul(pi, x) for x in inv[col]]
        for r in range(d):
            if r == col:
                continue
            f = a[r][col]
            if ctx.is_zero(f):
                continue
            a[r] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(a[r], a[col])]
            inv[r] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(inv[r], inv[col])]
    return ScaledMatrix(ctx, d, [x for row in inv for x in row], 0)


def matrix_is_invertible(M):
    """Invertible over the fraction field: nonzero determinant mantissa."""
    ctx = M.ctx
    d = M.d
    # permanent-style Laplace expansion is fine at d <= 6
    det = _det_raw(ctx, d, M.entries)
    return not ctx.is_zero(det)


def _det_raw(ctx, d, ent):
    if d == 1:
        return ent[0]
    if d == 2:
        return ctx.sub(ctx.mul(ent[0], ent[3]), ctx.mul(ent[1], ent[2]))
    det = ctx.zero()
    for j in range(d):
        if ctx.is_zero(ent[j]):
            continue
        minor = [ent[r * d + c] for r in range(1, d) for c in range(d) if c != j]
        term = ctx.mul(ent[j], _det_raw(ctx, d - 1, minor))
        det = ctx.add(det, term) if j % 2 == 0 else ctx.sub(det, term)
    return det


@dataclass
class SolveStats:
    """Instrumentation of one solver run."""

    steps: int = 0
    peak_retained: int = 0  # K-series matrices held at once (+ accumulator, power)
    aux_retained: int = 0  # cached convolution prefixes (constant in ell)
    max_step_loss: int = 0  # max v_p(k+1) absorbed by the guard digits
    mode: str = ""


def _as_exact(x):
    if isinstance(x, LogValue):
        return x
    return LogValue(Fraction(x))


class DiffEqSystem:
    """A validated instance of the differential operator plus its constants.

    Immutable once assembled; concurrent solves on one system are safe.
    """

    def __init__(self, A, B, X, Y, K0, *, alpha, gamma, delta, m, ell, zeta=None, psi=None):
        ctx = A.ctx
        d = A.d
        if not (B.d == X.d == Y.d == K0.d == d):
            raise InvalidInput("inconsistent matrix dimensions")
        self.ctx = ctx
        self.d = d
        self.A, self.B, self.X, self.Y = A, B, X, Y
        self.K0 = K0
        self.alpha = _as_exact(alpha)
        self.gamma = _as_exact(gamma)
        self.delta = _as_exact(delta)
        self.m = int(m)
        self.ell = int(ell)
        if self.m < 1 or self.ell < 1:
            raise InvalidInput("m and ell must be >= 1")

        A0 = A.coeff(0)
        B0 = B.coeff(0)
        try:
            self.A0inv = matrix_inverse(A0)
        except SingularLeadingCoefficient:
            raise SingularLeadingCoefficient("A_0 is not invertible")
        try:
            self.B0inv = matrix_inverse(B0)
        except SingularLeadingCoefficient:
            raise SingularLeadingCoefficient("B_0 is not invertible")
        if not matrix_is_invertible(K0):
            raise SingularLeadingCoefficient("K_0 is not invertible")

        degA, degB, degX, degY = A.degree, B.degree, X.degree, Y.degree
        zeta_min = max(degA + degB, degA + degX + 1, degY + degB + 1)
        self.zeta = int(zeta) if zeta is not None else zeta_min
        if self.zeta < zeta_min:
            raise InvalidInput(f"zeta must be >= {zeta_min}")

        # psi defaults to the generic 5(alpha+delta); an application may pass
        # a sharper value proven for its particular system
        self.psi = 5 * (self.alpha + self.delta) if psi is None else _as_exact(psi)
        loge = ceil_log(ctx.p, self.ell)
        self.epsilon = self.m + (5 * self.gamma + 1) * loge + self.psi
        self.eps_int = self.epsilon.ceil()
        self.guard = ceil_log(ctx.p, self.ell) + 1
        self.headroom = self.eps_int
        self.required_width = self.eps_int + self.guard + self.headroom
        if ctx.W < self.required_width:
            raise InvalidInput(
                f"context width {ctx.W} below required {self.required_width}"
            )

        psi_floor = self.psi.floor()
        for name, P in (("X", X), ("Y", Y)):
            v = P.valuation()
            if v != inf and v < -psi_floor:
                raise ValuationViolation(f"ord({name}) = {v} < -psi")

        # normalized convolution data: A' = A0inv A, B' = B B0inv,
        # Xt = X B0inv, Yt = A0inv Y
        self.Ap = MatPoly(ctx, d, [self.A0inv.matmul(c) for c in A.coeffs])
        self.Bp = MatPoly(ctx, d, [c.matmul(self.B0inv) for c in B.coeffs])
        self.Xt = MatPoly(ctx, d, [c.matmul(self.B0inv) for c in X.coeffs])
        self.Yt = MatPoly(ctx, d, [self.A0inv.matmul(c) for c in Y.coeffs])
        self.window_size = max(self.Ap.degree, self.Yt.degree) + 1
        assert self.window_size <= self.zeta

    def __repr__(self):
        return (
            f"DiffEqSystem(d={self.d}, p={self.ctx.p}, n={self.ctx.n}, "
            f"zeta={self.zeta}, ell={self.ell}, m={self.m}, eps={self.eps_int})"
        )


def required_width(p, *, m, ell, alpha=0, gamma=0, delta=0, psi=None):
    """Mantissa width needed to assemble a system with these constants."""
    alpha, gamma, delta = map(_as_exact, (alpha, gamma, delta))
    psi = 5 * (alpha + delta) if psi is None else _as_exact(psi)
    eps = m + (5 * gamma + 1) * ceil_log(p, ell) + psi
    e = eps.ceil()
    return e + (ceil_log(p, ell) + 1) + e


def assemble_system(A, B, X, Y, K0, *, alpha=0, gamma=0, delta=0, m, ell, zeta=None, psi=None):
    """Validate and seal a differential system; see DiffEqSystem."""
    return DiffEqSystem(
        A, B, X, Y, K0, alpha=alpha, gamma=gamma, delta=delta, m=m, ell=ell,
        zeta=zeta, psi=psi,
    )


# ---------------------------------------------------------------------------
# The recursion


def _divide_step(sys, f, k1):
    """K_{k+1} = f / (k+1), the division exact via the shared denominator."""
    ctx = sys.ctx
    v, u = split_unit(k1, ctx.p)
    if v > sys.guard:
        raise GuardExhausted(f"v_p({k1}) = {v} exceeds guard {sys.guard}")
    if u == 1:
        out = f if v == 0 else ScaledMatrix(ctx, sys.d, f.entries, f.scale + v)
    else:
        uinv = pow(u, -1, int(ctx.pW))
        out = ScaledMatrix(
            ctx, sys.d, [ctx.smul(uinv, e) for e in f.entries], f.scale + v
        )
    out = out.normalized()
    if out.scale > sys.headroom:
        raise GuardExhausted(
            f"solution scale {out.scale} exceeded headroom {sys.headroom}"
        )
    return out, v


def step_recursion(sys, k, window):
    """One recursion step from an explicit window.

    ``window[i]`` holds K_{k-i} (zero-padded below index 0); returns
    K_{k+1}.  This is the direct windowed-convolution form used as the
    reference path; the solve loops compute the same values with cached
    prefix sums.
    """
    if k + 1 >= sys.ell:
        raise InvalidInput("step index beyond truncation order")
    ctx = sys.ctx
    d = sys.d

    def K(j):
        i = k - j
        if j < 0 or i >= len(window):
            return None
        return window[i]

    acc = ScaledMatrix.zeros(ctx, d)
    Ap, Bp, Xt, Yt = sys.Ap, sys.Bp, sys.Xt, sys.Yt
    # term 1 without the (a, c) = (0, 0) piece: (b+1) A'_a K_{b+1} B'_c
    for a in range(Ap.degree + 1):
        for c in range(Bp.degree + 1):
            if a + c == 0 or a + c > k + 1:
                continue
            j = k - a - c + 1
            Kj = K(j)
            if Kj is None:
                continue
            t = Ap.coeff(a).matmul(Kj).matmul(Bp.coeff(c)).smul_int(j)
            acc = acc.add(t)
    # term 2: A'_a K_b Xt_c ; term 3: Yt_a K_b B'_c
    for a in range(Ap.degree + 1):
        for c in range(Xt.degree + 1):
            Kj = K(k - a - c)
            if Kj is None:
                continue
            acc = acc.add(Ap.coeff(a).matmul(Kj).matmul(Xt.coeff(c)))
    for a in range(Yt.degree + 1):
        for c in range(Bp.degree + 1):
            Kj = K(k - a - c)
            if Kj is None:
                continue
            acc = acc.add(Yt.coeff(a).matmul(Kj).matmul(Bp.coeff(c)))
    out, _ = _divide_step(sys, acc.neg(), k + 1)
    return out


class _Prefices:
    """Cached windowed prefix sums N1, N2, N3 reused across steps.

    N1_j = sum_a A'_a K'_{j-a}   (K'_b = (b+1) K_{b+1})
    N2_j = sum_a A'_a K_{j-a}
    N3_j = sum_a Yt_a K_{j-a}

    f_k = -( [N1 without K'_k] + sum_{c>=1} N1_{k-c} B'_c
             + sum_c N2_{k-c} Xt_c + sum_c N3_{k-c} B'_c ).
    """

    def __init__(self, sys):
        self.sys = sys
        zero = ScaledMatrix.zeros(sys.ctx, sys.d)
        self.n1 = deque([zero] * sys.Bp.degree, maxlen=max(sys.Bp.degree, 1))
        self.n2 = deque([zero] * sys.Xt.degree, maxlen=max(sys.Xt.degree, 1))
        self.n3 = deque([zero] * sys.Bp.degree, maxlen=max(sys.Bp.degree, 1))

    def count(self):
        return len(self.n1) + len(self.n2) + len(self.n3)

    def step(self, k, window):
        """Compute K_{k+1} given window[-1] = K_k (older to the left)."""
        sys = self.sys
        ctx = sys.ctx
        d = sys.d
        Ap, Bp, Xt, Yt = sys.Ap, sys.Bp, sys.Xt, sys.Yt
        wlen = len(window)

        def K(j):  # window[-1] = K_k
            i = wlen - 1 - (k - j)
            if j < 0 or i < 0:
                return None
            return window[i]

        n1_partial = None  # sum over a >= 1 of A'_a K'_{k-a}
        for a in range(1, Ap.degree + 1):
            j = k - a  # K'_j = (j+1) K_{j+1}
            Kj1 = K(j + 1)
            if Kj1 is None or j < 0:
                continue
            t = Ap.coeff(a).matmul(Kj1).smul_int(j + 1)
            n1_partial = t if n1_partial is None else n1_partial.add(t)
        if n1_partial is None:
            n1_partial = ScaledMatrix.zeros(ctx, d)

        n2_k = None
        for a in range(min(Ap.degree, k) + 1):
            t = Ap.coeff(a).matmul(K(k - a))
            n2_k = t if n2_k is None else n2_k.add(t)
        if n2_k is None:
            n2_k = ScaledMatrix.zeros(ctx, d)

        n3_k = None
        for a in range(min(Yt.degree, k) + 1):
            t = Yt.coeff(a).matmul(K(k - a))
            n3_k = t if n3_k is None else n3_k.add(t)
        if n3_k is None:
            n3_k = ScaledMatrix.zeros(ctx, d)

        acc = n1_partial  # c = 0 piece of term 1, without K'_k
        for c in range(1, Bp.degree + 1):
            prev = self.n1[-c] if c <= len(self.n1) else None
            if prev is not None:
                acc = acc.add(prev.matmul(Bp.coeff(c)))
        acc = acc.add(n2_k.matmul(Xt.coeff(0)))
        for c in range(1, Xt.degree + 1):
            prev = self.n2[-c] if c <= len(self.n2) else None
            if prev is not None:
                acc = acc.add(prev.matmul(Xt.coeff(c)))
        acc = acc.add(n3_k.matmul(Bp.coeff(0)))
        for c in range(1, Bp.degree + 1):
            prev = self.n3[-c] if c <= len(self.n3) else None
            if prev is not None:
                acc = acc.add(prev.matmul(Bp.coeff(c)))

        k_next, loss = _divide_step(self.sys, acc.neg(), k + 1)

        if self.n1.maxlen:
            self.n1.append(n1_partial.add(k_next.smul_int(k + 1)))  # full N1_k
        if self.n2.maxlen:
            self.n2.append(n2_k)
        if self.n3.maxlen:
            self.n3.append(n3_k)
        return k_next, loss


def _run_streaming(sys, point_raw, stats):
    ctx = sys.ctx
    window = deque([sys.K0], maxlen=sys.window_size)
    pref = _Prefices(sys)
    stats.mode = "stream"
    stats.aux_retained = pref.count()
    acc = sys.K0
    power = ctx.one()
    for k in range(sys.ell - 1):
        k_next, loss = pref.step(k, window)
        window.append(k_next)
        power = ctx.mul(power, point_raw)
        acc = acc.add(k_next.mul_raw(power))
        stats.steps += 1
        stats.max_step_loss = max(stats.max_step_loss, loss)
        retained = len(window) + 2  # window + accumulator + running power
        stats.peak_retained = max(stats.peak_retained, retained)
        stats.aux_retained = max(stats.aux_retained, pref.count())
    return acc


def _run_full(sys, stats):
    window = deque([sys.K0], maxlen=sys.window_size)
    pref = _Prefices(sys)
    stats.mode = "full"
    stats.aux_retained = pref.count()
    coeffs = [sys.K0]
    for k in range(sys.ell - 1):
        k_next, loss = pref.step(k, window)
        window.append(k_next)
        coeffs.append(k_next)
        stats.steps += 1
        stats.max_step_loss = max(stats.max_step_loss, loss)
        stats.peak_retained = max(stats.peak_retained, len(coeffs))
        stats.aux_retained = max(stats.aux_retained, pref.count())
    return MatPoly(sys.ctx, sys.d, coeffs)


def solve_full(sys, with_stats=False, reduce_to=None):
    """All coefficients K_0 .. K_{ell-1}, correct mod p^m.

    ``reduce_to`` overrides the output truncation precision (None keeps
    the full working width, m by default for the public contract).
    """
    stats = SolveStats()
    poly = _run_full(sys, stats)
    if reduce_to is not None:
        poly = poly.reduced(reduce_to)
    return (poly, stats) if with_stats else poly


def solve_streaming(sys, point, with_stats=False, reduce_to=None):
    """K(gamma') mod p^m for integral gamma', retaining only the window,
    the accumulator and the running power of gamma'."""
    raw = _point_raw(sys.ctx, point)
    stats = SolveStats()
    out = _run_streaming(sys, raw, stats)
    if reduce_to is not None:
        out = out.reduced(reduce_to)
    return (out, stats) if with_stats else out


# ---------------------------------------------------------------------------
# Multipoint evaluation over a subproduct tree


def _poly_mul_scalar(ctx, f, g):
    out = [ctx.zero()] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if ctx.is_zero(a):
            continue
        for j, b in enumerate(g):
            out[i + j] = ctx.add(out[i + j], ctx.mul(a, b))
    return out


def _subproduct_tree(ctx, points):
    """Balanced tree of monic scalar polynomials prod (Gamma - gamma_i)."""
    if len(points) == 1:
        return {"poly": [ctx.neg(points[0]), ctx.one()], "leaf": points[0]}
    h = len(points) // 2
    left = _subproduct_tree(ctx, points[:h])
    right = _subproduct_tree(ctx, points[h:])
    return {
        "poly": _poly_mul_scalar(ctx, left["poly"], right["poly"]),
        "left": left,
        "right": right,
    }


def _matpoly_rem(ctx, d, coeffs, divisor):
    """Remainder of a matrix polynomial (list of ScaledMatrix, common scale
    handled per-entry) by a monic scalar polynomial."""
    out = list(coeffs)
    dd = len(divisor) - 1
    for top in range(len(out) - 1, dd - 1, -1):
        lead = out[top]
        if lead.is_zero():
            continue
        for i in range(dd):
            c = divisor[i]
            if ctx.is_zero(c):
                continue
            out[top - dd + i] = out[top - dd + i].sub(lead.mul_raw(c))
        out[top] = ScaledMatrix.zeros(ctx, d)
    return out[:dd] if dd > 0 else []

def _descend(ctx, d, coeffs, node, out):
    if "leaf" in node:
        rem = _matpoly_rem(ctx, d, coeffs, node["poly"])
        out.append(rem[0] if rem else ScaledMatrix.zeros(ctx, d))
        return
    _descend(ctx, d, _matpoly_rem(ctx, d, coeffs, node["left"]["poly"]), node["left"], out)
    _descend(ctx, d, _matpoly_rem(ctx, d, coeffs, node["right"]["poly"]), node["right"], out)


def solve_multipoint(sys, points, with_stats=False):
    """K(gamma_1), ..., K(gamma_s) mod p^m via remainder descent on
    p^ceil(alpha) K(Gamma), an integral polynomial."""
    ctx = sys.ctx
    raws = [_point_raw(ctx, pt) for pt in points]
    poly, stats = solve_full(sys, with_stats=True)
    abar = max(sys.alpha.ceil(), 0)
    # p^abar K(Gamma) must be integral; scales above abar violate ord(K) >= -alpha
    shifted = []
    for c in poly.coeffs:
        c = c.normalized()
        if c.scale > abar:
            raise ValuationViolation(
                f"coefficient scale {c.scale} exceeds ceil(alpha) = {abar}"
            )
        f = ctx.p ** (abar - c.scale)
        shifted.append(
            ScaledMatrix(ctx, sys.d, [ctx.smul(f, e) for e in c.entries], 0)
        )
    # truncate to the accuracy the descent needs: m' = m + ceil(alpha)
    mbar = sys.m + abar
    shifted = [c.reduced(mbar) for c in shifted]
    if not raws:
        return ([], stats) if with_stats else []
    tree = _subproduct_tree(ctx, raws)
    values = []
    _descend(ctx, sys.d, _matpoly_rem(ctx, sys.d, shifted, tree["poly"]), tree, values)
    results = []
    for v in values:
        back = ScaledMatrix(ctx, sys.d, v.entries, v.scale + abar).normalized()
        results.append(back.reduced(sys.m))
    return (results, stats) if with_stats else results
