"""The one-parameter family y^2 = Q(x, Gamma) and its connection.

Q(x, Gamma) = x^{2g+1} + sum_i [(a_i - b_i) Gamma + b_i] x^i interpolates
between a prime-field base curve (Gamma = 0) and the input curve
(Gamma = 1).  This module computes the resultant r(Gamma) of (Q, Q_x),
Bezout cofactors a Q + b Q_x = r, the connection matrix H = r G by
cohomological reduction in the basis {x^i dx / sqrt(Q)}, all precision
constants of the point-counting pipeline, and assembles the differential
system satisfied by K = r^M F.

Differential reduction uses two exact rewriting rules modulo exact forms:

* pole reduction (s >= 3/2):
    P dx/Q^s  ==  [(a P + 2 (b P)' / (2s-2)) / r] dx/Q^{s-1},
  from d(b P Q^{-(s-1)}) being exact and the Bezout identity;
* degree reduction (j >= 2g):
    subtract multiples of d(x^{j-2g} sqrt(Q)) to push deg_x below 2g.

Divisions by the odd integers these rules produce are exact shifts into
the shared power-of-p denominator.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import inf

from .errors import (
    BadBaseCurve,
    DegreeOverflow,
    InvalidInput,
    NonUnit,
    PrecisionExhausted,
    SingularCurve,
    ValuationViolation,
)
from .exactmath import LogValue, ceil_log, floor_log, split_unit
from .exactpoly import sylvester_data
from .odesolver import MatPoly, ScaledMatrix, assemble_system
from .padic import ScaledElement, ZqElement


@dataclass
class DeformationConstants:
    """All precision constants of the pipeline, evaluated exactly.

    alpha, gamma, delta, psi are exact reals of the form u + v log_p(g);
    the integer fields are their ceiled combinations.
    """

    alpha: LogValue
    gamma: LogValue
    delta: LogValue
    psi: LogValue
    zeta: int
    m: int
    M: int
    ell: int
    epsilon: int
    mPrime: int

    def as_dict(self):
        return {
            "alpha": float(self.alpha),
            "gamma": float(self.gamma),
            "delta": float(self.delta),
            "psi": float(self.psi),
            "zeta": self.zeta,
            "m": self.m,
            "M": self.M,
            "ell": self.ell,
            "epsilon": self.epsilon,
            "m_prime": self.mPrime,
        }


class _XG:
    """Polynomial in x whose coefficients are Gamma-polynomials over raw
    ring elements, with one shared power-of-p denominator."""

    __slots__ = ("ctx", "cs", "scale")

    def __init__(self, ctx, cs, scale=0):
        self.ctx = ctx
        self.cs = cs  # cs[xdeg] = list over Gamma-deg of raw
        self.scale = scale
        self._trim()

    def _trim(self):
        ctx = self.ctx
        while self.cs and all(ctx.is_zero(c) for c in self.cs[-1]):
            self.cs.pop()
        for row in self.cs:
            while len(row) > 1 and ctx.is_zero(row[-1]):
                row.pop()

    def xdeg(self):
        return len(self.cs) - 1

    def gdeg(self):
        return max((len(row) - 1 for row in self.cs), default=0)

    def copy(self):
        return _XG(self.ctx, [row[:] for row in self.cs], self.scale)

    def rescaled_to(self, s):
        if s == self.scale:
            return self
        if s < self.scale:
            raise ValueError("cannot lower scale by rescaling")
        f = self.ctx.p ** (s - self.scale)
        return _XG(
            self.ctx,
            [[self.ctx.smul(f, c) for c in row] for row in self.cs],
            s,
        )

    def add(self, other):
        s = max(self.scale, other.scale)
        a = self.rescaled_to(s)
        b = other.rescaled_to(s)
        ctx = self.ctx
        cs = []
        for i in range(max(len(a.cs), len(b.cs))):
            ra = a.cs[i] if i < len(a.cs) else []
            rb = b.cs[i] if i < len(b.cs) else []
            row = []
            for e in range(max(len(ra), len(rb))):
                x = ra[e] if e < len(ra) else ctx.zero()
                y = rb[e] if e < len(rb) else ctx.zero()
                row.append(ctx.add(x, y))
            cs.append(row or [ctx.zero()])
        return _XG(ctx, cs, s)

    def neg(self):
        ctx = self.ctx
        return _XG(ctx, [[ctx.neg(c) for c in row] for row in self.cs], self.scale)

    def mul_raw(self, raw, scale_add=0):
        ctx = self.ctx
        return _XG(
            ctx,
            [[ctx.mul(raw, c) for c in row] for row in self.cs],
            self.scale + scale_add,
        )

    def mul_xg(self, other):
        ctx = self.ctx
        if not self.cs or not other.cs:
            return _XG(ctx, [], self.scale + other.scale)
        cs = [
            [ctx.zero()] * (self.gdeg() + other.gdeg() + 1)
            for _ in range(self.xdeg() + other.xdeg() + 1)
        ]
        for i, row in enumerate(self.cs):
            for e, c in enumerate(row):
                if ctx.is_zero(c):
                    continue
                for i2, row2 in enumerate(other.cs):
                    for e2, c2 in enumerate(row2):
                        if ctx.is_zero(c2):
                            continue
                        cs[i + i2][e + e2] = ctx.add(
                            cs[i + i2][e + e2], ctx.mul(c, c2)
                        )
        return _XG(ctx, cs, self.scale + other.scale)

    def deriv_x(self):
        ctx = self.ctx
        cs = [
            [ctx.smul(i, c) for c in row] for i, row in enumerate(self.cs) if i >= 1
        ]
        return _XG(ctx, cs, self.scale)

    def shift_x(self, k):
        ctx = self.ctx
        return _XG(ctx, [[ctx.zero()] for _ in range(k)] + [r[:] for r in self.cs], self.scale)

    def raw_valuation(self):
        ctx = self.ctx
        v = inf
        for row in self.cs:
            for c in row:
                w = ctx.val(c)
                if w < v:
                    v = w
                    if v == 0:
                        return 0
        return v

    def normalized(self):
        if self.scale == 0:
            return self
        v = self.raw_valuation()
        if v == inf:
            return _XG(self.ctx, [], 0)
        k = min(self.scale, int(v))
        if k <= 0:
            return self
        ctx = self.ctx
        cs = [[ctx.exact_div_p(c, k) for c in row] for row in self.cs]
        return _XG(ctx, cs, self.scale - k)


class Family:
    """The deformation family, its resultant, cofactors and connection."""

    def __init__(self, ctx, g, curve_residues, q0_coeffs):
        self.ctx = ctx
        self.p = ctx.p
        self.n = ctx.n
        self.g = g
        self.Q1res = curve_residues  # tuple of residue tuples, a_0..a_{2g}
        self.Q0coeffs = q0_coeffs  # ints, b_0..b_{2g}
        # canonical digit lifts
        self.a_lift = [ctx.from_coeffs(r) for r in curve_residues]
        self.b_lift = [ctx.from_int(b) for b in q0_coeffs]
        self._exact = None
        self._r = None
        self._bez = None
        self._H = None
        self._constants = None
        self._xg_Q = None
        self._forms = {}

    # -- exact layer ----------------------------------------------------------

    def _exact_data(self):
        if self._exact is None:
            N = 2 * self.g + 1
            from .exactpoly import QtRing

            ring = QtRing(self.ctx.phi)
            pairs = []
            for i in range(N):
                a = ring.from_ints(self.Q1res[i])
                b = ring.from_rational(self.Q0coeffs[i])
                pairs.append((b, ring.sub(a, b)))  # b_i + (a_i - b_i) Gamma
            pairs.append((ring.one(), ring.zero()))  # monic x^N
            ring, r, a, b = sylvester_data(self.ctx.phi, pairs, 4 * self.g)
            self._exact = (ring, r, a, b)
        return self._exact

    @property
    def r(self):
        """Resultant coefficients as raw ring elements (ascending)."""
        if self._r is None:
            ring, r, _a, _b = self._exact_data()
            self._r = [self.ctx.from_coeffs(ring.integer_coords(c)) for c in r]
        return self._r

    @property
    def rho(self):
        return len(self.r) - 1

    @property
    def rtilde(self):
        """Truncation of r to the degree of its mod-p reduction."""
        ctx = self.ctx
        rho_p = 0
        for i, c in enumerate(self.r):
            if not ctx.res_is_zero(ctx.residue(c)):
                rho_p = i
        return self.r[: rho_p + 1]

    @property
    def rho_prime(self):
        return len(self.rtilde) - 1

    def r_at(self, raw_point):
        ctx = self.ctx
        acc = ctx.zero()
        for c in reversed(self.r):
            acc = ctx.add(ctx.mul(acc, raw_point), c)
        return acc

    def bezout(self):
        """(a, b) with a Q + b Q_x = r; raw [x][Gamma] coefficient tables."""
        if self._bez is None:
            ring, _r, a, b = self._exact_data()
            conv = lambda tbl: [
                [self.ctx.from_coeffs(ring.integer_coords(c)) for c in row]
                for row in tbl
            ]
            self._bez = (conv(a), conv(b))
        return self._bez

    # -- Q as an x-Gamma polynomial -------------------------------------------

    def q_xg(self):
        if self._xg_Q is None:
            ctx = self.ctx
            cs = []
            for i in range(2 * self.g + 1):
                cs.append([self.b_lift[i], ctx.sub(self.a_lift[i], self.b_lift[i])])
            cs.append([ctx.one()])
            self._xg_Q = _XG(ctx, cs, 0)
        return self._xg_Q

    def q_gamma_xg(self):
        """dQ/dGamma = sum (a_i - b_i) x^i, Gamma-free."""
        ctx = self.ctx
        cs = [[ctx.sub(self.a_lift[i], self.b_lift[i])] for i in range(2 * self.g + 1)]
        return _XG(ctx, cs, 0)

    def exact_form(self, u):
        """u x^{u-1} Q + (1/2) x^u Q_x: the exact form d(x^u sqrt(Q)) in
        P dx/sqrt(Q) coordinates."""
        if u not in self._forms:
            ctx = self.ctx
            Q = self.q_xg()
            inv2 = ctx.from_int(pow(2, -1, int(ctx.pW)))
            term2 = Q.deriv_x().shift_x(u).mul_raw(inv2)
            if u >= 1:
                term1 = Q.shift_x(u - 1).mul_raw(ctx.from_int(u))
                form = term1.add(term2)
            else:
                form = term2
            self._forms[u] = form
        return self._forms[u]

    def degree_reduce(self, T):
        """Reduce deg_x(T) below 2g by subtracting exact forms."""
        ctx = self.ctx
        g = self.g
        guard_scale = ctx.W // 2
        while T.xdeg() >= 2 * g:
            j = T.xdeg()
            u = j - 2 * g
            tau = T.cs[j]
            odd = 2 * u + 2 * g + 1  # twice the leading coefficient of the form
            v, unit = split_unit(odd, self.p)
            factor = ctx.from_int((2 * pow(unit, -1, int(ctx.pW))) % int(ctx.pW))
            form = self.exact_form(u)
            # multiplier tau * (2/odd) as a Gamma-poly at scale T.scale + v
            mult = _XG(ctx, [[ctx.mul(factor, c) for c in tau]], T.scale + v)
            term = form.mul_xg(mult)
            T = T.add(term.neg())
            if T.xdeg() >= j and not all(ctx.is_zero(c) for c in T.cs[j]):
                raise PrecisionExhausted("degree reduction failed to cancel")
            T = _XG(ctx, T.cs[:j], T.scale)
            if T.scale > guard_scale:
                raise PrecisionExhausted("degree reduction exhausted guard digits")
        return T

    # -- connection -----------------------------------------------------------

    def connection(self):
        """H = r G, rows = coordinates of r * nabla(x^i dx/sqrt(Q))."""
        if self._H is None:
            ctx = self.ctx
            g = self.g
            a_tbl, b_tbl = self.bezout()
            a_xg = _XG(ctx, [row[:] for row in a_tbl], 0)
            b_xg = _XG(ctx, [row[:] for row in b_tbl], 0)
            qg = self.q_gamma_xg()
            inv2 = ctx.from_int(pow(2, -1, int(ctx.pW)))
            rows = []
            for i in range(2 * g):
                # nabla(x^i dx/sqrt(Q)) = -(1/2) Q_Gamma x^i dx / Q^{3/2}
                P = qg.shift_x(i).mul_raw(ctx.neg(inv2))
                # one pole step with no division (2s - 2 = 1 at s = 3/2),
                # r multiplied away by H := r G
                T = a_xg.mul_xg(P).add(b_xg.mul_xg(P).deriv_x().mul_raw(ctx.from_int(2)))
                T = self.degree_reduce(T).normalized()
                rows.append(T)
            d = 2 * g
            smax = max(r.scale for r in rows)
            gdeg = max(r.gdeg() for r in rows)
            if gdeg > 8 * g:
                raise DegreeOverflow(f"deg H = {gdeg} > 8g")
            coeffs = []
            for e in range(gdeg + 1):
                ent = []
                for i in range(d):
                    row = rows[i].rescaled_to(smax)
                    for j in range(d):
                        c = (
                            row.cs[j][e]
                            if j < len(row.cs) and e < len(row.cs[j])
                            else ctx.zero()
                        )
                        ent.append(c)
                coeffs.append(ScaledMatrix(ctx, d, ent, smax).normalized())
            H = MatPoly(ctx, d, coeffs)
            v = H.valuation()
            if v != inf and Fraction(v) * (self.p - 1) < Fraction(-10 * self.g):
                raise ValuationViolation(f"ord(H) = {v} < -10g/(p-1)")
            self._H = H
        return self._H

    # -- constants ------------------------------------------------------------

    def constants(self):
        if self._constants is None:
            g, n, p = self.g, self.n, self.p
            m = (
                LogValue(Fraction(n * g, 2), 2 * g + 1, p, 2).ceil()
                + n * (2 + floor_log(p, g))
                + 6 * g * n
                + LogValue(0, 2 * g * n, p, g).floor()
            )
            M = p * (2 * m + 4) + (p - 1) // 2
            ell = (2 * m + 5) * (8 * g + 2) * p + 1
            alpha = LogValue(2 * (2 * g - 1) + g, 2 * g - 1, p, g)
            gamma = LogValue(g, 2 * g, p, g)
            delta = 2 * alpha
            psi = 12 * alpha
            rho = self.rho
            zeta = max((p + 1) * rho, p * rho + 8 * g + 1, p + 8 * p * g + rho)
            epsilon = (m + (5 * gamma + 1) * ceil_log(p, ell) + psi).ceil()
            mPrime = (m + alpha).ceil()
            self._constants = DeformationConstants(
                alpha=alpha,
                gamma=gamma,
                delta=delta,
                psi=psi,
                zeta=zeta,
                m=m,
                M=M,
                ell=ell,
                epsilon=epsilon,
                mPrime=mPrime,
            )
        return self._constants

    def __repr__(self):
        return (
            f"Family(p={self.p}, n={self.n}, g={self.g}, "
            f"Q0={self.Q0coeffs}, rho={self.rho})"
        )


def _residues_from_curve(ctx, curve):
    out = []
    for c in curve:
        if isinstance(c, int):
            out.append((c % ctx.p,) + (0,) * (ctx.n - 1))
        else:
            digits = tuple(int(x) % ctx.p for x in c)
            if len(digits) != ctx.n:
                raise InvalidInput(f"residue needs {ctx.n} coordinates")
            out.append(digits)
    return tuple(out)


def _poly_gcd_is_trivial(ctx, coeffs_res):
    """gcd(Qbar, Qbar') constant over F_{p^n}? coeffs include the leader."""
    f = [r for r in coeffs_res]
    fp = [ctx.res_mul((i % ctx.p,) + (0,) * (ctx.n - 1), f[i]) for i in range(1, len(f))]

    def trim(h):
        while h and all(c == 0 for c in h[-1]):
            h.pop()
        return h

    def rem(u, v):
        u = [x for x in u]
        inv_lead = ctx.res_inv(v[-1])
        while len(u) >= len(v) and u:
            coef = ctx.res_mul(u[-1], inv_lead)
            shift = len(u) - len(v)
            for i, c in enumerate(v):
                prod = ctx.res_mul(coef, c)
                u[shift + i] = tuple(
                    (x - y) % ctx.p for x, y in zip(u[shift + i], prod)
                )
            trim(u)
        return u

    u, v = trim(f[:]), trim(fp)
    while v:
        u, v = v, rem(u, v)
    return len(u) == 1


def default_base_curve(p, g):
    """x^{2g+1} + 1 when p does not divide 2g+1, else x^{2g+1} + x."""
    coeffs = [0] * (2 * g + 1)
    if (2 * g + 1) % p != 0:
        coeffs[0] = 1
    else:
        coeffs[1] = 1
    return coeffs


def build_family(ctx, curve):
    """Build the family from the input curve's residue coefficients
    a_0..a_{2g} (monic leading coefficient implicit)."""
    if len(curve) % 2 == 0 or len(curve) < 3:
        raise InvalidInput("curve needs an odd number >= 3 of low coefficients")
    g = (len(curve) - 1) // 2
    residues = _residues_from_curve(ctx, curve)
    monic = residues + (((1,) + (0,) * (ctx.n - 1)),)
    if not _poly_gcd_is_trivial(ctx, list(monic)):
        raise SingularCurve("input curve polynomial is not squarefree")
    q0 = default_base_curve(ctx.p, g)
    q0_res = tuple((c % ctx.p,) + (0,) * (ctx.n - 1) for c in q0) + (
        ((1,) + (0,) * (ctx.n - 1)),
    )
    if not _poly_gcd_is_trivial(ctx, list(q0_res)):
        raise BadBaseCurve("default base curve is singular (unexpected)")
    fam = Family(ctx, g, residues, q0)
    # r(0), r(1) must be units
    r0 = fam.r[0]
    r1 = fam.r_at(ctx.one())
    if ctx.res_is_zero(ctx.residue(r0)):
        raise BadBaseCurve("r(0) is not a unit")
    if ctx.res_is_zero(ctx.residue(r1)):
        raise SingularCurve("r(1) is not a unit")
    return fam


# -- spec-level operations ----------------------------------------------------


def resultant(fam):
    """r(Gamma) as a list of ZqElement coefficients (ascending)."""
    return [ZqElement(fam.ctx, c) for c in fam.r]


def bezout_cofactors(fam):
    """(a, b) coefficient tables: a[i][e], b[i][e] ZqElements for x^i Gamma^e."""
    a, b = fam.bezout()
    wrap = lambda tbl: [[ZqElement(fam.ctx, c) for c in row] for row in tbl]
    return wrap(a), wrap(b)


def _coerce_xg(ctx, P, scale=0):
    cs = []
    for row in P:
        if isinstance(row, (int, ZqElement, ScaledElement)):
            row = [row]
        out = []
        max_s = scale
        staged = []
        for c in row:
            if isinstance(c, ScaledElement):
                staged.append((c.raw, c.scale))
                max_s = max(max_s, c.scale)
            elif isinstance(c, ZqElement):
                staged.append((c.raw, 0))
            else:
                staged.append((ctx.from_int(int(c)), 0))
        cs.append((staged, max_s))
    smax = max((s for _, s in cs), default=0)
    rows = []
    for staged, _ in cs:
        rows.append(
            [ctx.smul(ctx.p ** (smax - s), r) if s < smax else r for r, s in staged]
        )
    return _XG(ctx, rows, smax)


def reduce_differential(fam, P, s):
    """Coordinates of P(x, Gamma) dx / Q^s in the basis {x^i dx/sqrt(Q)}.

    ``P``: list over x-degree of Gamma-coefficient lists (ints, ZqElements
    or ScaledElements); ``s``: half-integer pole order (1/2, 3/2, ...).
    Returns ``(rows, e)`` where rows are 2g Gamma-polynomials of
    ScaledElement and the coordinates are rows / r(Gamma)^e -- each pole
    reduction step contributes one factor of the resultant, left
    unexpanded so everything stays polynomial.
    """
    s = Fraction(s)
    if s.denominator != 2 or s < Fraction(1, 2):
        raise InvalidInput("pole index must be a positive half-integer")
    ctx = fam.ctx
    g = fam.g
    T = _coerce_xg(ctx, P)
    a_tbl, b_tbl = fam.bezout()
    a_xg = _XG(ctx, [row[:] for row in a_tbl], 0)
    b_xg = _XG(ctx, [row[:] for row in b_tbl], 0)
    e = 0
    while s >= Fraction(3, 2):
        denom = 2 * s - 2  # odd integer
        v, unit = split_unit(int(denom), ctx.p)
        factor = ctx.from_int((2 * pow(unit, -1, int(ctx.pW))) % int(ctx.pW))
        deriv = b_xg.mul_xg(T).deriv_x().mul_raw(factor)
        deriv = _XG(ctx, deriv.cs, deriv.scale + v)
        T = a_xg.mul_xg(T).add(deriv)
        e += 1
        s -= 1
        if T.scale > ctx.W // 2:
            raise PrecisionExhausted("pole reduction exhausted guard digits")
    T = fam.degree_reduce(T).normalized()
    rows = []
    for i in range(2 * g):
        if i < len(T.cs):
            rows.append([ScaledElement(ctx, c, T.scale) for c in T.cs[i]])
        else:
            rows.append([ScaledElement(ctx, ctx.zero(), 0)])
    return rows, e


def connection_matrix(fam):
    """H(Gamma) = r(Gamma) G(Gamma) as a MatPoly of dimension 2g."""
    return fam.connection()


def constants(fam):
    return fam.constants()


def boundary_from_fiber(fam, F0):
    """K(0) = r(0)^M F(0) for a fiber Frobenius matrix F0 (ScaledMatrix)."""
    ctx = fam.ctx
    M = fam.constants().M
    r0M = ctx.pow(fam.r[0], M)
    return F0.mul_raw(r0M)


def to_diffeq_system(fam, K0, ell_override=None):
    """A = r^sigma(Gamma^p) I, B = r I, X = H - M dr/dGamma,
    Y = -p Gamma^{p-1} H^sigma(Gamma^p); assembled with this family's
    constants (its own psi = 12 alpha, sharper than the generic 5(alpha+delta))."""
    ctx = fam.ctx
    g = fam.g
    d = 2 * g
    c = fam.constants()
    H = fam.connection()

    r_coeffs = fam.r
    A_scal = [ctx.sigma(x) for x in r_coeffs]
    A = MatPoly.from_scalar_coeffs(ctx, d, A_scal).dilate(fam.p)
    B = MatPoly.from_scalar_coeffs(ctx, d, r_coeffs)
    # X = H - M r'
    rprime = [ctx.smul(i, r_coeffs[i]) for i in range(1, len(r_coeffs))]
    Mrp = MatPoly.from_scalar_coeffs(ctx, d, [ctx.smul(c.M, x) for x in rprime]) \
        if rprime else MatPoly.zero(ctx, d)
    X = H.sub(Mrp)
    # Y = -p Gamma^{p-1} H^sigma(Gamma^p)
    Yp = H.sigma().dilate(fam.p).shift(fam.p - 1)
    Y = MatPoly(ctx, d, [cf.smul_int(-fam.p) for cf in Yp.coeffs])

    if A.degree + B.degree > c.zeta or A.degree + X.degree + 1 > c.zeta \
            or Y.degree + B.degree + 1 > c.zeta:
        raise DegreeOverflow("system degrees exceed zeta")
    return assemble_system(
        A,
        B,
        X,
        Y,
        K0,
        alpha=c.alpha,
        gamma=c.gamma,
        delta=c.delta,
        m=c.m,
        ell=c.ell if ell_override is None else ell_override,
        zeta=c.zeta,
        psi=c.psi,
    )
