"""Frobenius matrix on the base fiber y^2 = Q0(x) over Q_p.

The p-power Frobenius acts on the basis {x^i dx/sqrt(Q0)} by

    F_p(x^i dx/sqrt(Q0)) = p x^{p(i+1)-1} (1 + u)^{-1/2} Q0^{-(p-1)/2} dx/sqrt(Q0),

with u := (Q0(x^p) - Q0(x)^p) / Q0(x)^p of valuation >= 1.  The binomial
series sum_j binom(-1/2, j) u^j is accumulated in the normal form
sum_s P_s(x)/Q0^s (deg P_s <= 2g), each row is merged into one pole
ladder, and a single descent using the fiber Bezout identity
a0 Q0 + b0 Q0' = r0 (r0 a unit) walks the pole order down to the basis.

Everything is one fiber computation per (p, genus, precision) -- the
deformation design pins the base curve over the prime field -- so results
are cached at module level.
"""

from dataclasses import dataclass
from math import comb

from .errors import InvalidInput, PrecisionExhausted
from .exactmath import ceil_log, split_unit, vp
from .exactpoly import sylvester_data, QtRing
from .odesolver import ScaledMatrix
from .padic import PadicContext, make_context


@dataclass
class FiberFrobenius:
    """Fiber Frobenius matrix at its working precision."""

    F0: ScaledMatrix  # over a p-adic context with n = 1
    series_terms: int
    precision: int  # absolute precision the entries are good to

    @property
    def ctx(self):
        return self.F0.ctx


class FiberSeries:
    """sigma(1/sqrt(Q0)) * sqrt(Q0) = (1+u)^{-1/2} Q0^{-(p-1)/2}, held as
    slots[s] = numerator of pole order s (before the x^{p(i+1)-1} merge).

    ``term(j)`` exposes the individual binomial-series terms when the
    series was built with ``keep_terms=True`` (test introspection)."""

    def __init__(self, ctx, g, slots, scale, terms_kept, count):
        self.ctx = ctx
        self.g = g
        self.slots = slots
        self.scale = scale
        self._terms = terms_kept
        self.count = count

    def term(self, j):
        if self._terms is None:
            raise InvalidInput("series was built without keep_terms")
        return self._terms[j]


# -- dense polynomial helpers over a raw n=1 context ---------------------------


def _pm(ctx, f, g):
    if not f or not g:
        return []
    pW = ctx.pW
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return [c % pW for c in out]


def _padd(ctx, f, g):
    pW = ctx.pW
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % pW
    return out


def _ptrim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def _pderiv(ctx, f):
    pW = ctx.pW
    return [(i * f[i]) % pW for i in range(1, len(f))]


def _pdivmod_monic(ctx, f, q):
    """divmod by a monic polynomial, exact mod p^W."""
    pW = ctx.pW
    f = list(f)
    dq = len(q) - 1
    quot = [0] * max(0, len(f) - dq)
    while len(f) - 1 >= dq and f:
        c = f[-1]
        k = len(f) - 1 - dq
        quot[k] = c
        for i in range(dq + 1):
            f[k + i] = (f[k + i] - c * q[i]) % pW
        _ptrim(f)
    return _ptrim(quot), f


def _pscale(ctx, c, f):
    pW = ctx.pW
    return [(c * x) % pW for x in f]


# -- fiber data -----------------------------------------------------------------


class _FiberData:
    """Q0, its Bezout identity and reduction helpers over an n=1 context."""

    def __init__(self, ctx, q0_low):
        self.ctx = ctx
        self.g = (len(q0_low) - 1) // 2
        self.q = [c % ctx.p for c in q0_low] + [1]  # monic, ints
        # exact Bezout identity over Z (digits are < p, so exact char-0 data)
        ring = QtRing([0, 1])
        pairs = [(ring.from_rational(c), ring.zero()) for c in self.q]
        _ring, r, a, b = sylvester_data([0, 1], pairs, 0)
        self.r0 = int(r[0][0])
        if self.r0 % ctx.p == 0:
            raise InvalidInput("fiber resultant is not a unit (singular Q0)")
        self.a0 = [int(c[0][0]) % int(ctx.pW) for c in a]
        self.b0 = [int(c[0][0]) % int(ctx.pW) for c in b]
        self.r0inv = int(ctx.inv(ctx.from_int(self.r0)))
        self.qx = _pderiv(ctx, [c % int(ctx.pW) for c in self.q])

    def pole_step(self, poly, t):
        """P/Q^t(1/sqrt Q) -> contribution at pole t-1; returns (poly', v)."""
        ctx = self.ctx
        v, unit = split_unit(2 * t - 1, ctx.p)
        factor = (2 * pow(unit, -1, int(ctx.pW))) % int(ctx.pW)
        term1 = _pm(ctx, self.a0, poly)
        term2 = _pscale(ctx, factor, _pderiv(ctx, _pm(ctx, self.b0, poly)))
        if v:
            term1 = _pscale(ctx, int(ctx.p) ** v, term1)
        out = _pscale(ctx, self.r0inv, _padd(ctx, term1, term2))
        return out, v

    def degree_reduce(self, poly, scale):
        """Reduce a polynomial form (slot 0) to degree < 2g via exact forms
        d(x^u sqrt(Q)); returns (coeffs list length 2g, scale)."""
        ctx = self.ctx
        pW = ctx.pW
        g = self.g
        poly = _ptrim(list(poly))
        while len(poly) - 1 >= 2 * g:
            j = len(poly) - 1
            u = j - 2 * g
            odd = 2 * u + 2 * g + 1
            v, unit = split_unit(odd, ctx.p)
            factor = (2 * pow(unit, -1, int(pW))) % int(pW)
            # form = u x^{u-1} Q + (1/2) x^u Q', leading coeff odd/2 at x^j
            inv2 = pow(2, -1, int(pW))
            form = [0] * (u) + _pscale(ctx, inv2, self.qx) if u == 0 else None
            if u >= 1:
                t1 = [0] * (u - 1) + _pscale(ctx, u, self.q)
                t2 = [0] * u + _pscale(ctx, inv2, self.qx)
                form = _padd(ctx, t1, t2)
            mult = (poly[j] * factor) % pW
            if v:
                # the killer term carries p^-v: rescale the whole polynomial
                poly = _pscale(ctx, int(ctx.p) ** v, poly)
                scale += v
                if scale > ctx.W:
                    raise PrecisionExhausted("fiber degree reduction overflow")
            poly = _padd(ctx, poly, _pscale(ctx, (-mult) % pW, form))
            if len(poly) - 1 >= j and poly[j] != 0:
                raise PrecisionExhausted("fiber degree reduction failed to cancel")
            poly = _ptrim(poly[:j])
        poly = poly + [0] * (2 * g - len(poly))
        return poly, scale


def _slot_normalize(ctx, slots, q, max_deg):
    """Push slot numerators above max_deg down one pole level (s -> s-1)."""
    for s in sorted(slots.keys(), reverse=True):
        if s == 0:
            continue
        poly = slots[s]
        if len(poly) - 1 > max_deg:
            quot, rem = _pdivmod_monic(ctx, poly, q)
            slots[s] = rem
            if quot:
                slots[s - 1] = _padd(ctx, slots.get(s - 1, []), quot)
    for s in [s for s, poly in slots.items() if not _ptrim(list(poly))]:
        del slots[s]
    return slots


def frobenius_inverse_sqrt_series(ctx, q0_low, terms, keep_terms=False):
    """Binomial expansion of (1 + u)^{-1/2} in the normal form
    sum_s P_s(x)/Q0^s, truncated after the u^terms term.

    ``ctx`` must be an n = 1 context; each term binom(-1/2, j) u^j has
    valuation >= j since p divides Q0(x^p) - Q0(x)^p.
    """
    if ctx.n != 1:
        raise InvalidInput("fiber series needs a prime-field context")
    p = ctx.p
    pW = int(ctx.pW)
    g = (len(q0_low) - 1) // 2
    q = [c % pW for c in q0_low] + [1]
    # D = Q0(x^p) - Q0(x)^p over the integers, reduced mod p^W
    qpow = [1]
    qint = [int(c) for c in q0_low] + [1]
    for _ in range(p):
        out = [0] * (len(qpow) + len(qint) - 1)
        for i, a in enumerate(qpow):
            if a:
                for j, b in enumerate(qint):
                    out[i + j] += a * b
        qpow = out
    D = [0] * (len(qpow))
    for i, c in enumerate(qint):
        D[i * p] += c
    D = [(a - b) % pW for a, b in zip(D, qpow)]
    _ptrim(D)
    assert all(c % p == 0 for c in D), "Frobenius congruence failed"

    # u = D / Q^p as slots 1..p ; ubar = u / p (integral)
    slots_u = {}
    rem = D
    for kk in range(p):
        quot, r = _pdivmod_monic(ctx, rem, q)
        if _ptrim(list(r)):
            slots_u[p - kk] = r
        rem = quot
        if not rem:
            break
    assert not _ptrim(list(rem)), "u normal form has a polynomial part"
    ubar = {s: [c // p for c in poly] for s, poly in slots_u.items()}

    acc = {0: [1]}
    kept = [{0: [1]}] if keep_terms else None
    T = {0: [1]}
    for j in range(1, terms + 1):
        # T <- T * ubar = (u/p)^j; width W - j suffices since the term
        # carries an overall p^j
        width = ctx.W - j
        if width <= 0:
            break
        mod = p ** width
        new = {}
        for s1, f in T.items():
            for s2, h in ubar.items():
                prod = _pm(ctx, f, h)
                tgt = s1 + s2
                new[tgt] = _padd(ctx, new.get(tgt, []), prod)
        for s in list(new):
            new[s] = [c % mod for c in new[s]]
        T = _slot_normalize(ctx, new, q, 2 * g)
        # binom(-1/2, j) = (-1)^j binom(2j, j) / 4^j, a p-adic unit ratio
        cj = (((-1) ** j) * comb(2 * j, j) * pow(pow(4, j, pW), -1, pW)) % pW
        coef = (cj * pow(p, j, pW)) % pW
        termj = {}
        for s, f in T.items():
            scaled = _pscale(ctx, coef, f)
            if _ptrim(list(scaled)):
                termj[s] = scaled
                acc[s] = _padd(ctx, acc.get(s, []), scaled)
        if keep_terms:
            kept.append(termj)
    acc = _slot_normalize(ctx, acc, q, 2 * g)
    return FiberSeries(ctx, g, acc, 0, kept, terms)


_FIBER_CACHE = {}


def fiber_frobenius_matrix(p, q0_low, precision, terms=None):
    """FiberFrobenius for y^2 = Q0(x) over Q_p at absolute precision
    ``precision``.  Cached per (p, Q0, precision)."""
    key = (p, tuple(int(c) for c in q0_low), precision, terms)
    if key in _FIBER_CACHE:
        return _FIBER_CACHE[key]

    g = (len(q0_low) - 1) // 2
    if terms is None:
        guess = precision + 10
        guard_f = ceil_log(p, 2 * guess * (2 * g + 1)) + 2
        terms = precision + guard_f
    T_max = p * terms + (p - 1) // 2
    # worst-case width slack: every division by 2t-1 charged sequentially
    slack = sum(vp(2 * t - 1, p) for t in range(1, T_max + 1) if (2 * t - 1) % p == 0)
    guard_f = ceil_log(p, max(2 * terms * (2 * g + 1), 1)) + 2
    W0 = precision + slack + guard_f + 4
    ctx = make_context(p, 1, W0)
    fiber = _FiberData(ctx, q0_low)
    series = frobenius_inverse_sqrt_series(ctx, q0_low, terms)

    d = 2 * g
    pW = int(ctx.pW)
    rows = []
    row_scales = []
    for i in range(d):
        # p x^{p(i+1)-1} * series / Q^{(p-1)/2}
        shift = p * (i + 1) - 1
        slots = {}
        for s, poly in series.slots.items():
            tgt = s + (p - 1) // 2
            contrib = _pscale(ctx, p, [0] * shift + list(poly))
            slots[tgt] = _padd(ctx, slots.get(tgt, []), contrib)
        # renormalize degrees (cascade down as many levels as needed)
        changed = True
        while changed:
            changed = False
            for s in sorted(slots.keys(), reverse=True):
                if s == 0:
                    continue
                poly = slots[s]
                if len(poly) - 1 > 2 * g:
                    quot, rem = _pdivmod_monic(ctx, poly, fiber.q)
                    slots[s] = rem
                    slots[s - 1] = _padd(ctx, slots.get(s - 1, []), quot)
                    changed = True
        # descent
        scale = 0
        top = max(slots) if slots else 0
        for t in range(top, 0, -1):
            poly = _ptrim(list(slots.pop(t, [])))
            if not poly:
                continue
            contrib, v = fiber.pole_step(poly, t)
            if v:
                # whole ladder rescales by p^v
                for s in list(slots):
                    slots[s] = _pscale(ctx, p ** v, slots[s])
                scale += v
                if scale > W0 - precision:
                    raise PrecisionExhausted("fiber descent exhausted width slack")
            tgt = slots.get(t - 1, [])
            merged = _padd(ctx, tgt, contrib)
            if t - 1 >= 1 and len(merged) - 1 > 2 * g:
                quot, rem = _pdivmod_monic(ctx, merged, fiber.q)
                slots[t - 1] = rem
                slots[t - 2] = _padd(ctx, slots.get(t - 2, []), quot)
            else:
                slots[t - 1] = merged
            # strip common p factors to keep the scale tight
            if scale > 0:
                vmin = scale
                for s, f in slots.items():
                    for c in f:
                        if c:
                            vmin = min(vmin, vp(c, p))
                            if vmin == 0:
                                break
                    if vmin == 0:
                        break
                if vmin > 0:
                    shift_div = p ** vmin
                    for s in list(slots):
                        slots[s] = [c // shift_div for c in slots[s]]
                    scale -= vmin
        row, scale = fiber.degree_reduce(slots.get(0, []), scale)
        rows.append(row)
        row_scales.append(scale)

    smax = max(row_scales)
    entries = []
    for i in range(d):
        f = p ** (smax - row_scales[i])
        for j in range(d):
            c = rows[i][j] if j < len(rows[i]) else 0
            entries.append(ctx.from_int(c * f))
    F0 = ScaledMatrix(ctx, d, entries, smax).normalized()
    result = FiberFrobenius(F0=F0, series_terms=terms, precision=precision)
    _FIBER_CACHE[key] = result
    return result
