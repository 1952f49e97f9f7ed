"""Exact characteristic-zero arithmetic for resultants and Bezout cofactors.

The canonical coefficient lifts are tiny integers (digits below p), so the
resultant r(Gamma) = Res_x(Q, dQ/dx) and the cofactor identity
a Q + b Q_x = r can be computed exactly over the number field
Q[t]/(phi) -- no pivoting headaches mod p^W and no small-p interpolation
pitfalls, since evaluation nodes are characteristic-zero integers.  The
exact results are asserted (the defining identity is rechecked verbatim)
and only then reduced into the working p-adic ring.
"""

from fractions import Fraction

from .errors import LinearSolveFailure


class QtRing:
    """Q[t]/(phi) with exact Fraction coordinates in the power basis."""

    def __init__(self, phi):
        self.phi = [int(c) for c in phi]
        self.n = len(phi) - 1
        if self.phi[-1] != 1:
            raise ValueError("phi must be monic")
        # t^{n+j} = sum_i rows[j][i] t^i, exact over Q
        n = self.n
        rows = []
        if n > 1:
            base = [Fraction(-c) for c in self.phi[:n]]
            rows.append(base)
            for _ in range(n - 2):
                prev = rows[-1]
                shifted = [Fraction(0)] + prev[: n - 1]
                top = prev[n - 1]
                rows.append([shifted[i] + top * base[i] for i in range(n)])
        self._red = rows

    def zero(self):
        return (Fraction(0),) * self.n

    def one(self):
        return (Fraction(1),) + (Fraction(0),) * (self.n - 1)

    def from_ints(self, digits):
        digits = list(digits) + [0] * (self.n - len(list(digits)))
        return tuple(Fraction(int(c)) for c in digits[: self.n])

    def from_rational(self, x):
        return (Fraction(x),) + (Fraction(0),) * (self.n - 1)

    def is_zero(self, a):
        return all(c == 0 for c in a)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def scale(self, c, a):
        c = Fraction(c)
        return tuple(c * x for x in a)

    def mul(self, a, b):
        n = self.n
        if n == 1:
            return (a[0] * b[0],)
        conv = [Fraction(0)] * (2 * n - 1)
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
        return tuple(conv[:n])

    def inv(self, a):
        """Inverse via the multiplication-matrix linear system."""
        n = self.n
        if self.is_zero(a):
            raise ZeroDivisionError("inverting zero in QtRing")
        if n == 1:
            return (1 / a[0],)
        # columns: a * t^i
        cols = []
        cur = a
        cols.append(cur)
        basis_t = tuple(Fraction(int(i == 1)) for i in range(n))
        for _ in range(n - 1):
            cur = self.mul(cur, basis_t)
            cols.append(cur)
        # solve M x = e_0 where M[i][j] = coordinate i of a*t^j
        m = [[cols[j][i] for j in range(n)] + [Fraction(int(i == 0))] for i in range(n)]
        _gauss_solve(m, n)
        return tuple(m[i][n] for i in range(n))

    def integer_coords(self, a):
        """Coordinates as plain ints; raises if any denominator is not 1."""
        out = []
        for c in a:
            if c.denominator != 1:
                raise LinearSolveFailure(f"non-integral exact coordinate {c}")
            out.append(int(c))
        return out


def _gauss_solve(m, n):
    """In-place Gaussian elimination on an n x (n+w) Fraction matrix."""
    rows = len(m)
    width = len(m[0])
    for col in range(n):
        piv = next((r for r in range(col, rows) if m[r][col] != 0), None)
        if piv is None:
            raise LinearSolveFailure("singular exact linear system")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(rows):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col], strict=True)]
    _ = width


def _field_gauss_det_solve(ring, mat, rhs=None):
    """Determinant of a square matrix over QtRing; optionally also solve
    mat x = rhs.  Returns (det, solution-or-None)."""
    n = len(mat)
    m = [row[:] + ([rhs[i]] if rhs is not None else []) for i, row in enumerate(mat)]
    det = ring.one()
    sign = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if not ring.is_zero(m[r][col])), None)
        if piv is None:
            return ring.zero(), None
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        pv = m[col][col]
        det = ring.mul(det, pv)
        pv_inv = ring.inv(pv)
        m[col] = [ring.mul(pv_inv, x) for x in m[col]]
        for r in range(n):
            if r != col and not ring.is_zero(m[r][col]):
                f = m[r][col]
                m[r] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(m[r], m[col])]
    if sign < 0:
        det = ring.neg(det)
    sol = [m[i][n] for i in range(n)] if rhs is not None else None
    return det, sol


def _interpolate(ring, nodes, values, degree):
    """Coefficients (ascending, length degree+1) of the polynomial of degree
    <= degree through (nodes[i], values[i]); exact Vandermonde solve done
    coordinatewise over Q."""
    k = degree + 1
    nodes = nodes[:k]
    values = values[:k]
    out = [[Fraction(0)] * ring.n for _ in range(k)]
    for coord in range(ring.n):
        m = [
            [Fraction(x) ** j for j in range(k)] + [values[i][coord]]
            for i, x in enumerate(nodes)
        ]
        _gauss_solve(m, k)
        for j in range(k):
            out[j][coord] = m[j][k]
    return [tuple(c) for c in out]


def _poly_eval_gamma(pair, gamma):
    """Evaluate a (c0, c1) Gamma-linear coefficient at an integer gamma."""
    c0, c1 = pair
    return tuple(a + Fraction(gamma) * b for a, b in zip(c0, c1))


def _build_map_matrix(ring, qcoeffs, gamma):
    """Matrix of (a, b) -> a Q + b Q_x at Gamma = gamma.

    Q has degree N (monic); unknowns are a_0..a_{N-2}, b_0..b_{N-1};
    rows are x^0 .. x^{2N-2}.  Its determinant is the resultant up to the
    orientation fixed here once and for all.
    """
    N = len(qcoeffs) - 1
    q = [_poly_eval_gamma(c, gamma) for c in qcoeffs]
    qx = [ring.scale(j, q[j]) for j in range(1, N + 1)]  # deg N-1
    size = 2 * N - 1
    mat = [[ring.zero() for _ in range(size)] for _ in range(size)]
    for i in range(N - 1):  # a_i columns
        for j in range(N + 1):
            mat[i + j][i] = q[j]
    for i in range(N):  # b_i columns
        for j in range(N):
            mat[i + j][N - 1 + i] = qx[j]
    return mat


def sylvester_data(phi, qcoeffs, gamma_degree_bound):
    """Exact resultant and Bezout cofactors of (Q, Q_x) over Q[t]/(phi).

    ``qcoeffs``: ascending x-coefficients of Q, each a (c0, c1) pair of
    ring elements meaning c0 + c1*Gamma.  Returns (r, a, b) where

    * r: ascending Gamma-coefficients (ring elements) of the resultant,
      det of the Sylvester-style map matrix above (orientation gives
      Res(x^3 + c, 3 x^2) = +27 c^2);
    * a: a[i][e] = ring coefficient of x^i Gamma^e, deg_x a <= N-2;
    * b: likewise with deg_x b <= N-1;

    and a Q + b Q_x = r holds identically (asserted exactly).
    """
    ring = QtRing(phi)
    N = len(qcoeffs) - 1
    rho_max = gamma_degree_bound
    # resultant through rho_max + 2 nodes (degree bound rho_max + 1, then
    # the top coefficient is checked to vanish)
    r_nodes = list(range(rho_max + 2))
    r_vals = []
    for gm in r_nodes:
        det, _ = _field_gauss_det_solve(ring, _build_map_matrix(ring, qcoeffs, gm))
        r_vals.append(det)
    r_coeffs = _interpolate(ring, r_nodes, r_vals, rho_max + 1)
    if not ring.is_zero(r_coeffs[-1]):
        raise LinearSolveFailure("resultant exceeded its degree bound")
    r_coeffs = r_coeffs[:-1]
    while len(r_coeffs) > 1 and ring.is_zero(r_coeffs[-1]):
        r_coeffs.pop()

    # cofactors: solve at nodes where r(node) != 0; v = adj(T) e_0 is a
    # polynomial of degree <= rho_max in Gamma
    good_nodes, sols = [], []
    gm = 0
    while len(good_nodes) < rho_max + 1:
        mat = _build_map_matrix(ring, qcoeffs, gm)
        rhs = [_eval_poly(ring, r_coeffs, gm) if i == 0 else ring.zero()
               for i in range(2 * N - 1)]
        det, sol = _field_gauss_det_solve(ring, mat, rhs)
        if sol is not None and not ring.is_zero(det):
            good_nodes.append(gm)
            sols.append(sol)
        gm += 1
        if gm > 10 * (rho_max + 2) + 10:
            raise LinearSolveFailure("could not find enough regular nodes")
    cols = len(sols[0])
    interp = []
    for idx in range(cols):
        vals = [s[idx] for s in sols]
        interp.append(_interpolate(ring, good_nodes, vals, rho_max))
    a = interp[: N - 1]  # a[i][e]
    b = interp[N - 1 :]

    _verify_identity(ring, qcoeffs, a, b, r_coeffs)
    return ring, r_coeffs, a, b


def _eval_poly(ring, coeffs, x):
    acc = ring.zero()
    for c in reversed(coeffs):
        acc = ring.add(ring.scale(x, acc), c)
    return acc


def _verify_identity(ring, qcoeffs, a, b, r_coeffs):
    """Assert a Q + b Q_x == r as polynomials in (x, Gamma), exactly."""
    N = len(qcoeffs) - 1
    qq = [[c0, c1] for (c0, c1) in qcoeffs]  # [x][gamma]
    qx = [[ring.scale(j, qcoeffs[j][0]), ring.scale(j, qcoeffs[j][1])]
          for j in range(1, N + 1)]

    def xg_mul(u, v):
        out = [[ring.zero() for _ in range(len(u[0]) + len(v[0]) - 1)]
               for _ in range(len(u) + len(v) - 1)]
        for i, row in enumerate(u):
            for e, c in enumerate(row):
                if ring.is_zero(c):
                    continue
                for i2, row2 in enumerate(v):
                    for e2, c2 in enumerate(row2):
                        out[i + i2][e + e2] = ring.add(
                            out[i + i2][e + e2], ring.mul(c, c2)
                        )
        return out

    lhs1 = xg_mul(a, qq)
    lhs2 = xg_mul(b, qx)
    rows = max(len(lhs1), len(lhs2))
    cols = max(len(lhs1[0]), len(lhs2[0]), len(r_coeffs))
    for i in range(rows):
        for e in range(cols):
            s = ring.zero()
            if i < len(lhs1) and e < len(lhs1[0]):
                s = ring.add(s, lhs1[i][e])
            if i < len(lhs2) and e < len(lhs2[0]):
                s = ring.add(s, lhs2[i][e])
            expect = r_coeffs[e] if (i == 0 and e < len(r_coeffs)) else ring.zero()
            if not ring.is_zero(ring.sub(s, expect)):
                raise LinearSolveFailure("Bezout identity verification failed")
