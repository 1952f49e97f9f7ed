"""Family construction, resultant, cofactors, reduction and constants."""

import random
from fractions import Fraction
from math import inf

import pytest

from conftest import deterministic_curves
from hyperzeta.deformation import (
    bezout_cofactors,
    build_family,
    connection_matrix,
    constants,
    default_base_curve,
    reduce_differential,
    resultant,
    to_diffeq_system,
)
from hyperzeta.errors import SingularCurve
from hyperzeta.kedlaya_fiber import fiber_frobenius_matrix
from hyperzeta.odesolver import ScaledMatrix
from hyperzeta.padic import make_context
from hyperzeta.zeta import _embed_fiber_matrix, pipeline_width
from hyperzeta.deformation import boundary_from_fiber


def sylvester_det_fraction(qcoeffs, gamma):
    """Independent oracle: the Sylvester-style determinant of
    (a, b) -> a Q + b Q_x at an integer gamma, over exact Fractions."""
    N = len(qcoeffs) - 1
    q = [Fraction(c0 + c1 * gamma) for (c0, c1) in qcoeffs]
    qx = [j * q[j] for j in range(1, N + 1)]
    size = 2 * N - 1
    mat = [[Fraction(0)] * size for _ in range(size)]
    for i in range(N - 1):
        for j in range(N + 1):
            mat[i + j][i] = q[j]
    for i in range(N):
        for j in range(N):
            mat[i + j][N - 1 + i] = qx[j]
    # fraction-free-enough: plain exact Gaussian elimination
    det = Fraction(1)
    for col in range(size):
        piv = next((r for r in range(col, size) if mat[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = -det
        det *= mat[col][col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for r in range(col + 1, size):
            if mat[r][col]:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    return det


class TestBuildFamily:
    def test_example_family_p7(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [1, 2, 0])  # y^2 = x^3 + 2x + 1
        # Q0 = x^3 + 1 so a_1 - b_1 = 2, a_0 - b_0 = 0: Q = x^3 + 2 Gamma x + 1
        assert fam.Q0coeffs == [1, 0, 0]
        qg = fam.q_gamma_xg()
        assert ctx.coeffs(qg.cs[1][0]) == (2,)
        assert ctx.is_zero(qg.cs[0][0])

    def test_base_curve_choice_p_divides(self):
        assert default_base_curve(3, 1) == [0, 1, 0]  # x^3 + x
        assert default_base_curve(7, 1) == [1, 0, 0]  # x^3 + 1
        assert default_base_curve(5, 2) == [0, 1, 0, 0, 0]  # x^5 + x

    def test_singular_curve_rejected(self):
        ctx = make_context(7, 1, 20)
        with pytest.raises(SingularCurve):
            build_family(ctx, [0, 0, 0])  # y^2 = x^3

    def test_p3_family_builds(self):
        ctx = make_context(3, 1, 20)
        fam = build_family(ctx, [1, 1, 0])
        assert fam.Q0coeffs == [0, 1, 0]


class TestResultant:
    def test_shifted_cubic(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])  # Q = x^3 + (Gamma + 1)
        r = resultant(fam)
        assert [c.coeffs[0] for c in r] == [27, 54, 27]  # 27 (Gamma+1)^2

    def test_two_torsion_free_cubic(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [1, 2, 0])  # Q = x^3 + 2 Gamma x + 1
        r = resultant(fam)
        # 32 Gamma^3 + 27; r(0) = 27 and r(1) = 59 are units mod 7
        assert [c.coeffs[0] for c in r] == [27, 0, 0, 32]
        assert 59 % 7 != 0

    def test_sylvester_determinant_oracle(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [3, 5, 1])
        qpairs = []
        for i in range(3):
            b = fam.Q0coeffs[i]
            a = fam.Q1res[i][0]
            qpairs.append((b, a - b))
        qpairs.append((1, 0))
        pw = 7 ** 20
        for gamma in [0, 1, 2, 5]:
            want = sylvester_det_fraction(qpairs, gamma) % pw
            got = int(fam.r_at(ctx.from_int(gamma)))
            assert got == want

    def test_degree_bound(self, rng):
        for _ in range(8):
            curve = deterministic_curves(7, 1, 1, 1, rng.randrange(10 ** 9))[0]
            ctx = make_context(7, 1, 16)
            fam = build_family(ctx, curve)
            assert fam.rho <= 4


class TestBezout:
    def test_shifted_cubic_cofactors(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])
        a, b = bezout_cofactors(fam)

        def gamma_coeffs(row):
            out = [c.coeffs[0] for c in row]
            while out and out[-1] == 0:
                out.pop()
            return out

        # a = 27 c = 27 + 27 Gamma (x-degree 0)
        assert gamma_coeffs(a[0]) == [27, 27]
        # b = -9 c x
        pw = 7 ** 20
        assert gamma_coeffs(b[1]) == [(-9) % pw, (-9) % pw]
        assert gamma_coeffs(b[0]) == []

    def test_identity_at_random_gamma(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [1, 2, 3])
        a, b = fam.bezout()
        pw = int(ctx.pW)
        for gm in [0, 1, 4]:

            def eval_xg(tbl, x, gamma):
                total = 0
                for i, row in enumerate(tbl):
                    coef = sum(int(c) * gamma ** e for e, c in enumerate(row))
                    total += coef * x ** i
                return total % pw

            for x in [0, 1, 2, 9]:
                q_here = (
                    x ** 3
                    + sum(
                        (int(fam.a_lift[i]) - int(fam.b_lift[i])) * gm + int(fam.b_lift[i])
                        for i in [0]
                    )
                    * x ** 0
                    + ((int(fam.a_lift[1]) - int(fam.b_lift[1])) * gm + int(fam.b_lift[1])) * x
                    + ((int(fam.a_lift[2]) - int(fam.b_lift[2])) * gm + int(fam.b_lift[2])) * x ** 2
                )
                qx_here = 3 * x ** 2 + (
                    (int(fam.a_lift[2]) - int(fam.b_lift[2])) * gm + int(fam.b_lift[2])
                ) * 2 * x + ((int(fam.a_lift[1]) - int(fam.b_lift[1])) * gm + int(fam.b_lift[1]))
                lhs = (
                    eval_xg(a, x, gm) * q_here + eval_xg(b, x, gm) * qx_here
                ) % pw
                r_here = int(fam.r_at(ctx.from_int(gm)))
                assert lhs == r_here % pw

    def test_degree_bounds_random_g2(self, rng):
        count = 0
        while count < 10:
            curve = deterministic_curves(5, 1, 2, 1, rng.randrange(10 ** 9))[0]
            ctx = make_context(5, 1, 12)
            fam = build_family(ctx, curve)
            a, b = fam.bezout()
            assert len(a) - 1 <= 2 * fam.g - 1
            assert len(b) - 1 <= 2 * fam.g
            for tbl in (a, b):
                for row in tbl:
                    assert len(row) - 1 <= 4 * fam.g
            count += 1


class TestReduceDifferential:
    def test_low_degree_unchanged(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])
        rows, e = reduce_differential(fam, [[3], [5]], Fraction(1, 2))
        assert e == 0
        assert int(rows[0][0].raw) == 3 and rows[0][0].scale == 0
        assert int(rows[1][0].raw) == 5

    def test_pole_reduction_shifted_cubic(self):
        # dx/Q^{3/2} = (1/(3c)) dx/sqrt(Q) = (9c/r) dx/sqrt(Q)
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])
        rows, e = reduce_differential(fam, [[1]], Fraction(3, 2))
        assert e == 1
        assert [int(c.raw) for c in rows[0]] == [9, 9]  # 9 (Gamma + 1)
        assert all(int(c.raw) == 0 for c in rows[1])

    def test_exact_form_reduces_to_zero(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])
        # x^2 dx/sqrt(Q) is exact for Q = x^3 + c
        rows, e = reduce_differential(fam, [[0], [0], [1]], Fraction(1, 2))
        assert e == 0
        for row in rows:
            assert all(int(c.raw) == 0 for c in row)

    def test_linearity(self):
        ctx = make_context(7, 1, 24)
        fam = build_family(ctx, [1, 2, 0])
        P1 = [[1], [2], [0], [1]]
        P2 = [[0], [3], [1], [2]]
        Psum = [[1], [5], [1], [3]]
        r1, e1 = reduce_differential(fam, P1, Fraction(3, 2))
        r2, e2 = reduce_differential(fam, P2, Fraction(3, 2))
        rs, es = reduce_differential(fam, Psum, Fraction(3, 2))
        assert e1 == e2 == es
        for i in range(2):
            la = max(len(r1[i]), len(r2[i]), len(rs[i]))
            for e in range(la):
                def at(row, k):
                    return row[k] if k < len(row) else row[0] * 0
                s = at(r1[i], e) + at(r2[i], e)
                assert s.congruent(at(rs[i], e), 20)


class TestConnection:
    def test_pinned_diagonal_family(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])
        H = connection_matrix(fam)
        assert H.degree == 1
        pw = int(ctx.pW)
        inv2 = pow(2, -1, pw)
        want_neg = (-9 * inv2) % pw
        want_pos = (9 * inv2) % pw
        for e in range(2):
            M = H.coeff(e)
            assert M.scale == 0
            assert int(M.entries[0]) == want_neg
            assert int(M.entries[3]) == want_pos
            assert int(M.entries[1]) == 0 and int(M.entries[2]) == 0

    @pytest.mark.parametrize("p,g,seed", [(7, 1, 101), (5, 2, 202)])
    def test_degree_and_valuation_bounds(self, p, g, seed):
        for i in range(10):
            curve = deterministic_curves(p, 1, g, 1, seed + i)[0]
            ctx = make_context(p, 1, 24)
            fam = build_family(ctx, curve)
            H = connection_matrix(fam)
            assert H.degree <= 8 * g
            v = H.valuation()
            if v != inf:
                assert v * (p - 1) >= -10 * g


class TestConstants:
    def test_g1_p7(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [1, 2, 0])
        c = constants(fam)
        assert (c.m, c.M, c.ell) == (10, 171, 1751)
        assert float(c.alpha) == 3 and float(c.gamma) == 1
        assert float(c.delta) == 6 and float(c.psi) == 36
        assert c.epsilon == 70
        assert c.mPrime == 13
        # rho = 3 for this curve: zeta = max(32, 30, 66)
        assert fam.rho == 3
        assert c.zeta == 66

    def test_g2_p5(self):
        ctx = make_context(5, 1, 20)
        fam = build_family(ctx, [2, 1, 0, 1, 0])
        c = constants(fam)
        assert (c.m, c.M, c.ell) == (19, 212, 3871)
        assert c.epsilon == 249

    def test_g3_p3(self):
        ctx = make_context(3, 1, 20)
        curve = deterministic_curves(3, 1, 3, 1, seed=99)[0]
        fam = build_family(ctx, curve)
        c = constants(fam)
        assert float(c.alpha) == 18
        assert float(c.gamma) == 9
        assert float(c.delta) == 36
        assert float(c.psi) == 216
        assert (c.m, c.M, c.ell) == (33, 211, 5539)
        assert c.epsilon == 617
        assert c.zeta == max(4 * fam.rho, 3 * fam.rho + 25, 75 + fam.rho)

    def test_monotone_in_n(self):
        prev = None
        for n in (1, 2, 3):
            ctx = make_context(7, n, 20)
            curve = [(1,) + (0,) * (n - 1), (2,) + (0,) * (n - 1), (0,) * n]
            fam = build_family(ctx, curve)
            c = constants(fam)
            if prev is not None:
                assert c.m >= prev.m and c.M >= prev.M
                assert c.ell >= prev.ell and c.epsilon >= prev.epsilon
            prev = c


class TestSystemBridge:
    def test_degrees_and_assembly(self):
        p, n, g = 7, 1, 1
        W = pipeline_width(p, n, g)
        ctx = make_context(p, n, W)
        fam = build_family(ctx, [1, 2, 0])
        c = fam.constants()
        fib = fiber_frobenius_matrix(p, fam.Q0coeffs, precision=c.epsilon)
        K0 = boundary_from_fiber(fam, _embed_fiber_matrix(ctx, fib.F0))
        sys = to_diffeq_system(fam, K0)
        assert sys.A.degree == p * fam.rho
        assert sys.B.degree == fam.rho
        assert sys.A.degree + sys.B.degree <= c.zeta
        assert sys.A.degree + sys.X.degree + 1 <= c.zeta
        assert sys.Y.degree + sys.B.degree + 1 <= c.zeta
        assert sys.ell == c.ell and sys.m == c.m

    def test_rtilde_truncation(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [1, 2, 0])
        # r = 32 Gamma^3 + 27 is nonzero mod 7 in degree 3: rtilde = r
        assert fam.rho_prime == fam.rho
        assert [int(c) for c in fam.rtilde] == [int(c) for c in fam.r]
