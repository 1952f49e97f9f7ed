"""Solver contracts: recursion vs exact-rational replay, mode agreement,
window bounds, multipoint evaluation, and the log-convergence bookkeeping."""

import math
import random
from fractions import Fraction

import pytest

from conftest import assert_matches_fractions, scaled_from_fraction
from hyperzeta.errors import (
    DomainError,
    GuardExhausted,
    InvalidInput,
    SingularLeadingCoefficient,
    ValuationViolation,
)
from hyperzeta.odesolver import (
    MatPoly,
    ScaledMatrix,
    assemble_system,
    matrix_inverse,
    required_width,
    solve_full,
    solve_multipoint,
    solve_streaming,
    step_recursion,
)
from hyperzeta.oracle import rational_recursion_replay
from hyperzeta.padic import ScaledElement, ZqElement, make_context


def scalar_poly(ctx, d, ints):
    return MatPoly.from_scalar_coeffs(ctx, d, [ctx.from_int(v) for v in ints])


def make_simple_system(p=5, m=5, ell=20, X_const=0, K0_val=5, alpha=0):
    W = required_width(p, m=m, ell=ell, alpha=alpha)
    ctx = make_context(p, 1, W)
    one = scalar_poly(ctx, 1, [1])
    X = scalar_poly(ctx, 1, [X_const]) if X_const else MatPoly.zero(ctx, 1)
    Y = MatPoly.zero(ctx, 1)
    K0 = ScaledMatrix.from_rows(ctx, [[K0_val]])
    return ctx, assemble_system(one, one, X, Y, K0, alpha=alpha, m=m, ell=ell)


def random_integral_system(ctx, d, seed, ell, m, alpha, degs=(2, 1, 2, 1)):
    rng = random.Random(seed)

    def rand_poly(deg, identity_head=False):
        mats = []
        for k in range(deg + 1):
            rows = [[rng.randrange(-4, 5) for _ in range(d)] for _ in range(d)]
            if identity_head and k == 0:
                rows = [[int(i == j) for j in range(d)] for i in range(d)]
            mats.append(rows)
        return mats

    A = rand_poly(degs[0], identity_head=True)
    B = rand_poly(degs[1], identity_head=True)
    X = rand_poly(degs[2])
    Y = rand_poly(degs[3])
    # unipotent K0: always invertible
    K0 = [
        [1 if i == j else (rng.randrange(5) if j > i else 0) for j in range(d)]
        for i in range(d)
    ]
    if d == 1:
        K0 = [[1 + rng.randrange(1, 4)]]

    def to_mp(poly):
        return MatPoly(
            ctx, d, [ScaledMatrix.from_rows(ctx, rows) for rows in poly]
        )

    sys = assemble_system(
        to_mp(A), to_mp(B), to_mp(X), to_mp(Y),
        ScaledMatrix.from_rows(ctx, K0), alpha=alpha, m=m, ell=ell,
    )
    return sys, (A, B, X, Y, K0)


class TestAssemble:
    def test_trivial_constants_example(self):
        # d=1, A=B=1, X=Y=0, K0=5, alpha=gamma=delta=0, m=5, ell=10
        ctx, sys = make_simple_system(p=7, m=5, ell=10)
        assert float(sys.psi) == 0
        assert sys.eps_int == 5 + 2  # ceil(log_7 10) = 2

    def test_singular_leading_coefficient(self):
        ctx = make_context(5, 1, 30)
        A = scalar_poly(ctx, 1, [0, 1])  # A_0 = 0
        one = scalar_poly(ctx, 1, [1])
        K0 = ScaledMatrix.from_rows(ctx, [[1]])
        with pytest.raises(SingularLeadingCoefficient):
            assemble_system(A, one, MatPoly.zero(ctx, 1), MatPoly.zero(ctx, 1),
                            K0, m=3, ell=5)

    def test_valuation_violation(self):
        ctx = make_context(5, 1, 40)
        one = scalar_poly(ctx, 1, [1])
        # X with ord = -2 but psi = 0
        X = MatPoly(ctx, 1, [ScaledMatrix(ctx, 1, [ctx.from_int(1)], 2)])
        K0 = ScaledMatrix.from_rows(ctx, [[1]])
        with pytest.raises(ValuationViolation):
            assemble_system(one, one, X, MatPoly.zero(ctx, 1), K0, m=3, ell=5)

    def test_singular_K0(self):
        ctx = make_context(5, 1, 30)
        one = scalar_poly(ctx, 2, [1])
        K0 = ScaledMatrix.from_rows(ctx, [[1, 0], [0, 0]])
        with pytest.raises(SingularLeadingCoefficient):
            assemble_system(one, one, MatPoly.zero(ctx, 2), MatPoly.zero(ctx, 2),
                            K0, m=3, ell=5)

    def test_width_requirement_enforced(self):
        ctx = make_context(5, 1, 5)
        one = scalar_poly(ctx, 1, [1])
        K0 = ScaledMatrix.from_rows(ctx, [[1]])
        with pytest.raises(InvalidInput):
            assemble_system(one, one, MatPoly.zero(ctx, 1), MatPoly.zero(ctx, 1),
                            K0, m=10, ell=100)


class TestRecursion:
    def test_constant_solution(self):
        ctx, sys = make_simple_system()
        poly = solve_full(sys)
        assert poly.degree == 0
        assert poly.coeff(0).entry(0, 0) == 5
        for k in range(1, 5):
            assert poly.coeff(k).is_zero()

    def test_exponential_coefficients(self):
        # X = -p: K' = pK, K_k = p^k / k!
        p, m, ell = 5, 5, 20
        ctx, sys = make_simple_system(p=p, m=m, ell=ell, X_const=-p, K0_val=1)
        poly = solve_full(sys)
        for k in range(ell):
            expect = scaled_from_fraction(ctx, Fraction(p ** k, math.factorial(k)))
            assert poly.coeff(k).entry(0, 0).congruent(expect, m)
        # K_2 = 25/2 exactly as a ScaledElement (integral: 2 is a unit)
        k2 = poly.coeff(2).entry(0, 0)
        assert k2 == scaled_from_fraction(ctx, Fraction(25, 2))

    def test_step_matches_exact_replay_d2(self):
        m, ell = 6, 40
        W = required_width(5, m=m, ell=ell, alpha=10)
        ctx = make_context(5, 1, W)
        sys, data = random_integral_system(ctx, 2, seed=7, ell=ell, m=m, alpha=10)
        got = solve_full(sys)
        exact = rational_recursion_replay(*data, ell)
        for k in range(ell):
            assert_matches_fractions(ctx, got.coeff(k), exact[k], m)

    def test_step_recursion_idempotent_on_solution(self):
        m, ell = 6, 30
        W = required_width(5, m=m, ell=ell, alpha=10)
        ctx = make_context(5, 1, W)
        sys, _ = random_integral_system(ctx, 2, seed=11, ell=ell, m=m, alpha=10)
        poly = solve_full(sys)
        for k in [0, 3, 10, 20]:
            window = [poly.coeff(k - i) for i in range(min(k + 1, sys.zeta))]
            nxt = step_recursion(sys, k, window)
            assert nxt.congruent(poly.coeff(k + 1), m)

    def test_guard_exhausted_on_hypothesis_violation(self):
        # alpha = 0 declared but true denominators grow like v_p(k!):
        # the headroom check fires rather than silently corrupting
        p, m, ell = 3, 2, 200
        W = required_width(p, m=m, ell=ell)
        ctx = make_context(p, 1, W)
        one = scalar_poly(ctx, 1, [1])
        X = scalar_poly(ctx, 1, [-1])  # K' = K: K_k = 1/k!, unbounded denominators
        K0 = ScaledMatrix.from_rows(ctx, [[1]])
        sys = assemble_system(one, one, X, MatPoly.zero(ctx, 1), K0, m=m, ell=ell)
        with pytest.raises(GuardExhausted):
            solve_full(sys)


class TestStreaming:
    def test_at_zero_returns_K0(self):
        ctx, sys = make_simple_system(X_const=-5, K0_val=1)
        out = solve_streaming(sys, 0)
        assert out.entry(0, 0) == 1

    def test_at_one_equals_full_sum(self):
        ctx = make_context(5, 1, required_width(5, m=6, ell=35, alpha=10))
        sys, _ = random_integral_system(ctx, 2, seed=3, ell=35, m=6, alpha=10)
        stream = solve_streaming(sys, 1)
        full = solve_full(sys)
        assert stream.congruent(full.evaluate(1), 6)

    def test_exponential_partial_sum(self):
        p, m, ell = 5, 5, 20
        ctx, sys = make_simple_system(p=p, m=m, ell=ell, X_const=-p, K0_val=1)
        out = solve_streaming(sys, 1)
        expect = sum(Fraction(p ** k, math.factorial(k)) for k in range(ell))
        assert out.entry(0, 0).congruent(scaled_from_fraction(ctx, expect), m)

    def test_window_bound_and_ell_invariance(self):
        ctx = make_context(5, 1, required_width(5, m=6, ell=80, alpha=10))
        sys, data = random_integral_system(ctx, 2, seed=5, ell=40, m=6, alpha=10)
        _, st1 = solve_streaming(sys, 1, with_stats=True)
        assert st1.peak_retained <= sys.zeta + 2
        sys2, _ = random_integral_system(ctx, 2, seed=5, ell=80, m=6, alpha=10)
        _, st2 = solve_streaming(sys2, 1, with_stats=True)
        assert st2.peak_retained == st1.peak_retained
        assert st2.aux_retained == st1.aux_retained

    def test_non_integral_point_rejected(self):
        ctx, sys = make_simple_system()
        bad = ScaledElement(ctx, ctx.from_int(1), 1)
        with pytest.raises(DomainError):
            solve_streaming(sys, bad)


class TestMultipoint:
    def test_single_zero_point(self):
        ctx, sys = make_simple_system(X_const=-5, K0_val=3)
        vals = solve_multipoint(sys, [0])
        assert vals[0].entry(0, 0) == 3

    def test_matches_streaming_at_zero_and_one(self):
        ctx = make_context(5, 1, required_width(5, m=6, ell=30, alpha=10))
        sys, _ = random_integral_system(ctx, 2, seed=13, ell=30, m=6, alpha=10)
        vals = solve_multipoint(sys, [0, 1])
        s0 = solve_streaming(sys, 0)
        s1 = solve_streaming(sys, 1)
        assert vals[0].congruent(s0, 6)
        assert vals[1].congruent(s1, 6)

    def test_matches_horner_random_points(self):
        ctx = make_context(7, 1, required_width(7, m=6, ell=30, alpha=10))
        sys, _ = random_integral_system(ctx, 2, seed=17, ell=30, m=6, alpha=10)
        pts = [0, 1, 2, 5, 11, 23]
        vals = solve_multipoint(sys, pts)
        full = solve_full(sys)
        for pt, val in zip(pts, vals):
            assert val.congruent(full.evaluate(pt), 6)


class TestProperties:
    def test_product_log_convergence(self):
        # Lemma-style bookkeeping: (x, y)-log * (x', y')-log stays within
        # (x + x', y + y')-log, checked on series with exact profiles
        p, W = 5, 60
        ctx = make_context(p, 1, W)
        terms = 30

        def log_series(x, y, d=1):
            coeffs = []
            for i in range(terms):
                s = x * math.ceil(math.log(i + 1, p) - 1e-12) + y
                coeffs.append(ScaledMatrix(ctx, 1, [ctx.from_int(1)], s))
            return MatPoly(ctx, 1, coeffs)

        A = log_series(1, 0)
        B = log_series(2, 1)
        prod = A.mul(B)
        for i in range(terms):
            v = prod.coeff(i).valuation()
            bound = -3 * math.ceil(math.log(i + 1, p) - 1e-12) - 1
            assert v >= bound

    def test_precision_robustness(self):
        # extra working digits change nothing mod p^m
        m, ell = 6, 30
        W = required_width(5, m=m, ell=ell, alpha=10)
        ctx1 = make_context(5, 1, W)
        ctx2 = make_context(5, 1, W + 10)
        sys1, _ = random_integral_system(ctx1, 2, seed=23, ell=ell, m=m, alpha=10)
        sys2, _ = random_integral_system(ctx2, 2, seed=23, ell=ell, m=m, alpha=10)
        out1 = solve_streaming(sys1, 1).reduced(m)
        out2 = solve_streaming(sys2, 1).reduced(m)
        for i in range(2):
            for j in range(2):
                a = out1.entry(i, j)
                b = out2.entry(i, j)
                d = (a - ScaledElement(ctx1, ctx1.from_coeffs(
                    [c % int(ctx1.pW) for c in ctx2.coeffs(b.raw)]), b.scale))
                assert d.valuation() >= m

    def test_factorization_c_k0_d(self):
        # K = C K0 D with C, D solved from their own one-sided systems
        m, ell = 6, 25
        W = required_width(5, m=m, ell=ell, alpha=10)
        ctx = make_context(5, 1, W)
        sys, (A, B, X, Y, K0) = random_integral_system(
            ctx, 2, seed=29, ell=ell, m=m, alpha=10
        )
        ident = [[[int(i == j) for j in range(2)] for i in range(2)]]
        zero = [[[0, 0], [0, 0]]]
        I2 = [[1, 0], [0, 1]]

        def to_mp(poly):
            return MatPoly(ctx, 2, [ScaledMatrix.from_rows(ctx, r) for r in poly])

        sysC = assemble_system(to_mp(A), to_mp(ident), to_mp(zero), to_mp(Y),
                               ScaledMatrix.from_rows(ctx, I2),
                               alpha=10, m=m, ell=ell)
        sysD = assemble_system(to_mp(ident), to_mp(B), to_mp(X), to_mp(zero),
                               ScaledMatrix.from_rows(ctx, I2),
                               alpha=10, m=m, ell=ell)
        K = solve_full(sys)
        C = solve_full(sysC)
        D = solve_full(sysD)
        prod = C.mul(MatPoly(ctx, 2, [ScaledMatrix.from_rows(ctx, K0)])).mul(
            D, truncate=ell
        )
        assert prod.congruent(K, m - 2, upto=ell)


class TestMatrixHelpers:
    def test_matrix_inverse_roundtrip(self):
        ctx = make_context(7, 2, 8)
        M = ScaledMatrix.from_rows(
            ctx,
            [[ZqElement.from_coeffs(ctx, [3, 1]), ZqElement.from_coeffs(ctx, [0, 2])],
             [ZqElement.from_coeffs(ctx, [5, 0]), ZqElement.from_coeffs(ctx, [1, 1])]],
        )
        Minv = matrix_inverse(M)
        prod = M.matmul(Minv)
        assert prod.congruent(ScaledMatrix.identity(ctx, 2), 8)

    def test_scalar_fast_path_consistency(self):
        ctx = make_context(5, 1, 10)
        S = ScaledMatrix.scalar(ctx, 2, ctx.from_int(7))
        D = ScaledMatrix.from_rows(ctx, [[1, 2], [3, 4]])
        left = S.matmul(D)
        # dense route bypassing the scalar flag
        S_dense = ScaledMatrix(ctx, 2, S.entries, 0, _detect_scalar=False)
        S_dense._scalar = None
        right = S_dense.matmul(D)
        assert left.congruent(right, 10)
