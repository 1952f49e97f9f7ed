"""Acceptance suite.

One test per exit criterion, each printing a PASS/FAIL line.  The heavy
end-to-end criteria fan their curves over a small process pool; all
randomness is seeded, all tolerances are exact (zero) unless a criterion
states a digit slack.  Criteria 3, 4, 7 and 10 reuse the per-curve runs
of criteria 1 and 2, so this module is order-dependent by design.
"""

import math
import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import comb

import pytest

from conftest import deterministic_curves
from hyperzeta.deformation import build_family, connection_matrix
from hyperzeta.odesolver import (
    MatPoly,
    ScaledMatrix,
    assemble_system,
    required_width,
    solve_full,
    solve_multipoint,
    solve_streaming,
)
from hyperzeta.oracle import count_points
from hyperzeta.padic import ZqElement, make_context, teichmuller
from hyperzeta.zeta import (
    build_pipeline_system,
    charpoly_lift,
    compute_zeta,
    norm_frobenius,
    point_counts,
    specialize_frobenius,
)

BUDGET = 1 << 24
RESULTS = {"jobs": []}


def _curve_job(args):
    """One end-to-end run used by criteria 1-4, 7, 10 (top level: picklable)."""
    p, n, curve, budget = args
    ctx, fam, sys = build_pipeline_system(p, n, curve)
    c = fam.constants()
    K1s, stats = solve_streaming(sys, 1, with_stats=True)
    poly = solve_full(sys)
    mode_agreement = K1s.congruent(poly.evaluate(1), c.m)
    F1 = specialize_frobenius(fam, K1s)
    Fq = norm_frobenius(F1, n)
    q = p ** n
    P = charpoly_lift(Fq, q, fam.g, c.m)
    from hyperzeta.zeta import assemble_zeta

    res = assemble_zeta(P, q, p, n, fam.g)
    ks = []
    k = 1
    while q ** k <= budget:
        ks.append(k)
        k += 1
    derived = point_counts(P, q, ks[-1]) if ks else []
    oracle = [
        count_points(p, n, curve, k=k, budget=budget, base_modulus=list(ctx.phi))
        for k in ks
    ]
    return {
        "p": p,
        "n": n,
        "g": fam.g,
        "q": q,
        "curve": curve,
        "numerator": P,
        "counts": res.counts,
        "ks": ks,
        "derived": derived,
        "oracle": oracle,
        "oracle_match": derived == oracle,
        "mode_agreement": mode_agreement,
        "peak_retained": stats.peak_retained,
        "aux_retained": stats.aux_retained,
        "zeta": sys.zeta,
        "m": c.m,
    }


def _run_jobs(jobs):
    if len(jobs) == 1:
        return [_curve_job(jobs[0])]
    with ProcessPoolExecutor(max_workers=2) as pool:
        return list(pool.map(_curve_job, jobs))


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} ({name}): {status} {detail}", flush=True)
    assert ok, f"criterion {num} ({name}) failed: {detail}"


class TestAcceptance:
    def test_criterion_01_genus1_end_to_end(self):
        curves = []
        f7 = deterministic_curves(7, 1, 1, 12, seed=71)
        f7[0] = [1, 2, 0]  # keep one pinned curve for criterion 7 reuse
        curves += [(7, 1, c, BUDGET) for c in f7]
        curves += [(7, 2, c, BUDGET) for c in deterministic_curves(7, 2, 1, 5, seed=72)]
        curves += [(7, 3, c, BUDGET) for c in deterministic_curves(7, 3, 1, 3, seed=73)]
        assert len(curves) == 20
        results = _run_jobs(curves)
        RESULTS["jobs"].extend(results)
        RESULTS["g1"] = results
        bad = [r for r in results if not r["oracle_match"]]
        checked = sum(len(r["ks"]) for r in results)
        _report(
            1,
            "genus-1 end-to-end",
            not bad,
            f"- {len(results)} curves over F_7/F_49/F_343, "
            f"{checked} extension counts equal enumeration exactly",
        )

    def test_criterion_02_genus2_end_to_end(self):
        jobs = [(5, 1, c, 5 ** 2) for c in deterministic_curves(5, 1, 2, 5, seed=51)]
        jobs += [(5, 2, c, 25 ** 2) for c in deterministic_curves(5, 2, 2, 2, seed=52)]
        results = _run_jobs(jobs)
        RESULTS["jobs"].extend(results)
        RESULTS["g2"] = results
        bad = [r for r in results if not r["oracle_match"] or r["ks"] != [1, 2]]
        _report(
            2,
            "genus-2 end-to-end",
            not bad,
            f"- {len(results)} degree-5 curves over F_5/F_25, k=1,2 exact",
        )

    def test_criterion_03_mode_agreement(self):
        pipeline_ok = all(r["mode_agreement"] for r in RESULTS["jobs"])
        # 50 random synthetic integral systems
        rng = random.Random(333)
        synthetic_ok = True
        for trial in range(50):
            p = rng.choice([3, 5, 7])
            d = rng.choice([1, 2])
            m, ell, alpha = 5, rng.randrange(20, 45), 10
            ctx = make_context(p, 1, required_width(p, m=m, ell=ell, alpha=alpha))

            def rand_poly(deg, identity_head=False):
                out = []
                for k in range(deg + 1):
                    rows = [
                        [rng.randrange(-3, 4) for _ in range(d)] for _ in range(d)
                    ]
                    if identity_head and k == 0:
                        rows = [[int(i == j) for j in range(d)] for i in range(d)]
                    out.append(ScaledMatrix.from_rows(ctx, rows))
                return MatPoly(ctx, d, out)

            K0 = ScaledMatrix.from_rows(
                ctx,
                [[1 if i == j else (rng.randrange(4) if j > i else 0)
                  for j in range(d)] for i in range(d)],
            )
            sys = assemble_system(
                rand_poly(rng.randrange(0, 3), True),
                rand_poly(rng.randrange(0, 2), True),
                rand_poly(rng.randrange(0, 3)),
                rand_poly(rng.randrange(0, 2)),
                K0, alpha=alpha, m=m, ell=ell,
            )
            stream = solve_streaming(sys, 1)
            full = solve_full(sys)
            if not stream.congruent(full.evaluate(1), m):
                synthetic_ok = False
                break
        _report(
            3,
            "mode agreement",
            pipeline_ok and synthetic_ok,
            f"- {len(RESULTS['jobs'])} pipeline runs + 50 synthetic systems",
        )

    def test_criterion_04_streaming_window(self):
        within = all(r["peak_retained"] <= r["zeta"] + 2 for r in RESULTS["jobs"])
        # doubling ell leaves the streaming peak unchanged
        _, _, sys1 = build_pipeline_system(7, 1, [1, 2, 0])
        _, st1 = solve_streaming(sys1, 1, with_stats=True)
        _, _, sys2 = build_pipeline_system(7, 1, [1, 2, 0], ell_scale=2)
        _, st2 = solve_streaming(sys2, 1, with_stats=True)
        invariant = (
            st1.peak_retained == st2.peak_retained
            and st1.aux_retained == st2.aux_retained
        )
        _report(
            4,
            "streaming window",
            within and invariant,
            f"- peaks <= zeta+2 on all runs; ell {sys1.ell} vs {sys2.ell}: "
            f"peak {st1.peak_retained} both",
        )

    def test_criterion_05_multipoint(self):
        ctx, fam, sys = build_pipeline_system(7, 1, [1, 2, 0])
        m = fam.constants().m
        rng = random.Random(555)
        residues = [rng.randrange(7) for _ in range(8)]
        points = [teichmuller(ctx, r) for r in residues]
        vals = solve_multipoint(sys, points)
        poly = solve_full(sys)
        ok = all(
            v.congruent(poly.evaluate(pt), m) for v, pt in zip(vals, points)
        )
        _report(
            5,
            "multipoint",
            ok,
            f"- 8 Teichmueller points (residues {residues}) equal Horner mod 7^{m}",
        )

    def test_criterion_06_factorization(self):
        ctx, fam, sys = build_pipeline_system(7, 1, [1, 2, 0])
        c = fam.constants()
        ell_small = 200
        d = sys.d
        common = dict(alpha=c.alpha, gamma=c.gamma, delta=c.delta,
                      m=c.m, ell=ell_small, zeta=c.zeta, psi=c.psi)
        sysK = assemble_system(sys.A, sys.B, sys.X, sys.Y, sys.K0, **common)
        ident = MatPoly(ctx, d, [ScaledMatrix.identity(ctx, d)])
        zero = MatPoly.zero(ctx, d)
        I0 = ScaledMatrix.identity(ctx, d)
        sysC = assemble_system(sys.A, ident, zero, sys.Y, I0, **common)
        sysD = assemble_system(ident, sys.B, sys.X, zero, I0, **common)
        K = solve_full(sysK)
        C = solve_full(sysC)
        D = solve_full(sysD)
        K0poly = MatPoly(ctx, d, [sys.K0])
        prod = C.mul(K0poly).mul(D, truncate=ell_small)
        ok = prod.congruent(K, c.m - 2, upto=ell_small)
        _report(
            6,
            "factorization C K0 D",
            ok,
            f"- congruent mod (7^{c.m - 2}, Gamma^{ell_small})",
        )

    def test_criterion_07_precision_robustness(self):
        base = next(r for r in RESULTS["g1"] if r["curve"] == [1, 2, 0])
        res = compute_zeta(7, 1, [1, 2, 0], width_pad=10)
        same = res.numerator == base["numerator"] and res.counts == base["counts"]
        # a second family at padded precision (different p, g for coverage)
        res_g2 = compute_zeta(5, 1, RESULTS["g2"][0]["curve"], width_pad=10)
        same2 = res_g2.numerator == RESULTS["g2"][0]["numerator"]
        _report(
            7,
            "precision robustness",
            same and same2,
            "- +10 working digits changed nothing mod p^m; no lift window tripped",
        )

    def test_criterion_08_constants_regression(self):
        ok = True
        details = []
        ctx7 = make_context(7, 1, 20)
        c7 = build_family(ctx7, [1, 2, 0]).constants()
        ok &= (c7.m, c7.M, c7.ell, c7.epsilon) == (10, 171, 1751, 70)
        ok &= float(c7.alpha) == 3 and float(c7.gamma) == 1
        ok &= float(c7.delta) == 6 and float(c7.psi) == 36
        details.append(f"(1,1,7): m=10 M=171 ell=1751 eps=70")
        ctx5 = make_context(5, 1, 20)
        c5 = build_family(ctx5, [2, 1, 0, 1, 0]).constants()
        ok &= (c5.m, c5.M, c5.ell, c5.epsilon) == (19, 212, 3871, 249)
        details.append("(2,1,5): m=19 M=212 ell=3871 eps=249")
        ctx3 = make_context(3, 1, 20)
        fam3 = build_family(ctx3, deterministic_curves(3, 1, 3, 1, seed=99)[0])
        c3 = fam3.constants()
        ok &= (c3.m, c3.M, c3.ell, c3.epsilon) == (33, 211, 5539, 617)
        ok &= float(c3.alpha) == 18 and float(c3.gamma) == 9
        ok &= float(c3.delta) == 36 and float(c3.psi) == 216
        ok &= c3.zeta == max(4 * fam3.rho, 3 * fam3.rho + 25, 75 + fam3.rho)
        details.append("(3,1,3): m=33 M=211 ell=5539 eps=617")
        _report(8, "constants regression", bool(ok), "- " + "; ".join(details))

    def test_criterion_09_connection_matrix(self):
        ctx = make_context(7, 1, 20)
        fam = build_family(ctx, [2, 0, 0])  # x^3 + (Gamma + 1)
        H = connection_matrix(fam)
        pw = int(ctx.pW)
        inv2 = pow(2, -1, pw)
        pinned = H.degree == 1
        for e in range(2):
            M = H.coeff(e)
            pinned &= M.scale == 0
            pinned &= int(M.entries[0]) == (-9 * inv2) % pw
            pinned &= int(M.entries[3]) == (9 * inv2) % pw
            pinned &= int(M.entries[1]) == 0 and int(M.entries[2]) == 0
        bounds = True
        for p, g, seed in [(7, 1, 911), (5, 2, 922)]:
            for i in range(10):
                curve = deterministic_curves(p, 1, g, 1, seed=seed + i)[0]
                cx = make_context(p, 1, 24)
                fm = build_family(cx, curve)
                Hr = connection_matrix(fm)
                bounds &= Hr.degree <= 8 * g
                v = Hr.valuation()
                if v != math.inf:
                    bounds &= v * (p - 1) >= -10 * g
        _report(
            9,
            "connection matrix",
            pinned and bounds,
            "- pinned diag(-(9/2)(G+1), (9/2)(G+1)); 20 random families within "
            "deg <= 8g, ord >= -10g/(p-1)",
        )

    def test_criterion_10_weil_validation(self):
        ok = True
        for r in RESULTS["jobs"]:
            P, q, g = r["numerator"], r["q"], r["g"]
            ok &= P[0] == 1
            for i in range(g + 1):
                ok &= P[2 * g - i] == q ** (g - i) * P[i]
            for i, c in enumerate(P):
                ok &= c * c <= comb(2 * g, i) ** 2 * q ** i
            # independent Newton recomputation of the counts
            e = [((-1) ** j) * P[j] for j in range(len(P))]
            s = []
            for k in range(1, g + 2):
                acc = 0
                for j in range(1, min(k - 1, 2 * g) + 1):
                    acc += ((-1) ** (j - 1)) * e[j] * s[k - j - 1]
                if k <= 2 * g:
                    acc += ((-1) ** (k - 1)) * k * e[k]
                s.append(acc)
            counts = [q ** k + 1 - s[k - 1] for k in range(1, g + 2)]
            ok &= counts == r["counts"]
            n1 = counts[0]
            ok &= (n1 - q - 1) ** 2 <= 4 * g * g * q
        _report(
            10,
            "Weil validation",
            bool(ok),
            f"- {len(RESULTS['jobs'])} numerators: P(0)=1, functional equation, "
            "Weil windows, Hasse bound all exact",
        )
