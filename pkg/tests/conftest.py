"""Shared test helpers: exact-rational bridges and deterministic curves."""

import random
from fractions import Fraction

import pytest

from hyperzeta.exactmath import split_unit
from hyperzeta.padic import ScaledElement


def scaled_from_fraction(ctx, fr):
    """Exact rational (p-denominator allowed) as a ScaledElement."""
    fr = Fraction(fr)
    num, den = fr.numerator, fr.denominator
    w, unit = split_unit(den, ctx.p) if den != 1 else (0, 1)
    mant = (num * pow(unit, -1, int(ctx.pW))) % int(ctx.pW)
    return ScaledElement(ctx, ctx.from_int(mant), w)


def assert_matches_fractions(ctx, mat, fmat, precision):
    """ScaledMatrix entries congruent mod p^precision to Fraction matrix."""
    d = mat.d
    for i in range(d):
        for j in range(d):
            want = scaled_from_fraction(ctx, fmat[i][j])
            got = mat.entry(i, j)
            assert got.congruent(want, precision), (i, j, got, fmat[i][j])


def squarefree_residues(p, n, coeffs, field=None):
    """Squarefree test of the monic odd-degree polynomial over F_{p^n},
    done with plain polynomial arithmetic (independent of the package
    residue helpers where convenient)."""
    from hyperzeta.padic import make_context
    from hyperzeta.deformation import _poly_gcd_is_trivial

    ctx = make_context(p, n, 2)
    res = []
    for c in coeffs:
        if isinstance(c, int):
            res.append((c % p,) + (0,) * (n - 1))
        else:
            res.append(tuple(x % p for x in c))
    res.append((1,) + (0,) * (n - 1))
    return _poly_gcd_is_trivial(ctx, res)


def deterministic_curves(p, n, g, count, seed):
    """Deterministic list of squarefree curves (low-coefficient tuples)."""
    rng = random.Random(seed)
    out = []
    seen = set()
    while len(out) < count:
        if n == 1:
            cand = tuple(rng.randrange(p) for _ in range(2 * g + 1))
        else:
            cand = tuple(
                tuple(rng.randrange(p) for _ in range(n)) for _ in range(2 * g + 1)
            )
        if cand in seen:
            continue
        seen.add(cand)
        if squarefree_residues(p, n, list(cand)):
            out.append(list(cand))
    return out


@pytest.fixture(scope="session")
def rng():
    return random.Random(20240811)
