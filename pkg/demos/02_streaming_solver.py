"""The streaming solver on a hand-checkable system.

K' = p K with K(0) = 1 has the explicit solution K(Gamma) =
exp(p Gamma) = sum p^k Gamma^k / k!; the recursion reproduces its
coefficients digit-for-digit, and evaluating at Gamma = 1 with the
streaming accumulator retains only a tiny window of coefficients no
matter how long the series is.
"""

import math
from fractions import Fraction

from hyperzeta import make_context
from hyperzeta.odesolver import (
    MatPoly,
    ScaledMatrix,
    assemble_system,
    required_width,
    solve_full,
    solve_streaming,
)

p, m, ell = 5, 6, 40
ctx = make_context(p, 1, required_width(p, m=m, ell=ell))

one = MatPoly.from_scalar_coeffs(ctx, 1, [ctx.from_int(1)])
X = MatPoly.from_scalar_coeffs(ctx, 1, [ctx.from_int(-p)])  # A K' B + A K X = 0
system = assemble_system(one, one, X, MatPoly.zero(ctx, 1),
                         ScaledMatrix.from_rows(ctx, [[1]]), m=m, ell=ell)

poly = solve_full(system)
print("coefficients of K(Gamma) = exp(p Gamma), checked against p^k/k!:")
for k in (0, 1, 2, 3, 7):
    got = poly.coeff(k).entry(0, 0)
    fr = Fraction(p ** k, math.factorial(k))
    print(f"  K_{k} = {got}   (exact value {fr})")
print()

value, stats = solve_streaming(system, 1, with_stats=True)
print(f"K(1) mod {p}^{m} via the streaming accumulator: {value.entry(0, 0)}")
print(f"stats: {stats}")
print()

# the defining memory property: padding the series length does not grow
# the retained window
long_system = assemble_system(one, one, X, MatPoly.zero(ctx, 1),
                              ScaledMatrix.from_rows(ctx, [[1]]), m=m, ell=4 * ell)
_, long_stats = solve_streaming(long_system, 1, with_stats=True)
print(f"ell = {ell:4d}: peak retained matrices = {stats.peak_retained}")
print(f"ell = {4*ell:4d}: peak retained matrices = {long_stats.peak_retained}")
print("window is length-independent:", stats.peak_retained == long_stats.peak_retained)
