"""Tour of the fixed-precision p-adic layer.

Z_{p^n}/p^W elements are coefficient vectors in the power basis of a
deterministic irreducible modulus; everything below is exact arithmetic
on those vectors -- no floats anywhere.
"""

from hyperzeta import make_context, teichmuller, frobenius, invert, valuation
from hyperzeta.padic import ScaledElement, ZqElement

# Q_49 = Q_7(i), working modulo 7^12
ctx = make_context(7, 2, 12)
print(f"context: {ctx}")
print(f"modulus phi(t) coefficients (ascending): {ctx.phi}")
print()

x = ZqElement.from_coeffs(ctx, [3, 5])  # 3 + 5t
print(f"x           = {x}")
print(f"x^-1        = {invert(x)}")
print(f"x * x^-1    = {x * invert(x)}")
print()

# Frobenius: the unique automorphism lifting c -> c^7
print(f"sigma(x)    = {frobenius(x)}")
print(f"sigma^2(x)  = {frobenius(frobenius(x))}   (= x: sigma has order n)")
print()

# Teichmueller lift: the root of unity over each residue
t = teichmuller(ctx, [2, 3])
print(f"teich(2+3t) = {t}")
print(f"  reduces correctly: {t.residue() == (2, 3)}")
print(f"  is a (q-1)-st root of unity: {t ** (49 - 1) == 1}")
print(f"  sigma(teich(r)) = teich(r^p): {frobenius(t) == teichmuller(ctx, ctx.res_pow((2, 3), 7))}")
print()

# negative valuations live in ScaledElement: mantissa * p^-scale
y = ScaledElement(ctx, ctx.from_int(21), 2)  # 21/49 = 3/7
print(f"y = 21 * 7^-2, valuation {valuation(y)} (= ord(3/7))")
print(f"normalized to minimal scale: {y.normalized()}")
