"""Walk through the rings of the Frobenius tower for p = 3, E = u + 3.

Run with ``python demos/ring_tower.py``.
"""

from bktower import (PDElement, PrecisionContext, SeriesElement, c0, decompose_keyA,
                     fil_degree, lambda_unit, z_element)

ctx = PrecisionContext(3, (3, 1), N=8, depth=3)
print("context:", ctx.as_dict(), "slot window:", ctx.fil_window_at(0))

# The integral rings are plain polynomials; Frobenius at level 0 is u -> u^3.
f = SeriesElement(ctx, [1, 2, 0, 5])
print("f        =", f)
print("φ(f)     =", f.frobenius())

# Moving up the tower renames u_0 as u_1^3; φ brings us back down.
up = f.include_up()
print("f at level 1:", up)
print("φ(φ^-1 f) == f:", f.frobenius_inverse().frobenius() == f)

# z_n = E(u_0)...E(u_{n-1}) reduces to a pure power of u mod p.
z2 = z_element(ctx, 2)
print("z_2 mod 3:", [c % 3 for c in z2.coeffs])

# Divided powers: E^3 / 3! is in S but not in 𝔖.
g3 = PDElement.gamma(ctx, 3)
print("γ_3(E) filtration degree:", fil_degree(g3))
print("γ_1 * γ_2 == 3 γ_3:", PDElement.gamma(ctx, 1) * PDElement.gamma(ctx, 2) == g3 * 3)
print("γ_3 in 𝔖 + Fil^4?", g3.in_frakS_plus_fil(4))

# c_0 = φ(E)/p is a unit of S and λ = c_0 φ(c_0) φ²(c_0) ... converges.
lam, terms = lambda_unit(ctx)
print("λ built from", terms, "factors; λ = c_0 φ(λ):", lam.agrees(c0(ctx) * lam.frobenius()))

# Frobenius of Fil^i lands in 𝔖 plus a deeper filtration step.
x = PDElement.gamma(ctx, 4, level=1, coeff=(2, 1, 1))
dec = decompose_keyA(x, 4)
print(f"φ(Fil^4 element) = 𝔖 part + Fil^{dec.y.fil_degree()} part (bound {dec.bound})")
