"""Filtered modules in the (A, B) presentation and their base change to S.

Run with ``python demos/modules.py``.
"""

from bktower import (ClassicalBK, PDElement, PrecisionContext, SeriesElement,
                     apply_phi_breuil, apply_phi_M, base_change, classical_to_filtered,
                     fil_membership, fil_r_membership, random_filtered, validate)
from bktower.bk import random_classical
from bktower.linalg import column

ctx = PrecisionContext(5, (5, 0, 1), N=8, depth=3)

M = random_filtered(seed=7, d=2, r=3, ctx=ctx)
cert = validate(M)
print("random module, rank 2, height 3:", cert.status, cert.windows)

# Columns of A generate Fil^r; φ_M sends them to φ(E)^r times a basis vector.
alpha = column(M.matrix("A"), 0)
print("α_1 in Fil^3:", bool(fil_membership(M, alpha, 3)))
print("φ_M(α_1) =", apply_phi_M(M, alpha))

# A Kisin module with matrix C gives the same kind of presentation.
X = random_classical(seed=1, d=2, r=2, ctx=ctx)
F = classical_to_filtered(X)
print("Kisin module -> filtered module:", validate(F).status)
try:
    classical_to_filtered(ClassicalBK(ctx, 1, 1, [[SeriesElement.E(ctx) ** 2]]))
except Exception as exc:
    print("height check:", type(exc).__name__, exc)

# Over S the filtration is larger: anything in Fil^p S times the module joins Fil^r.
Mb = base_change(M)
v = [a.to_pd() + PDElement.gamma(ctx, 6, coeff=(1, 1)) for a in alpha]
dec = fil_r_membership(Mb, v)
print("α_1 + γ_6 in Fil^3 of the S-module:", dec.accepted)
phi_r = apply_phi_breuil(Mb, v, "phi_r")
print("divided Frobenius is integral:", all(a.den == 0 for a in phi_r))
