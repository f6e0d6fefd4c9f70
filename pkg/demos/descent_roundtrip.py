"""From a module to chains over the tower and back again.

Run with ``python demos/descent_roundtrip.py``.
"""

from bktower import (Chain, ChainElement, Incompatible, PrecisionContext, SeriesElement,
                     base_change, check_compat, descend, generator_chain, random_filtered,
                     recover_filtered)
from bktower.limit import chain_from_vector, lift

ctx = PrecisionContext(5, (5, 1), N=8, depth=3)
M = base_change(random_filtered(seed=3, d=2, r=3, ctx=ctx))

# Each basis vector gives a compatible chain; lifting one level reproduces the next entry.
chain = generator_chain(M, 1, depth=3)
print("generator chain compatible:", check_compat(chain).status)
print("lift(w_0) == w_1:", lift(M, list(chain.at(0))) == list(chain.at(1)))

# Descent reads the bottom coefficients back off the chain.
g = [SeriesElement(ctx, [4, 1, 7]), SeriesElement(ctx, [0, 5, 0, 2])]
res = descend(chain_from_vector(M, g, 3))
print("descended g matches:", all((a - b).is_zero() for a, b in zip(res.g, g)))
print("residual filtration", res.residual_fil, ">= bound", res.bound)

# A one-digit fault at level 2 is caught.
elems = list(chain.elems)
w = list(elems[2].w)
w[0] = w[0] + SeriesElement(ctx, [0, 5 ** 7], 2)
elems[2] = ChainElement(2, w)
try:
    descend(Chain(M, 3, elems))
except Incompatible as exc:
    print("tampered chain:", exc, "(level", exc.level, ")")

# The whole module comes back from its chains.
out, cert = recover_filtered(M, depth=3, seed=0)
print("recovered (A, B) equal to the original:", out.A == M.A and out.B == M.B, cert.status)
