"""Quasi-Breuil modules over S, obtained from Breuil-Kisin modules by base change.

The presentation is shared with :class:`bktower.bk.FilteredBK`: 𝓜 = ⊕ S e_i
and Fil^r 𝓜 = ⊕ S α_i + Fil^p S · 𝓜.  Vectors are lists of ``PDElement``
coordinates at a common level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from . import linalg
from .bk import FilteredBK, validate
from .errors import NotInFil, NotInS
from .tower import PDElement, SeriesElement, c0

__all__ = [
    "BreuilModule",
    "FilRDecomposition",
    "base_change",
    "matrix_at",
    "fil_r_membership",
    "fil_i_membership",
    "apply_phi_breuil",
    "phi_r_direct",
]


@dataclass(frozen=True)
class BreuilModule:
    ctx: object
    d: int
    r: int
    A: tuple
    B: tuple
    semantics: str = "S"

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(row) for row in self.A))
        object.__setattr__(self, "B", tuple(tuple(row) for row in self.B))

    @property
    def source(self) -> FilteredBK:
        return FilteredBK(self.ctx, self.d, self.r, self.A, self.B)


def base_change(M: FilteredBK) -> BreuilModule:
    validate(M)
    return BreuilModule(M.ctx, M.d, M.r, M.A, M.B)


def _series_at(x: SeriesElement, level: int) -> SeriesElement:
    while x.level < level:
        x = x.include_up()
    return x


def matrix_at(M, which: str, level: int) -> list[list[SeriesElement]]:
    """A or B with entries written in the level-n variable."""
    X = M.A if which == "A" else M.B
    return [[_series_at(a, level) for a in row] for row in X]


def _as_pd(v, level: int, J: int | None, ctx) -> list[PDElement]:
    out = []
    for a in v:
        if isinstance(a, PDElement):
            out.append(a)
        elif isinstance(a, SeriesElement):
            out.append(a.to_pd(J))
        else:
            out.append(PDElement.const(ctx, int(a), level, J))
    return out


class FilRDecomposition(NamedTuple):
    accepted: bool
    x: list[SeriesElement] | None
    y: list[PDElement] | None

    def __bool__(self):
        return self.accepted


def fil_r_membership(M: BreuilModule, v: Sequence) -> FilRDecomposition:
    """Decide v ∈ Fil^r 𝓜 and split v = A x + y with x ∈ 𝔖^d, y ∈ (Fil^p S)^d.

    Steps: the slots below r give a 𝔖-vector v̄ with v - v̄ ∈ Fil^r; v lies in
    Fil^r 𝓜 exactly when B v̄ is divisible by E^r, and then v̄ = A (B v̄ / E^r).
    The slots r..p-1 are E^r q = A B q, and the slots from p on form y.
    """
    ctx, r, p = M.ctx, M.r, M.ctx.p
    v = _as_pd(v, 0, None, ctx)
    level = v[0].level
    if any(a.den for a in v):
        raise NotInS("fil_r_membership needs integral coordinates")
    low, mid, high = [], [], []
    for a in v:
        w, y = a.frakS_part(r)  # slots < r as a polynomial (unit factorials)
        wm, yh = y.frakS_part(p)  # slots r..p-1 as a polynomial divisible by E^r
        low.append(w)
        mid.append(wm)
        high.append(yh)
    B = matrix_at(M, "B", level)
    Bv = linalg.matvec(B, low)
    t = []
    for c in Bv:
        q, rem = c.divmod_E(r)
        if not rem.is_zero():
            return FilRDecomposition(False, None, None)
        t.append(q)
    qs = []
    for wm in mid:
        q, rem = wm.divmod_E(r)
        if not rem.is_zero():
            raise AssertionError("slots r..p-1 must be divisible by E^r")
        qs.append(q)
    Bq = linalg.matvec(B, qs)
    x = [a + b for a, b in zip(t, Bq)]
    return FilRDecomposition(True, x, high)


def fil_i_membership(M: BreuilModule, v: Sequence, i: int) -> FilRDecomposition:
    """Decide v ∈ Fil^i 𝓜, i.e. E^{r-i} v ∈ Fil^r 𝓜."""
    if not 0 <= i <= M.r:
        raise ValueError(f"filtration index {i} outside 0..{M.r}")
    v = _as_pd(v, 0, None, M.ctx)
    level = v[0].level
    E = SeriesElement.E(M.ctx, level).to_pd(v[0].J)
    Ek = PDElement.one(M.ctx, level, v[0].J)
    for _ in range(M.r - i):
        Ek = Ek * E
    return fil_r_membership(M, [Ek * a for a in v])


def _phi_matrix(M, which: str, level: int, J: int) -> list[list[PDElement]]:
    X = matrix_at(M, which, level)
    return [[a.frobenius().to_pd(J) for a in row] for row in X]


def apply_phi_breuil(M: BreuilModule, v: Sequence, mode: str = "phi",
                     J_out: int | None = None) -> list[PDElement]:
    """φ_𝓜 (mode ``phi``) or φ_{𝓜,r} (mode ``phi_r``) in e-coordinates.

    φ_𝓜 has matrix φ(B).  On Fil^r 𝓜 = A x + y the divided Frobenius is
    c_0^r φ(x) + φ(B) φ(y) / p^r, using φ_{𝓜,r}(α_i) = c_0^r e_i.
    """
    ctx = M.ctx
    v = _as_pd(v, 0, None, ctx)
    level = v[0].level
    t = max(level - 1, 0)
    J_out = ctx.fil_window_at(t) if J_out is None else J_out
    phiB = _phi_matrix(M, "B", level, J_out)
    if mode == "phi":
        return linalg.matvec(phiB, [a.frobenius(J_out) for a in v])
    if mode != "phi_r":
        raise ValueError(f"unknown mode {mode!r}")
    dec = fil_r_membership(M, v)
    if not dec:
        raise NotInFil("vector is not in Fil^r of the module")
    cr = c0(ctx, t, J_out) ** M.r
    first = [cr * a.frobenius().to_pd(J_out) for a in dec.x]
    second = linalg.matvec(phiB, [a.frobenius(J_out).scale_p(-M.r) for a in dec.y])
    return [a + b for a, b in zip(first, second)]


def phi_r_direct(M: BreuilModule, v: Sequence, J_out: int | None = None) -> list[PDElement]:
    """p^{-r} φ_𝓜(v), computed in S[1/p] without the decomposition."""
    return [a.scale_p(-M.r) for a in apply_phi_breuil(M, v, "phi", J_out)]
