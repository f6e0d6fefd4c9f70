"""Filtered Breuil-Kisin modules in the (A, B) presentation.

A module of rank d and height r is M = ⊕ 𝔖 e_i with Fil^r M spanned by the
columns α = e·A and φ_{M,r}(α_i) = e_i.  The companion matrix B satisfies
AB = BA = E^r, so the linearized Frobenius of M has matrix φ(B).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from . import linalg
from .certificate import Certificate
from .errors import HeightExceeded, InvalidModule
from .precision import PrecisionContext
from .tower import SeriesElement, weierstrass_divide

__all__ = [
    "FilteredBK",
    "ClassicalBK",
    "MembershipResult",
    "validate",
    "validate_classical",
    "classical_to_filtered",
    "filtered_to_classical",
    "fil_membership",
    "apply_phi_M",
    "random_filtered",
    "random_classical",
    "mu_p_infinity",
    "qp_zp",
]


@dataclass(frozen=True)
class FilteredBK:
    ctx: PrecisionContext
    d: int
    r: int
    A: tuple
    B: tuple

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(row) for row in self.A))
        object.__setattr__(self, "B", tuple(tuple(row) for row in self.B))

    def zero(self) -> SeriesElement:
        return SeriesElement.zero(self.ctx, 0)

    def one(self) -> SeriesElement:
        return SeriesElement.one(self.ctx, 0)

    def Er(self) -> SeriesElement:
        return SeriesElement.E(self.ctx, 0) ** self.r

    def matrix(self, which: str) -> list[list[SeriesElement]]:
        return [list(row) for row in (self.A if which == "A" else self.B)]


@dataclass(frozen=True)
class ClassicalBK:
    """A Kisin module: 𝔐 free with φ_𝔐 given by the matrix C."""

    ctx: PrecisionContext
    d: int
    r: int
    C: tuple

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(tuple(row) for row in self.C))


def _series(ctx, x) -> SeriesElement:
    if isinstance(x, SeriesElement):
        return x
    if isinstance(x, int):
        return SeriesElement.const(ctx, x, 0)
    return SeriesElement(ctx, list(x), 0)


def mu_p_infinity(ctx: PrecisionContext) -> FilteredBK:
    """Rank one, r = 1, Fil^1 M = M: A = (1), B = (E)."""
    return FilteredBK(ctx, 1, 1, [[SeriesElement.one(ctx)]], [[SeriesElement.E(ctx)]])


def qp_zp(ctx: PrecisionContext) -> FilteredBK:
    """Rank one, r = 1, Fil^1 M = E M: A = (E), B = (1)."""
    return FilteredBK(ctx, 1, 1, [[SeriesElement.E(ctx)]], [[SeriesElement.one(ctx)]])


def validate(M: FilteredBK, raise_on_fail: bool = True) -> Certificate:
    ctx = M.ctx
    cert = Certificate("validate")
    cert.add("height", 0 <= M.r < ctx.p - 1, f"r={M.r}, p={ctx.p}")
    shapes = (len(M.A) == M.d and len(M.B) == M.d
              and all(len(row) == M.d for row in M.A + M.B))
    cert.add("shape", shapes)
    if shapes:
        integral = all(isinstance(a, SeriesElement) and a.level == 0
                       for row in M.A + M.B for a in row)
        cert.add("integral", integral)
        if integral:
            Er = M.Er()
            target = linalg.identity(M.d, Er, M.zero())
            AB = linalg.matmul(M.matrix("A"), M.matrix("B"))
            BA = linalg.matmul(M.matrix("B"), M.matrix("A"))
            cert.add("AB=E^r", linalg.is_zero_matrix(linalg.sub(AB, target)))
            cert.add("BA=E^r", linalg.is_zero_matrix(linalg.sub(BA, target)))
            precs = [a.prec for row in M.A + M.B for a in row]
            uprecs = [a.uprec for row in M.A + M.B for a in row if a.uprec is not None]
            cert.windows = {"p_digits": min(precs), "u_terms": min(uprecs) if uprecs else None}
    if raise_on_fail and not cert.ok:
        failed = cert.first_failure()
        raise InvalidModule(f"module fails {failed['check']}")
    return cert


def validate_classical(X: ClassicalBK) -> Certificate:
    cert = Certificate("validate_classical")
    try:
        classical_to_filtered(X)
        cert.add("height<=r", True)
    except HeightExceeded as exc:
        cert.add("height<=r", False, str(exc))
    return cert


def classical_to_filtered(X: ClassicalBK) -> FilteredBK:
    """(A, B) = (E^r C^{-1}, C), computed as adj(C) E^r / det(C)."""
    ctx, r, d = X.ctx, X.r, X.d
    C = [[_series(ctx, a) for a in row] for row in X.C]
    det = linalg.det(C)
    if det.is_zero():
        raise HeightExceeded("det C vanishes")
    m = 0
    while True:
        res = weierstrass_divide(det, 1)
        if not res.ok:
            break
        det = res.quotient
        m += 1
    if det.constant_term() % ctx.p == 0:
        raise HeightExceeded("det C has a non-unit factor prime to E")
    inv = det.inverse() if len(det.coeffs) > 1 else SeriesElement.const(
        ctx, pow(det.constant_term(), -1, det.mod))
    adj = linalg.adjugate(C, SeriesElement.one(ctx))
    E = SeriesElement.E(ctx)
    A = []
    for row in adj:
        out = []
        for a in row:
            if r >= m:
                a = a * E ** (r - m)
            else:
                res = weierstrass_divide(a, m - r)
                if not res.ok:
                    raise HeightExceeded(f"E^{r} C^-1 is not integral (needs E^{m - r} more)")
                a = res.quotient
            out.append(a * inv)
        A.append(out)
    return FilteredBK(ctx, d, r, A, C)


def filtered_to_classical(M: FilteredBK) -> ClassicalBK:
    validate(M)
    return ClassicalBK(M.ctx, M.d, M.r, M.B)


class MembershipResult(NamedTuple):
    member: bool
    witness: list | None

    def __bool__(self):
        return self.member


def fil_membership(M: FilteredBK, v: Sequence[SeriesElement], i: int) -> MembershipResult:
    """Decide (e)·v ∈ Fil^i M.

    The witness x satisfies E^{r-i} v = A x, so at i = r it is the
    α-coordinate vector of v.
    """
    if not 0 <= i <= M.r:
        raise ValueError(f"filtration index {i} outside 0..{M.r}")
    v = [_series(M.ctx, a) for a in v]
    Bv = linalg.matvec(M.matrix("B"), v)
    witness = []
    for c in Bv:
        res = weierstrass_divide(c, i)
        if not res.ok:
            return MembershipResult(False, None)
        witness.append(res.quotient)
    return MembershipResult(True, witness)


def apply_phi_M(M: FilteredBK, v: Sequence[SeriesElement]) -> list[SeriesElement]:
    """Coordinates of φ_M((e)·v), namely φ(B)·φ(v)."""
    v = [_series(M.ctx, a).frobenius() for a in v]
    phiB = linalg.entrywise(M.matrix("B"), lambda a: a.frobenius())
    return linalg.matvec(phiB, v)


def _random_poly(rng: random.Random, ctx: PrecisionContext, degree: int) -> SeriesElement:
    return SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(degree + 1)], 0)


def _random_invertible(rng, ctx, d, degree, lower: bool):
    """(T, T^{-1}) with T = unitriangular * permutation (or its transpose shape)."""
    one, zero = SeriesElement.one(ctx), SeriesElement.zero(ctx)
    tri = linalg.identity(d, one, zero)
    for i in range(d):
        for j in range(d):
            if (lower and i > j) or (not lower and i < j):
                tri[i][j] = _random_poly(rng, ctx, degree)
    tri_inv = linalg.unitriangular_inverse(tri, lower, one, zero)
    perm = list(range(d))
    rng.shuffle(perm)
    P = linalg.permutation_matrix(perm, one, zero)
    Pinv = linalg.transpose(P)
    if lower:
        return linalg.matmul(P, tri), linalg.matmul(tri_inv, Pinv)
    return linalg.matmul(tri, P), linalg.matmul(Pinv, tri_inv)


def _random_factors(ctx, seed, d, r, exponents, degree):
    rng = random.Random(seed)
    if exponents is None:
        exponents = [rng.randint(0, r) for _ in range(d)]
    if len(exponents) != d or any(not 0 <= a <= r for a in exponents):
        raise ValueError("exponents must be d integers in 0..r")
    U, Uinv = _random_invertible(rng, ctx, d, degree, lower=True)
    V, Vinv = _random_invertible(rng, ctx, d, degree, lower=False)
    return exponents, U, Uinv, V, Vinv


def _diag(ctx, d, exps):
    E = SeriesElement.E(ctx)
    D = linalg.identity(d, SeriesElement.one(ctx), SeriesElement.zero(ctx))
    for i, a in enumerate(exps):
        D[i][i] = E ** a
    return D


def random_filtered(seed: int, d: int, r: int, ctx: PrecisionContext,
                    exponents: Sequence[int] | None = None, degree: int = 2) -> FilteredBK:
    """Seeded module with A = U diag(E^a) V and B = V^-1 diag(E^{r-a}) U^-1."""
    ctx.check_height(r)
    exps, U, Uinv, V, Vinv = _random_factors(ctx, seed, d, r, exponents, degree)
    A = linalg.matmul(linalg.matmul(U, _diag(ctx, d, exps)), V)
    B = linalg.matmul(linalg.matmul(Vinv, _diag(ctx, d, [r - a for a in exps])), Uinv)
    return FilteredBK(ctx, d, r, A, B)


def random_classical(seed: int, d: int, r: int, ctx: PrecisionContext,
                     exponents: Sequence[int] | None = None, degree: int = 2) -> ClassicalBK:
    """Seeded Kisin module with C = U diag(E^a) V."""
    ctx.check_height(r)
    exps, U, _, V, _ = _random_factors(ctx, seed, d, r, exponents, degree)
    C = linalg.matmul(linalg.matmul(U, _diag(ctx, d, exps)), V)
    return ClassicalBK(ctx, d, r, C)
