"""Frobenius-compatible chains and the descent back to a Breuil-Kisin module.

A chain element at level n is stored by its e-coordinates w_n, meaning
ξ_n = z_n^{-r} (e)·w_n in 𝓜 ⊗ S_n[1/z_n].  Compatibility
(φ_𝓜 ⊗ φ)(ξ_n) = ξ_{n-1} becomes

    φ(B) φ(w_n) = φ(E)^r w_{n-1}.

For the chain of (e)·g with g ∈ 𝔖^d one has w_n = A φ^{-1}(A) ⋯ φ^{1-n}(A) g(u_n),
so t_n = B w_n / E^r satisfies t_{n-1} = B φ(t_n) / E^r and g = φ(t_1).  The
descent runs this recurrence on s_n = p t_n, keeping at every level an
exact polynomial part and a divided-power residual whose filtration degree
grows along the contraction sequence.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from . import _poly, linalg
from .bk import FilteredBK, fil_membership, validate
from .breuil import BreuilModule, matrix_at
from .certificate import INCONCLUSIVE, PASS, Certificate
from .errors import DepthExceeded, DescentInconclusive, Incompatible, NotInFil
from .precision import contraction_bound, contraction_sequence
from .tower import PDElement, SeriesElement, decompose_keyA, phi_E

__all__ = [
    "ChainElement",
    "Chain",
    "DescentResult",
    "generator_chain",
    "filr_generator_chain",
    "chain_from_vector",
    "act",
    "add_chains",
    "chain_to_pd",
    "lift",
    "check_compat",
    "descend",
    "recover_filtered",
    "keyc_bound",
    "limit_ring_chain",
    "limit_ring_roundtrip",
    "limit_ring_obstruction",
]


@dataclass(frozen=True)
class ChainElement:
    n: int
    w: tuple

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(self.w))


@dataclass(frozen=True)
class Chain:
    module: BreuilModule
    depth: int
    elems: tuple

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(self.elems))

    def at(self, n: int) -> tuple:
        return self.elems[n].w

    @property
    def exact(self) -> bool:
        return all(isinstance(a, SeriesElement) for el in self.elems for a in el.w)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _check_depth(M, depth: int):
    if depth > M.ctx.depth:
        raise DepthExceeded(f"depth {depth} exceeds context depth {M.ctx.depth}")
    if depth < 0:
        raise DepthExceeded("depth must be nonnegative")


def _rename_up(x: SeriesElement, levels: int) -> SeriesElement:
    """φ^{-k}: the same coefficients in the variable k levels up."""
    return SeriesElement(x.ctx, x.coeffs, x.level + levels, x.prec, x.uprec)


def _frob_power_product(M, n: int) -> list[list[SeriesElement]]:
    """P_n = A φ^{-1}(A) ⋯ φ^{1-n}(A) written at level n."""
    ctx = M.ctx
    P = linalg.identity(M.d, SeriesElement.one(ctx, n), SeriesElement.zero(ctx, n))
    for k in range(n):
        # φ^{-k}(A) at level n is A(u_k) = A(u_n^{p^{n-k}})
        Ak = [[_rename_up(a, k) for a in row] for row in M.A]
        Ak = [[_include(a, n) for a in row] for row in Ak]
        P = linalg.matmul(P, Ak)
    return P


def _include(x: SeriesElement, level: int) -> SeriesElement:
    while x.level < level:
        x = x.include_up()
    return x


def chain_from_vector(M: BreuilModule, g: Sequence[SeriesElement], depth: int) -> Chain:
    """The chain of (e)·g for g ∈ 𝔖^d: w_n = P_n g(u_n)."""
    _check_depth(M, depth)
    ctx = M.ctx
    g = [a if isinstance(a, SeriesElement) else SeriesElement.const(ctx, int(a)) for a in g]
    elems = []
    for n in range(depth + 1):
        P = _frob_power_product(M, n)
        gn = [_rename_up(a, n) for a in g]
        elems.append(ChainElement(n, linalg.matvec(P, gn)))
    return Chain(M, depth, elems)


def generator_chain(M: BreuilModule, i: int, depth: int) -> Chain:
    """Chain of e_i (1-based index i), w_n = P_n δ_i."""
    if not 1 <= i <= M.d:
        raise ValueError(f"generator index {i} outside 1..{M.d}")
    ctx = M.ctx
    delta = [SeriesElement.const(ctx, int(k == i - 1)) for k in range(M.d)]
    return chain_from_vector(M, delta, depth)


def filr_generator_chain(M: BreuilModule, x: Sequence[SeriesElement], depth: int) -> Chain:
    """Chain with ν_0 = A x ∈ Fil^r 𝓜 and ν_n = P_n A(u_n) x(u_n)."""
    ctx = M.ctx
    x = [a if isinstance(a, SeriesElement) else SeriesElement.const(ctx, int(a)) for a in x]
    return chain_from_vector(M, linalg.matvec([list(row) for row in M.A], x), depth)


def act(g: SeriesElement, c: Chain) -> Chain:
    """𝔖-action g·{ξ_n} = {φ^{-n}(g) ξ_n}."""
    elems = []
    for el in c.elems:
        gn = _rename_up(g, el.n)
        elems.append(ChainElement(el.n, [_scale(gn, a) for a in el.w]))
    return Chain(c.module, c.depth, elems)


def _scale(g: SeriesElement, a):
    if isinstance(a, PDElement):
        return g.to_pd(a.J) * a
    return g * a


def chain_to_pd(c: Chain) -> Chain:
    """The same chain with every coordinate in divided-power form."""
    ctx = c.module.ctx
    elems = [ChainElement(el.n, _pd_vec(el.w, ctx.fil_window_at(el.n))) for el in c.elems]
    return Chain(c.module, c.depth, elems)


def add_chains(c1: Chain, c2: Chain) -> Chain:
    depth = min(c1.depth, c2.depth)
    elems = [ChainElement(n, [a + b for a, b in zip(c1.at(n), c2.at(n))])
             for n in range(depth + 1)]
    return Chain(c1.module, depth, elems)


def lift(M, w: Sequence[SeriesElement]) -> list[SeriesElement]:
    """Unique lift of z_n^{-r} (e) w from level n to level n+1: A φ^{-1}(w)."""
    n = w[0].level
    if n + 1 > M.ctx.depth:
        raise DepthExceeded(f"level {n + 1} exceeds depth {M.ctx.depth}")
    A = matrix_at(M, "A", n + 1)
    return linalg.matvec(A, [a.frobenius_inverse() for a in w])


def push_down(M, w: Sequence[SeriesElement]) -> list[SeriesElement]:
    """(φ_𝓜 ⊗ φ) in e-coordinates: φ(B) φ(w) / φ(E)^r, exact on 𝔖-vectors."""
    n = w[0].level
    phiB = [[a.frobenius() for a in row] for row in matrix_at(M, "B", n)]
    v = linalg.matvec(phiB, [a.frobenius() for a in w])
    pe = phi_E(M.ctx, max(n - 1, 0)) ** M.r
    out = []
    for a in v:
        q, rem = _poly.divmod_monic(a.coeffs, len(pe.coeffs) - 1,
                                    [(k, c) for k, c in enumerate(pe.coeffs[:-1]) if c], a.mod)
        if any(rem):
            raise Incompatible("vector does not push down to an integral element", level=n)
        out.append(SeriesElement(M.ctx, q, a.level, a.prec))
    return out


# ---------------------------------------------------------------------------
# compatibility
# ---------------------------------------------------------------------------


def _pd_vec(w, J: int) -> list[PDElement]:
    return [a if isinstance(a, PDElement) else a.to_pd(J) for a in w]


def _window(ctx, n: int) -> int:
    return ctx.fil_window_at(n)


def check_compat(c: Chain, raise_on_fail: bool = True) -> Certificate:
    """Verify φ(B) φ(w_n) = φ(E)^r w_{n-1} for n = 1..depth."""
    M, ctx = c.module, c.module.ctx
    cert = Certificate("check_compat")
    for n in range(1, c.depth + 1):
        hi, lo = c.at(n), c.at(n - 1)
        if all(isinstance(a, SeriesElement) for a in hi + lo):
            B = matrix_at(M, "B", n)
            phiB = [[a.frobenius() for a in row] for row in B]
            rhs = linalg.matvec(phiB, [a.frobenius() for a in hi])
            pe = phi_E(ctx, n - 1) ** M.r
            lhs = [pe * a for a in lo]
            res = [a - b for a, b in zip(lhs, rhs)]
            window = {"level": n, "p_digits": min(a.prec for a in res), "slots": "exact"}
        else:
            J = _window(ctx, n - 1)
            B = matrix_at(M, "B", n)
            phiB = [[a.frobenius().to_pd(J) for a in row] for row in B]
            rhs = linalg.matvec(phiB, [a.frobenius(J) for a in _pd_vec(hi, _window(ctx, n))])
            pe = phi_E(ctx, n - 1).to_pd(J) ** M.r
            lhs = [pe * a for a in _pd_vec(lo, J)]
            res = [a - b for a, b in zip(lhs, rhs)]
            window = {"level": n, "p_digits": min(a.prec for a in res), "slots": J}
        ok = all(a.is_zero() for a in res)
        cert.add(f"level {n}", ok, window)
        cert.windows[f"level_{n}"] = window
        if not ok and raise_on_fail:
            raise Incompatible(f"chain is not φ-compatible at level {n}", level=n,
                               residual=[a for a in res if not a.is_zero()])
    return cert


# ---------------------------------------------------------------------------
# descent
# ---------------------------------------------------------------------------


class DescentResult(NamedTuple):
    g: list[SeriesElement]
    residual_fil: int | float
    bound: int
    certificate: Certificate


def keyc_bound(p: int, r: int, n: int) -> int:
    """i_n = p (p^n - r (p^n - 1)/(p - 1)): the mod-p divisibility exponent."""
    return p * (p ** n - r * (p ** n - 1) // (p - 1))


def _s_vector(M, w, n: int) -> list[PDElement]:
    """s_n = p B w_n / E^r in divided-power coordinates."""
    ctx = M.ctx
    J = _window(ctx, n)
    wpd = _pd_vec(w, J)
    B = [[a.to_pd(J) for a in row] for row in matrix_at(M, "B", n)]
    Bw = linalg.matvec(B, wpd)
    out = []
    for a in Bw:
        if a.fil_degree() < M.r:
            raise Incompatible(f"B w_{n} is not in Fil^{M.r}", level=n, residual=a)
        out.append(a.divide_E_power(M.r).scale_p(1))
    return out


def descend(c: Chain, check: bool = True) -> DescentResult:
    """Recover g ∈ 𝔖^d with ξ_0 = (e)·g from a compatible chain."""
    M, ctx, p, r = c.module, c.module.ctx, c.module.ctx.p, c.module.r
    if check:
        compat = check_compat(c)
    else:
        compat = Certificate("check_compat")
    if c.depth < 1:
        raise DescentInconclusive("descent needs depth >= 1")
    cert = Certificate("descend")
    cert.checks.extend(compat.checks)
    keyb = contraction_sequence("keyb", p, r, c.depth)

    # find the top level whose s_n is integral
    top = c.depth
    s_top = None
    while top >= 1:
        s_top = _s_vector(M, c.at(top), top)
        if all(a.den == 0 for a in s_top):
            break
        top -= 1
    if top < 1:
        raise DescentInconclusive("no level with integral p B w_n / E^r")
    cert.windows["top_level"] = top

    sigma, rho = [], []
    for a in s_top:
        w, y = a.frakS_part(p)
        sigma.append(w)
        rho.append(y)
    j = p
    steps = []
    realized = math.inf
    for n in range(top, 1, -1):
        t = n - 1
        J_t = _window(ctx, t)
        phis = []
        for sg, rh in zip(sigma, rho):
            base = sg.frobenius()
            if not rh.is_zero():
                base = base + decompose_keyA(rh, j, J_out=J_t).w
            phis.append(base)
        B = matrix_at(M, "B", t)
        W = linalg.matvec(B, phis)
        new_sigma = []
        for lvl_val in W:
            q, rem = lvl_val.divmod_E(r)
            if not rem.is_zero():
                raise Incompatible(f"division by E^{r} fails at level {t}", level=t,
                                   residual=rem)
            new_sigma.append(q)
        s_t = _s_vector(M, c.at(t), t)
        bound = p * contraction_bound(j, p) - r
        new_rho = []
        for st, sg in zip(s_t, new_sigma):
            diff = st - sg.to_pd(st.J)
            fd = diff.fil_degree()
            if fd < min(bound, diff.J):
                raise Incompatible(f"residual at level {t} has filtration {fd} < {bound}",
                                   level=t, residual=diff)
            if diff.den and not diff.is_zero():
                raise DescentInconclusive(f"fractional residual at level {t}")
            new_rho.append(diff.with_window(diff.J) if diff.den == 0 else
                           PDElement.zero(ctx, t, diff.J))
        sigma, rho, j = new_sigma, new_rho, bound
        realized = min((a.fil_degree() for a in rho), default=math.inf)
        steps.append({"level": t, "bound": bound, "realized": _json_num(realized),
                      "p_digits": min(a.prec for a in sigma)})
    cert.windows["steps"] = steps

    # level 1 -> 0 with the mod-p integrality check
    G = []
    for sg, rh in zip(sigma, rho):
        base = sg.frobenius()
        if not rh.is_zero():
            base = base + decompose_keyA(rh, j, J_out=_window(ctx, 0)).w
        G.append(base)
    final_fil = p * contraction_bound(j, p)
    need = ctx.e * min(final_fil, keyc_bound(p, r, top))
    g = []
    keyc_ok = True
    first_bad = math.inf
    for a in G:
        bad = next((k for k, cf in enumerate(a.coeffs) if cf % p), math.inf)
        first_bad = min(first_bad, bad)
        if bad < need:
            keyc_ok = False
            break
        coeffs = [cf // p for cf in a.coeffs[:bad]] if bad < math.inf else \
            [cf // p for cf in a.coeffs]
        uprec = None if bad is math.inf else bad
        g.append(SeriesElement(ctx, coeffs, 0, a.prec - 1, uprec))
    cert.add("level-1 coefficients divisible by p", keyc_ok,
             {"first_unit_coeff": _json_num(first_bad), "required": need})
    if not keyc_ok:
        raise Incompatible("level-1 coefficients are not divisible by p", level=1)
    residual_bound = keyb[min(top, len(keyb)) - 1]
    realized_fil = realized if top > 1 else math.inf
    residual = max(residual_bound, realized_fil)
    digits = min(a.prec for a in g) if g else ctx.N
    cert.windows.update({"residual_bound": residual_bound,
                         "residual_realized": _json_num(realized_fil),
                         "p_digits": digits})
    if digits < ctx.N - 2:
        cert.add("p-adic window", INCONCLUSIVE, {"p_digits": digits, "required": ctx.N - 2})
    else:
        cert.add("p-adic window", PASS, {"p_digits": digits})
    return DescentResult(g, residual, residual_bound, cert)


def _json_num(x):
    return "inf" if x is math.inf else x


# ---------------------------------------------------------------------------
# recovery of the Breuil-Kisin module
# ---------------------------------------------------------------------------


def _series_agree(a: SeriesElement, b: SeriesElement) -> bool:
    return (a - b).is_zero()


def recover_filtered(M: BreuilModule, depth: int | None = None, seed: int = 0,
                     combos: int = 1) -> tuple[FilteredBK, Certificate]:
    """Descend the generator chains of 𝓜 back to an (A, B) presentation."""
    ctx = M.ctx
    depth = min(ctx.depth, 3) if depth is None else depth
    if depth < 1:
        raise DescentInconclusive("recovery needs depth >= 1")
    cert = Certificate("recover_filtered")
    d, r = M.d, M.r
    one, zero = SeriesElement.one(ctx), SeriesElement.zero(ctx)

    # columns of A from the Fil^r generator chains
    A_cols = []
    bounds = []
    for i in range(d):
        delta = [one if k == i else zero for k in range(d)]
        res = descend(filr_generator_chain(M, delta, depth))
        A_cols.append(res.g)
        bounds.append(res.residual_fil)
        _merge(cert, res.certificate, f"alpha_{i + 1}")
    # generator chains must return the standard basis
    for i in range(d):
        res = descend(generator_chain(M, i + 1, depth))
        ok = all(_series_agree(a, one if k == i else zero) for k, a in enumerate(res.g))
        cert.add(f"e_{i + 1} recovered", ok)
        bounds.append(res.residual_fil)
        _merge(cert, res.certificate, f"e_{i + 1}")
    A = linalg.transpose(A_cols)
    A = [[_exact(a) for a in row] for row in A]
    # B from the Fil^r witnesses of E^r e_i
    E_r = SeriesElement.E(ctx) ** r
    B_cols = []
    for i in range(d):
        # the Fil^r witness x of E^r e_i, i.e. A x = E^r δ_i, is the i-th column of B
        v = [E_r if k == i else zero for k in range(d)]
        B_cols.append(_solve_Er(A, v, ctx, r))
    B = linalg.transpose(B_cols)
    Mout = FilteredBK(ctx, d, r, A, B)
    vcert = validate(Mout, raise_on_fail=False)
    cert.add("recovered module valid", vcert.ok)
    same_A = all(_series_agree(a, b) for ra, rb in zip(A, M.A) for a, b in zip(ra, rb))
    same_B = all(_series_agree(a, b) for ra, rb in zip(B, M.B) for a, b in zip(ra, rb))
    cert.add("A matches", same_A)
    cert.add("B matches", same_B)

    # random 𝔖-combinations and the Fil^r compatibility
    rng = random.Random(seed)
    for k in range(combos):
        g = [SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(3)]) for _ in range(d)]
        res = descend(chain_from_vector(M, g, depth))
        cert.add(f"combination {k} recovered", all(_series_agree(a, b) for a, b in zip(res.g, g)))
        x = [SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(2)]) for _ in range(d)]
        res = descend(filr_generator_chain(M, x, depth))
        mem = fil_membership(Mout, res.g, r)
        cert.add(f"Fil^r compatibility {k}", mem.member)
        bounds.append(res.residual_fil)
    cert.windows["residual_fil"] = _json_num(min(bounds))
    return Mout, cert


def _exact(a: SeriesElement) -> SeriesElement:
    """Drop the u-adic window flag when the polynomial is already exact."""
    return SeriesElement(a.ctx, a.coeffs, a.level, a.prec)


def _solve_Er(A, v, ctx, r):
    """x with A x = v for v ∈ E^r 𝔖^d, via x = adj(A) v / det(A)."""
    from .bk import ClassicalBK, classical_to_filtered
    # E^r A^{-1} is exactly the B-matrix of the module with C = A
    d = len(A)
    inv = classical_to_filtered(ClassicalBK(ctx, d, r, A)).A
    E_r = SeriesElement.E(ctx) ** r
    x = []
    for row in inv:
        acc = SeriesElement.zero(ctx)
        for a, b in zip(row, v):
            acc = acc + a * b
        q, rem = acc.divmod_E(r)
        if not rem.is_zero():
            raise NotInFil("vector is not in the E^r-image")
        x.append(_exact(q))
    return x


def _merge(cert: Certificate, sub: Certificate, prefix: str):
    for chk in sub.checks:
        entry = dict(chk)
        entry["check"] = f"{prefix}: {chk['check']}"
        cert.checks.append(entry)


# ---------------------------------------------------------------------------
# the ring-level limit lim_φ S_n
# ---------------------------------------------------------------------------


def limit_ring_chain(s0: SeriesElement, depth: int) -> list[SeriesElement]:
    """s_n = φ^{-n}(s_0) for s_0 ∈ 𝔖_0."""
    return [_rename_up(s0, n) for n in range(depth + 1)]


def limit_ring_roundtrip(s0: SeriesElement, depth: int) -> bool:
    """φ^n(φ^{-n}(s_0)) = s_0 computed through S_n -> S_0."""
    ctx = s0.ctx
    target = s0.to_pd(_window(ctx, 0))
    for n, sn in enumerate(limit_ring_chain(s0, depth)):
        x = sn.to_pd(_window(ctx, n))
        for _ in range(n):
            x = x.frobenius(_window(ctx, x.level - 1))
        if not (x - target).is_zero():
            return False
    return True


def limit_ring_obstruction(s0: PDElement, depth: int) -> Certificate:
    """Show s_0 ∈ S_0 has no φ^depth-preimage: φ^n(S_n) ⊆ 𝔖_0 + Fil^{i_n} S_0.

    Raises :class:`Incompatible` when s_0 is outside 𝔖_0 + Fil^{i_depth}.
    """
    ctx, p = s0.ctx, s0.ctx.p
    i_n = contraction_sequence("frobcomp", p, n_max=depth)[depth]
    cert = Certificate("limit_ring_obstruction")
    cert.windows = {"i_n": i_n, "slots": s0.J}
    if s0.J < i_n:
        cert.add("window covers i_n", INCONCLUSIVE, {"slots": s0.J, "needed": i_n})
        return cert
    inside = s0.in_frakS_plus_fil(i_n)
    cert.add(f"in 𝔖 + Fil^{i_n}", inside)
    if not inside:
        raise Incompatible(f"element is not in 𝔖_0 + Fil^{i_n} S_0, so it has no "
                           f"level-{depth} preimage", level=depth)
    return cert
