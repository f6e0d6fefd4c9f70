"""Seeded verification suites and their aggregate reports."""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

from . import __version__
from .bk import mu_p_infinity, qp_zp, random_filtered, validate
from .breuil import apply_phi_breuil, base_change, fil_r_membership, phi_r_direct
from .certificate import FAIL, INCONCLUSIVE, PASS, Certificate
from .errors import (BKTowerError, ConfigInvalid, DenominatorOverflow, DescentInconclusive,
                     PrecisionExhausted)
from .limit import (chain_to_pd, check_compat, chain_from_vector, descend, filr_generator_chain,
                    generator_chain, lift, limit_ring_roundtrip, push_down, recover_filtered)
from .precision import (PrecisionContext, contraction_bound, contraction_sequence,
                        legendre_valuation, parse_polynomial)
from .tower import (PDElement, SeriesElement, c0, decompose_keyA, lambda_unit,
                    weierstrass_divide)

__all__ = ["SuiteConfig", "SuiteReport", "run_suite", "ring_suite", "roundtrip_suite",
           "example_suite", "instance_rng", "SUITES"]


@dataclass
class SuiteConfig:
    p: int = 3
    e: int = 1
    E: str | None = None
    N: int = 8
    M: int | None = None
    depth: int = 3
    d: int = 2
    r: int = 1
    seed: int = 0
    count: int = 10
    suite: str = "ring"
    example: str = "mu-p-infinity"
    jobs: int = 1
    min_digits: int | None = None
    fil_window: int | None = None

    def context(self) -> PrecisionContext:
        if self.E is None:
            coeffs = (self.p,) + (0,) * (self.e - 1) + (1,)
        else:
            coeffs = parse_polynomial(self.E)
        M = self.M if self.M is not None else 3 * (len(coeffs) - 1) * self.p ** 2
        return PrecisionContext(self.p, coeffs, N=self.N, M=M, depth=self.depth,
                                fil_window=self.fil_window)

    @property
    def required_digits(self) -> int:
        return self.N - 2 if self.min_digits is None else self.min_digits

    def echo(self) -> dict:
        out = asdict(self)
        del out["jobs"]  # scheduling must not change the certificate bytes
        ctx = self.context()
        out["E"] = list(ctx.E_coeffs)
        out["e"] = ctx.e
        out["M"] = ctx.M
        return out


@dataclass
class SuiteReport:
    suite: str
    config: dict
    cases: list[dict] = field(default_factory=list)

    @property
    def status(self) -> str:
        states = {c["status"] for c in self.cases}
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states:
            return INCONCLUSIVE
        return PASS

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
        for c in self.cases:
            out[c["status"]] += 1
        return out

    def as_dict(self) -> dict:
        return {"suite": self.suite, "version": __version__, "config": self.config,
                "status": self.status, "counts": self.counts(),
                "cases": sorted(self.cases, key=lambda c: c["index"])}


def instance_rng(seed: int, index: int) -> random.Random:
    """Independent stream per (seed, index); dropping a case shifts nothing."""
    return random.Random(f"bktower:{seed}:{index}")


def _case(index: int, cert: Certificate, **extra) -> dict:
    out = {"index": index, "status": cert.status, "checks": cert.checks,
           "windows": cert.windows}
    out.update(extra)
    return out


def _guard(index: int, name: str, fn: Callable[[], Certificate]) -> dict:
    """Run one case; precision closures are INCONCLUSIVE, anything else FAILs."""
    try:
        return _case(index, fn(), name=name)
    except (PrecisionExhausted, DescentInconclusive, DenominatorOverflow) as exc:
        cert = Certificate(name).add("precision", INCONCLUSIVE, str(exc))
        return _case(index, cert, name=name)
    except BKTowerError as exc:
        cert = Certificate(name).add(type(exc).__name__, FAIL, str(exc))
        return _case(index, cert, name=name)


# ---------------------------------------------------------------------------
# ring suite
# ---------------------------------------------------------------------------


def _random_series(rng, ctx, level, degree):
    return SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(degree + 1)], level)


def _intersection_case(cfg: SuiteConfig, index: int) -> Certificate:
    """Fil^m S_n ∩ 𝔖_n = E^m 𝔖_n on one seeded element."""
    ctx = cfg.context()
    rng = instance_rng(cfg.seed, index)
    n = rng.randint(0, min(ctx.depth, 3))
    J = ctx.fil_window_at(n)
    m = rng.randint(1, J - 1)
    k = rng.randint(0, m + 1)
    g = _random_series(rng, ctx, n, rng.randint(0, 4))
    f = SeriesElement.E(ctx, n) ** k * g
    if rng.random() < 0.5:
        f = f + _random_series(rng, ctx, n, rng.randint(0, 3)) * ctx.p ** rng.randint(0, 3)
    cert = Certificate("intersection")
    res = weierstrass_divide(f, m)
    in_fil = f.to_pd(J).fil_degree() >= m
    cert.add("Fil^m ∩ 𝔖 = E^m 𝔖", res.ok == in_fil,
             {"level": n, "m": m, "divisible": res.ok, "in_fil": in_fil})
    if res.ok:
        back = res.quotient * SeriesElement.E(ctx, n) ** m
        cert.add("quotient reconstructs", (back - f).is_zero())
    return cert


def _keyA_case(cfg: SuiteConfig, index: int, i: int, level: int) -> Certificate:
    """φ(x) = w + y with w ∈ 𝔖 and fil_degree(y) >= p b(i) for x ∈ Fil^i."""
    ctx = cfg.context()
    p = ctx.p
    rng = instance_rng(cfg.seed, 10_000 + index)
    J = ctx.fil_window_at(level)
    L = ctx.slot_length(level)
    slots = [()] * i + [[rng.randrange(ctx.modulus) for _ in range(L)]
                        for _ in range(max(J - i, 0))]
    x = PDElement(ctx, slots[:J] if J > i else [()] * (i + 1), level)
    bound = p * contraction_bound(i, p)
    dec = decompose_keyA(x, i)
    fx = x.frobenius(dec.y.J)
    cert = Certificate("keyA")
    cert.add("φ(x) = w + y", (fx - (dec.w.to_pd(dec.y.J) + dec.y)).is_zero(),
             {"i": i, "level": level, "p_digits": min(fx.prec, dec.y.prec)})
    cert.add("fil_degree(y) >= p b(i)", dec.y.fil_degree() >= bound,
             {"bound": bound, "realized": _num(dec.y.fil_degree())})
    return cert


def _num(x):
    return "inf" if x is math.inf else x


def _legendre_check(p: int, n_max: int = 10_000) -> Certificate:
    cert = Certificate("legendre")
    bad = [n for n in range(n_max + 1)
           if legendre_valuation(p * n, p) - n != legendre_valuation(n, p)]
    cert.add("v_p((pn)!/p^n) = v_p(n!)", not bad, {"n_max": n_max, "failures": bad[:5]})
    return cert


def _limit_ring_case(cfg: SuiteConfig, index: int) -> Certificate:
    ctx = cfg.context()
    rng = instance_rng(cfg.seed, 20_000 + index)
    s0 = _random_series(rng, ctx, 0, rng.randint(0, 5))
    cert = Certificate("limit ring")
    cert.add("φ^n φ^{-n} = id", limit_ring_roundtrip(s0, ctx.depth))
    return cert


def ring_suite(cfg: SuiteConfig) -> SuiteReport:
    ctx = cfg.context()
    report = SuiteReport("ring", cfg.echo())
    jobs = [(k, "intersection", _intersection_case, (cfg, k)) for k in range(cfg.count)]
    idx = cfg.count
    for level in range(1, ctx.depth + 1):
        for i in range(0, 2 * ctx.p + 1):
            jobs.append((idx, "keyA", _keyA_case, (cfg, idx, i, level)))
            idx += 1
    for k in range(3):
        jobs.append((idx, "limit ring", _limit_ring_case, (cfg, k)))
        idx += 1
    report.cases.extend(_run_jobs(jobs, cfg.jobs))
    report.cases.append(_case(idx, _legendre_check(ctx.p), name="legendre"))
    seq = Certificate("contraction")
    for kind in ("frobcomp", "keyb"):
        s = contraction_sequence(kind, ctx.p, 0 if kind == "frobcomp" else min(cfg.r, ctx.p - 2),
                                 20)
        seq.add(f"{kind} strictly increasing", all(a < b for a, b in zip(s, s[1:])))
    report.cases.append(_case(idx + 1, seq, name="contraction"))
    return report


def _call(args):
    index, name, fn, fargs = args
    return _guard(index, name, lambda: fn(*fargs))


def _run_jobs(jobs, n_jobs: int) -> list[dict]:
    if n_jobs <= 1:
        return [_call(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return sorted(pool.map(_call, jobs, chunksize=4), key=lambda c: c["index"])


# ---------------------------------------------------------------------------
# round trip
# ---------------------------------------------------------------------------


def _roundtrip_case(cfg: SuiteConfig, index: int) -> Certificate:
    ctx = cfg.context()
    rng = instance_rng(cfg.seed, index)
    d = rng.randint(1, cfg.d)
    r = rng.randint(0, min(cfg.r, ctx.p - 2))
    M = random_filtered(rng.randrange(2 ** 32), d, r, ctx)
    Mb = base_change(M)
    _, cert = recover_filtered(Mb, cfg.depth, seed=rng.randrange(2 ** 32))
    keyb = contraction_sequence("keyb", ctx.p, r, cfg.depth)
    resid = cert.windows.get("residual_fil")
    resid_val = math.inf if resid == "inf" else resid
    cert.add("residual filtration >= bound", resid_val >= keyb[-1],
             {"residual": resid, "bound": keyb[-1]})
    cert.windows.update({"d": d, "r": r})
    return cert


def roundtrip_suite(cfg: SuiteConfig) -> SuiteReport:
    report = SuiteReport("roundtrip", cfg.echo())
    jobs = [(k, "roundtrip", _roundtrip_case, (cfg, k)) for k in range(cfg.count)]
    report.cases.extend(_run_jobs(jobs, cfg.jobs))
    return report


# ---------------------------------------------------------------------------
# worked examples
# ---------------------------------------------------------------------------


def _window_status(x: PDElement, need: int) -> str:
    if not x.is_zero():
        return FAIL
    return PASS if x.prec >= need else INCONCLUSIVE


def _chain_checks(cert: Certificate, Mb, depth: int, need: int):
    ctx = Mb.ctx
    chain = generator_chain(Mb, 1, depth)
    for label, c in (("compat", chain), ("compat in S", chain_to_pd(chain))):
        for chk in check_compat(c, raise_on_fail=False).checks:
            status = chk["status"]
            if status == PASS and chk["detail"]["p_digits"] < need:
                status = INCONCLUSIVE
            cert.add(f"{label} {chk['check']}", status, chk.get("detail"))
    # lifting is the inverse of the transition map
    for n in range(depth):
        up = lift(Mb, chain.at(n))
        ok = all((a - b).is_zero() for a, b in zip(up, chain.at(n + 1)))
        down = push_down(Mb, up)
        back = all((a - b).is_zero() for a, b in zip(down, chain.at(n)))
        cert.add(f"lift level {n} -> {n + 1}", ok and back)
    res = descend(chain)
    one = SeriesElement.one(ctx)
    cert.add("ι(e) descends to e", (res.g[0] - one).is_zero(),
             {"residual_fil": _num(res.residual_fil)})
    for chk in res.certificate.checks:
        if chk["check"] == "p-adic window":
            cert.add("descent window", chk["status"], chk.get("detail"))
    rng = instance_rng(0, depth)
    g = _random_series(rng, ctx, 0, 3)
    res = descend(chain_from_vector(Mb, [g], depth))
    cert.add("surjectivity witness: g descends to g", (res.g[0] - g).is_zero())


def _mu_example(cfg: SuiteConfig, lambda_terms: int | None = None) -> Certificate:
    ctx = cfg.context()
    need = max(cfg.required_digits, 6)
    Mb = base_change(mu_p_infinity(ctx))
    cert = Certificate("mu-p-infinity")
    cert.add("validate", validate(Mb.source, raise_on_fail=False).ok)
    one = PDElement.one(ctx)
    phi = apply_phi_breuil(Mb, [one], "phi")[0]
    cert.add("φ_𝓜(e) = φ(E) e", _window_status(phi - SeriesElement.E(ctx).frobenius().to_pd(),
                                                 need))
    phir = apply_phi_breuil(Mb, [one], "phi_r")[0]
    cert.add("φ_{𝓜,1}(e) = c_0 e", _window_status(phir - c0(ctx), need))
    lam, terms = lambda_unit(ctx, max_terms=lambda_terms)
    resid = lam - c0(ctx) * lam.frobenius()
    detail = {"terms": terms, "residual_valuation": _num(resid.valuation()),
              "p_digits": resid.prec}
    if resid.is_zero():
        cert.add("λ = c_0 φ(λ)", _window_status(resid, need), detail)
    elif lambda_terms is not None:
        cert.add("λ = c_0 φ(λ)", INCONCLUSIVE, detail)
    else:
        cert.add("λ = c_0 φ(λ)", FAIL, detail)
    twisted = apply_phi_breuil(Mb, [lam], "phi_r")[0]
    st = _window_status(twisted - lam, need)
    if lambda_terms is not None and st == FAIL:
        st = INCONCLUSIVE
    cert.add("φ_{𝓜,1}(λ e) = λ e", st)
    _chain_checks(cert, Mb, cfg.depth, need)
    return cert


def _qp_example(cfg: SuiteConfig) -> Certificate:
    ctx = cfg.context()
    need = max(cfg.required_digits, 6)
    Mb = base_change(qp_zp(ctx))
    cert = Certificate("qp-zp")
    cert.add("validate", validate(Mb.source, raise_on_fail=False).ok)
    gamma1 = PDElement.gamma(ctx, 1)
    cert.add("1 ∉ Fil^1", not fil_r_membership(Mb, [PDElement.one(ctx)]).accepted)
    phir = apply_phi_breuil(Mb, [gamma1], "phi_r")[0]
    direct = phi_r_direct(Mb, [gamma1])[0]
    cert.add("φ_1(γ_1(E)) two ways", _window_status(phir - direct, need))
    cert.add("φ_1(E) = c_0", _window_status(phir - c0(ctx), need))
    _chain_checks(cert, Mb, cfg.depth, need)
    res = descend(filr_generator_chain(Mb, [SeriesElement.one(ctx)], cfg.depth))
    E = SeriesElement.E(ctx)
    cert.add("Fil^1 generator descends to E", (res.g[0] - E).is_zero())
    return cert


def example_suite(cfg: SuiteConfig, lambda_terms: int | None = None) -> SuiteReport:
    report = SuiteReport(f"example:{cfg.example}", cfg.echo())
    if cfg.example == "mu-p-infinity":
        fn = lambda: _mu_example(cfg, lambda_terms)
    elif cfg.example == "qp-zp":
        fn = lambda: _qp_example(cfg)
    else:
        raise ConfigInvalid(f"unknown example {cfg.example!r}")
    report.cases.append(_guard(0, cfg.example, fn))
    return report


SUITES = {"ring": ring_suite, "roundtrip": roundtrip_suite, "example": example_suite}


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    try:
        fn = SUITES[cfg.suite]
    except KeyError:
        raise ConfigInvalid(f"unknown suite {cfg.suite!r}") from None
    return fn(cfg)
