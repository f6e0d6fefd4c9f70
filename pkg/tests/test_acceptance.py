"""Acceptance battery; each test appends a PASS/FAIL line to the run summary."""

import os
import random

import pytest

import conftest
import oracle_suite
from bktower import (Incompatible, PDElement, PrecisionContext, SeriesElement,
                     contraction_sequence)
from bktower.harness import SuiteConfig, example_suite, ring_suite, roundtrip_suite
from bktower.limit import limit_ring_obstruction, limit_ring_roundtrip

JOBS = max(1, min(4, os.cpu_count() or 1))


def record(number: int, title: str, ok: bool, detail: str = ""):
    line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail
                                                                       else "")
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_ring_suite():
    counts = {}
    ok = True
    for p, e in [(3, 1), (3, 2), (5, 1), (5, 2)]:
        rep = ring_suite(SuiteConfig(p=p, e=e, N=8, depth=3, count=200, jobs=JOBS))
        counts[f"{p},{e}"] = rep.counts()
        ok &= rep.status == "PASS"
        keyA = [c for c in rep.cases if c["name"] == "keyA"]
        ok &= len(keyA) == 3 * (2 * p + 1)
        ok &= sum(c["name"] == "intersection" for c in rep.cases) == 200
    record(1, "ring lemma suite", ok, str(counts))


def test_contraction_monotonicity():
    ok = True
    for p in (3, 5, 7):
        seq = contraction_sequence("frobcomp", p, n_max=20)
        ok &= all(a < b for a, b in zip(seq, seq[1:]))
        for r in range(p - 1):
            seq = contraction_sequence("keyb", p, r=r, n_max=20)
            ok &= len(seq) == 20 and all(a < b for a, b in zip(seq, seq[1:]))
    record(2, "contraction monotonicity", ok)


def test_worked_examples():
    ok = True
    statuses = {}
    for p in (3, 5):
        for name in ("mu-p-infinity", "qp-zp"):
            rep = example_suite(SuiteConfig(p=p, depth=4, example=name, min_digits=6))
            statuses[f"{name}@{p}"] = rep.status
            ok &= rep.status == "PASS"
            names = {c["check"] for c in rep.cases[0]["checks"]}
            ok &= any(n.startswith("compat") for n in names)
            if name == "mu-p-infinity":
                ok &= "λ = c_0 φ(λ)" in names
    record(3, "worked examples", ok, str(statuses))


@pytest.mark.slow
def test_roundtrip():
    summary = {}
    ok = True
    for p, d, r in [(5, 3, 3), (3, 2, 1)]:
        rep = roundtrip_suite(SuiteConfig(p=p, e=1, d=d, r=r, N=8, depth=3, count=100,
                                          jobs=JOBS))
        c = rep.counts()
        summary[p] = c
        ok &= c["FAIL"] == 0 and c["INCONCLUSIVE"] < 5
    record(4, "round trip", ok, str(summary))


def test_oracle_equivalence():
    bad = {op: len(oracle_suite.run(op, 1000, seed=2024)) for op in oracle_suite.OPS}
    record(5, "oracle equivalence", not any(bad.values()), f"failures {bad}")


def _non_frakS_element(rng, ctx, i_n):
    """w + unit * gamma_k(E) + (Fil^{i_n} part) with p <= k < i_n: not in 𝔖 + Fil^{i_n}."""
    p, J, L = ctx.p, ctx.fil_window_at(0), ctx.slot_length(0)
    w = SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(rng.randint(1, 6))])
    k = rng.randrange(p, i_n)
    unit = [rng.randrange(1, p) + p * rng.randrange(ctx.modulus)] + [
        rng.randrange(ctx.modulus) for _ in range(L - 1)]
    x = w.to_pd(J) + PDElement.gamma(ctx, k, 0, J, coeff=unit)
    for j in range(i_n, J):
        x = x + PDElement.gamma(ctx, j, 0, J, coeff=[rng.randrange(ctx.modulus)])
    return x


def test_limit_ring():
    ok = True
    detected = 0
    for p, E in [(3, (3, 1)), (5, (5, 1))]:
        i3 = contraction_sequence("frobcomp", p, n_max=3)[3]
        ctx = PrecisionContext(p, E, N=8, depth=3, fil_windows={0: i3 + 1})
        rng = random.Random(f"limit-ring:{p}")
        for _ in range(10):
            s0 = SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(6)])
            ok &= limit_ring_roundtrip(s0, 3)
            ok &= limit_ring_obstruction(s0.to_pd(), 3).ok
        for k in range(25):
            rng = random.Random(f"limit-ring:{p}:{k}")
            s0 = _non_frakS_element(rng, ctx, i3)
            try:
                limit_ring_obstruction(s0, 3)
            except Incompatible:
                detected += 1
    ok &= detected == 50
    record(6, "limit ring isomorphism", ok, f"{detected}/50 non-𝔖 elements rejected")
