import pytest

from bktower import (Chain, ChainElement, DepthExceeded, Incompatible, PDElement,
                     PrecisionContext, SeriesElement, base_change, check_compat, descend,
                     filr_generator_chain, generator_chain, lift, mu_p_infinity, qp_zp,
                     random_filtered, recover_filtered)
from bktower.limit import (act, chain_from_vector, chain_to_pd, keyc_bound,
                           limit_ring_obstruction, limit_ring_roundtrip, push_down)


@pytest.fixture(params=[(3, (3, 1)), (5, (5, 0, 1))], ids=["p3", "p5"])
def ctx(request):
    p, E = request.param
    return PrecisionContext(p, E, N=8, depth=3)


def _inject(c: Chain, level: int, coord: int = 0) -> Chain:
    """Add p^(N-1) u_n to one coordinate of the chain at one level."""
    ctx = c.module.ctx
    bump = SeriesElement(ctx, [0, ctx.p ** (ctx.N - 1)], level)
    elems = list(c.elems)
    w = list(elems[level].w)
    w[coord] = w[coord] + bump
    elems[level] = ChainElement(level, w)
    return Chain(c.module, c.depth, elems)


def test_keyc_bound_values():
    assert keyc_bound(3, 1, 1) == 6
    assert keyc_bound(5, 3, 1) == 10
    assert keyc_bound(3, 0, 2) == 27


@pytest.mark.parametrize("maker", [mu_p_infinity, qp_zp])
def test_rank_one_generator_chains(ctx, maker):
    M = base_change(maker(ctx))
    c = generator_chain(M, 1, 3)
    assert check_compat(c).ok
    assert check_compat(chain_to_pd(c)).ok
    res = descend(c)
    assert res.g == [SeriesElement.one(ctx)]
    assert res.certificate.ok


@pytest.mark.parametrize("level", [1, 2, 3])
def test_fault_injection_is_detected(ctx, level):
    M = base_change(qp_zp(ctx))
    bad = _inject(generator_chain(M, 1, 3), level)
    with pytest.raises(Incompatible) as info:
        check_compat(bad)
    assert info.value.level in (level, level + 1)
    cert = check_compat(bad, raise_on_fail=False)
    assert not cert.ok
    with pytest.raises(Incompatible):
        check_compat(chain_to_pd(bad))
    with pytest.raises(Incompatible):
        descend(bad)


def test_fault_injection_generic_module(ctx):
    r = 1 if ctx.p == 3 else 3
    M = base_change(random_filtered(4, 2, r, ctx))
    bad = _inject(generator_chain(M, 2, 3), 2, coord=1)
    with pytest.raises(Incompatible):
        check_compat(bad)


def test_zero_chain_descends_to_zero(ctx):
    M = base_change(random_filtered(0, 2, 1, ctx))
    zero = SeriesElement.zero(ctx)
    res = descend(chain_from_vector(M, [zero, zero], 3))
    assert all(a.is_zero() for a in res.g)


def test_descend_random_combination(ctx):
    r = 1 if ctx.p == 3 else 3
    M = base_change(random_filtered(6, 2, r, ctx))
    g = [SeriesElement(ctx, [1, 2, 3]), SeriesElement(ctx, [ctx.p + 4, 0, 7])]
    res = descend(chain_from_vector(M, g, 3))
    assert [(a - b).is_zero() for a, b in zip(res.g, g)] == [True, True]
    assert res.residual_fil >= res.bound


def test_action_matches_scaled_vector(ctx):
    M = base_change(random_filtered(1, 2, 1, ctx))
    g = SeriesElement(ctx, [2, 1])
    lhs = act(g, generator_chain(M, 1, 2))
    rhs = chain_from_vector(M, [g, SeriesElement.zero(ctx)], 2)
    for n in range(3):
        assert list(lhs.at(n)) == list(rhs.at(n))


def test_lift_and_push_down_are_inverse(ctx):
    r = 1 if ctx.p == 3 else 3
    M = base_change(random_filtered(2, 2, r, ctx))
    c = generator_chain(M, 1, 3)
    for n in range(3):
        up = lift(M, list(c.at(n)))
        assert up == list(c.at(n + 1))
        assert push_down(M, up) == list(c.at(n))
    with pytest.raises(DepthExceeded):
        lift(M, list(c.at(3)))


def test_push_down_rejects_non_integral(ctx):
    w = [SeriesElement(ctx, [1], 1)]
    with pytest.raises(Incompatible):
        push_down(base_change(qp_zp(ctx)), w)
    assert push_down(base_change(mu_p_infinity(ctx)), w) == [SeriesElement.one(ctx, 0)]


def test_filr_chain_descends_into_filtration(ctx):
    r = 1 if ctx.p == 3 else 3
    M = base_change(random_filtered(3, 2, r, ctx))
    one, zero = SeriesElement.one(ctx), SeriesElement.zero(ctx)
    res = descend(filr_generator_chain(M, [one, zero], 3))
    assert [(a - b).is_zero() for a, b in zip(res.g, [row[0] for row in M.A])] == [True, True]


def test_recover_small_module():
    ctx = PrecisionContext(3, (3, 1), N=8, depth=3)
    M = base_change(random_filtered(11, 2, 1, ctx))
    out, cert = recover_filtered(M, depth=3, seed=1)
    assert cert.ok
    assert out.A == M.A and out.B == M.B


def test_limit_ring_round_trip(ctx):
    s0 = SeriesElement(ctx, [1, 2, 0, 5, ctx.p])
    assert limit_ring_roundtrip(s0, 3)


def test_limit_ring_obstruction():
    ctx = PrecisionContext(3, (3, 1), N=8, depth=3, fil_windows={0: 16})
    assert limit_ring_obstruction(SeriesElement(ctx, [1, 4, 2]).to_pd(), 3).ok
    with pytest.raises(Incompatible):
        limit_ring_obstruction(PDElement.gamma(ctx, 3, J=16), 3)
    cert = limit_ring_obstruction(PDElement.gamma(ctx, 3, J=8), 3)
    assert cert.status == "INCONCLUSIVE"
