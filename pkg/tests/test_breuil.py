import random

import pytest

from bktower import (InvalidModule, NotInFil, PDElement, PrecisionContext, SeriesElement,
                     apply_phi_breuil, base_change, c0, fil_i_membership, fil_r_membership,
                     mu_p_infinity, qp_zp, random_filtered)
from bktower.bk import FilteredBK
from bktower.breuil import phi_r_direct
from bktower.linalg import column, matvec


@pytest.fixture(params=[(3, (3, 1), 1, 2), (5, (5, 0, 1), 3, 3)], ids=["p3", "p5"])
def module(request):
    p, E, r, d = request.param
    ctx = PrecisionContext(p, E, N=8, depth=3)
    return base_change(random_filtered(2, d, r, ctx))


def _random_vec(rng, M, level=0):
    ctx = M.ctx
    return [SeriesElement(ctx, [rng.randrange(ctx.modulus) for _ in range(4)], level)
            for _ in range(M.d)]


def test_base_change_rejects_invalid():
    ctx = PrecisionContext(3, (3, 1))
    one = SeriesElement.one(ctx)
    with pytest.raises(InvalidModule):
        base_change(FilteredBK(ctx, 1, 1, [[one]], [[one]]))


def test_columns_of_A_are_in_top_filtration(module):
    ctx = module.ctx
    for j in range(module.d):
        col = column(module.A, j)
        dec = fil_r_membership(module, col)
        assert dec
        back = [a.to_pd() + y for a, y in zip(matvec(module.A, dec.x), dec.y)]
        assert all(b == a.to_pd() for a, b in zip(col, back))
        if all(y.is_zero() for y in dec.y):
            for i, a in enumerate(dec.x):
                assert a == (SeriesElement.one(ctx) if i == j else SeriesElement.zero(ctx))


def test_decomposition_reassembles(module):
    ctx, rng = module.ctx, random.Random(5)
    E = SeriesElement.E(ctx)
    for _ in range(5):
        g = _random_vec(rng, module)
        # A g + E^r h + gamma_p k lies in Fil^r
        v = [a.to_pd() for a in matvec(module.A, g)]
        h = _random_vec(rng, module)
        v = [a + (E ** module.r * b).to_pd() + PDElement.gamma(ctx, ctx.p, coeff=(3, 1))
             for a, b in zip(v, h)]
        dec = fil_r_membership(module, v)
        assert dec
        assert all(y.fil_degree() >= ctx.p for y in dec.y)
        back = [a.to_pd() + y for a, y in zip(matvec(module.A, dec.x), dec.y)]
        assert all(b == a for a, b in zip(v, back))


def test_rank_one_filtrations():
    ctx = PrecisionContext(5, (5, 0, 1))
    one, E = SeriesElement.one(ctx), SeriesElement.E(ctx)
    mu, qp = base_change(mu_p_infinity(ctx)), base_change(qp_zp(ctx))
    assert fil_r_membership(mu, [one])
    assert not fil_r_membership(qp, [one])
    assert fil_r_membership(qp, [E])
    assert fil_i_membership(qp, [one], 0)
    # gamma_1 = E lies in Fil^1 of S, so in Fil^1 of qp
    assert fil_r_membership(qp, [PDElement.gamma(ctx, 1)])


def test_phi_r_agrees_with_direct_division(module):
    rng = random.Random(9)
    for _ in range(3):
        g = _random_vec(rng, module)
        v = [a.to_pd() for a in matvec(module.A, g)]
        v[0] = v[0] + PDElement.gamma(module.ctx, module.ctx.p + 1, coeff=(2,))
        split = apply_phi_breuil(module, v, "phi_r")
        direct = phi_r_direct(module, v)
        assert all(a.den == 0 for a in split)
        assert all(a.agrees(b) for a, b in zip(split, direct))


def test_phi_r_of_generators_is_c0_power(module):
    ctx = module.ctx
    cr = c0(ctx, 0) ** module.r
    for j in range(module.d):
        out = apply_phi_breuil(module, column(module.A, j), "phi_r")
        for i, a in enumerate(out):
            assert a.agrees(cr if i == j else PDElement.zero(ctx))


def test_phi_r_rejects_non_members():
    ctx = PrecisionContext(3, (3, 1))
    qp = base_change(qp_zp(ctx))
    with pytest.raises(NotInFil):
        apply_phi_breuil(qp, [SeriesElement.one(ctx)], "phi_r")
    with pytest.raises(ValueError):
        apply_phi_breuil(qp, [SeriesElement.one(ctx)], "psi")


def test_membership_at_higher_level(module):
    ctx = module.ctx
    v = [a.include_up().to_pd() for a in column(module.A, 0)]
    assert fil_r_membership(module, v)
    assert v[0].level == 1
