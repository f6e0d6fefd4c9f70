import pytest

from bktower import (ClassicalBK, FilteredBK, HeightExceeded, HeightTooLarge, InvalidModule,
                     PrecisionContext, SeriesElement, apply_phi_M, classical_to_filtered,
                     fil_membership, filtered_to_classical, mu_p_infinity, qp_zp,
                     random_filtered, validate)
from bktower.bk import random_classical
from bktower.linalg import column
from bktower.tower import phi_E


@pytest.fixture(params=[(3, (3, 1), 1, 2), (5, (5, 0, 1), 3, 3)], ids=["p3", "p5"])
def setting(request):
    p, E, r, d = request.param
    return PrecisionContext(p, E, N=8, depth=3), r, d


def test_rank_one_examples_validate(setting):
    ctx, _, _ = setting
    for M in (mu_p_infinity(ctx), qp_zp(ctx)):
        assert validate(M).ok


@pytest.mark.parametrize("seed", range(5))
def test_random_modules_validate(setting, seed):
    ctx, r, d = setting
    M = random_filtered(seed, d, r, ctx)
    cert = validate(M)
    assert cert.ok and cert.windows["p_digits"] == ctx.N


def test_validation_rejects_broken_modules(setting):
    ctx, r, d = setting
    M = random_filtered(0, d, r, ctx)
    A = M.matrix("A")
    A[0][0] = A[0][0] + 1
    broken = FilteredBK(ctx, d, r, A, M.B)
    with pytest.raises(InvalidModule):
        validate(broken)
    cert = validate(broken, raise_on_fail=False)
    assert not cert.ok and cert.first_failure()["check"] == "AB=E^r"
    with pytest.raises(HeightTooLarge):
        random_filtered(0, d, ctx.p - 1, ctx)


@pytest.mark.parametrize("seed", range(4))
def test_classical_round_trip(setting, seed):
    ctx, r, d = setting
    X = random_classical(seed, d, r, ctx)
    M = classical_to_filtered(X)
    assert validate(M).ok
    assert filtered_to_classical(M).C == X.C


def test_height_exceeded(setting):
    ctx, r, _ = setting
    E = SeriesElement.E(ctx)
    with pytest.raises(HeightExceeded):
        classical_to_filtered(ClassicalBK(ctx, 1, r, [[E ** (r + 1)]]))
    with pytest.raises(HeightExceeded):
        classical_to_filtered(ClassicalBK(ctx, 1, r, [[SeriesElement.gen(ctx)]]))


def test_membership_examples(setting):
    ctx, _, _ = setting
    one, E = SeriesElement.one(ctx), SeriesElement.E(ctx)
    assert fil_membership(mu_p_infinity(ctx), [one], 1)
    assert not fil_membership(qp_zp(ctx), [one], 1)
    res = fil_membership(qp_zp(ctx), [E], 1)
    assert res and res.witness == [one]
    assert fil_membership(qp_zp(ctx), [one], 0)


def test_columns_of_A_span_top_filtration(setting):
    ctx, r, d = setting
    M = random_filtered(3, d, r, ctx)
    for j in range(d):
        res = fil_membership(M, column(M.matrix("A"), j), r)
        expected = [SeriesElement.one(ctx) if i == j else SeriesElement.zero(ctx)
                    for i in range(d)]
        assert res and res.witness == expected


def test_frobenius_of_filtration_generators(setting):
    ctx, r, d = setting
    M = random_filtered(1, d, r, ctx)
    phiEr = phi_E(ctx, 0) ** r
    for j in range(d):
        out = apply_phi_M(M, column(M.matrix("A"), j))
        for i in range(d):
            assert out[i] == (phiEr if i == j else SeriesElement.zero(ctx))
