import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bktower import (ConfigInvalid, HeightTooLarge, PadicCoeff, PrecisionContext,
                     contraction_bound, contraction_sequence, legendre_valuation,
                     pd_term_valuation)
from bktower.precision import parse_polynomial, phi_precision_window, vp


def brute_vp_factorial(n, p):
    return vp(math.factorial(n), p) if n else 0


@pytest.mark.parametrize("p", [3, 5, 7])
def test_legendre_matches_factorial(p):
    for n in range(0, 200):
        assert legendre_valuation(n, p) == brute_vp_factorial(n, p)


def test_frozen_values():
    assert legendre_valuation(25, 5) == 6
    assert contraction_bound(5, 5) == 4
    assert contraction_bound(4, 3) == 2
    assert contraction_sequence("frobcomp", 5, n_max=2) == [5, 20, 75]
    assert contraction_sequence("keyb", 5, r=3, n_max=3) == [5, 17, 62]
    assert contraction_sequence("keyb", 3, r=1, n_max=5) == [3, 5, 8, 11, 17]
    assert pd_term_valuation(3, 3, 3) == (2, True)
    assert pd_term_valuation(5, 0, 5) == (-1, False)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_contraction_bound_is_a_ceiling(p):
    for i in range(100):
        b = contraction_bound(i, p)
        assert b == math.ceil(Fraction(i * (p - 2), p - 1))


def test_keyb_rejects_large_height():
    with pytest.raises(HeightTooLarge):
        contraction_sequence("keyb", 5, r=4)
    with pytest.raises(ValueError):
        contraction_sequence("nope", 5)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_term_valuation_brute_force(p):
    for j in range(3 * p):
        for k in range(j + 1):
            value = Fraction(p ** k, math.factorial(j - k) * math.factorial(k))
            num = vp(value.numerator, p)
            den = vp(value.denominator, p)
            assert pd_term_valuation(j, k, p).valuation == num - den


@pytest.mark.parametrize("p", [3, 5])
def test_phi_window_against_scan(p):
    for J in range(1, 40):
        expected = min(j - brute_vp_factorial(j, p) for j in range(J, 400))
        assert phi_precision_window(J, p) == expected


def test_context_validation():
    with pytest.raises(ConfigInvalid):
        PrecisionContext(4, (4, 1))
    with pytest.raises(ConfigInvalid):
        PrecisionContext(2, (2, 1))
    with pytest.raises(ConfigInvalid):
        PrecisionContext(3, (6, 1))
    with pytest.raises(ConfigInvalid):
        PrecisionContext(3, (3, 1, 1))
    with pytest.raises(ConfigInvalid):
        PrecisionContext(5, (5, 1, 1))
    with pytest.raises(ConfigInvalid):
        PrecisionContext(3, (3, 1), N=1)


def test_context_windows():
    ctx = PrecisionContext(3, (3, 1))
    assert ctx.fil_window_at(0) == 13
    assert PrecisionContext(5, (5, 0, 1)).fil_window_at(2) == 11
    ctx = PrecisionContext(3, (3, 1), fil_window=7, fil_windows={0: 16})
    assert ctx.fil_window_at(0) == 16 and ctx.fil_window_at(1) == 7
    assert phi_precision_window(ctx.with_(fil_window=None).j_crit, 3) >= ctx.N


def test_parse_polynomial():
    assert parse_polynomial("u^2+5") == (5, 0, 1)
    assert parse_polynomial("u + 3") == (3, 1)
    assert parse_polynomial("u**3 - 3*u + 3") == (3, -3, 0, 1)
    ctx = PrecisionContext.from_string(3, "u^2+3u+3")
    assert ctx.e == 2
    with pytest.raises(ConfigInvalid):
        parse_polynomial("")


rationals = st.fractions(max_denominator=10 ** 6).filter(lambda x: x != 0)


@settings(max_examples=200, deadline=None)
@given(rationals, rationals, st.sampled_from([3, 5, 7]))
def test_padic_coeff_arithmetic(x, y, p):
    prec = 12
    a, b = PadicCoeff.from_rational(x, p, prec), PadicCoeff.from_rational(y, p, prec)
    assert (a + b).agrees_with(x + y)
    assert (a - b).agrees_with(x - y)
    assert (a * b).agrees_with(x * y)
    assert (a / b).agrees_with(x / y)
