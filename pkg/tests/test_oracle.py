import random

import pytest

import oracle
import oracle_suite
from bktower import PDElement, PrecisionContext


@pytest.mark.parametrize("op", oracle_suite.OPS)
def test_library_matches_oracle(op):
    assert oracle_suite.run(op, 120, seed=7) == []


def test_oracle_detects_a_single_digit_fault():
    ctx = PrecisionContext(3, (3, 1), N=6, fil_window=6)
    rng = random.Random(3)
    E = oracle.E_at(ctx.E_coeffs, 3, 1)
    for _ in range(20):
        x = oracle_suite.random_pd(rng, ctx, 1)
        k = rng.randrange(x.J)
        slots = [list(a) for a in x.slots]
        # one unit in the last known digit of slot k
        bump = 3 ** (x.prec - 1)
        slots[k] = [(slots[k][0] if slots[k] else 0) + bump] + slots[k][1:]
        bad = PDElement(ctx, slots, 1, 0, x.prec)
        assert oracle.agrees(oracle_suite.as_poly(x), x, 3, E)
        assert not oracle.agrees(oracle_suite.as_poly(x), bad, 3, E)
