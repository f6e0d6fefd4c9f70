import json

import pytest

from bktower import (PDElement, ParseError, PrecisionContext, SchemaMismatch, SeriesElement,
                     base_change, generator_chain, random_filtered, validate)
from bktower.serialize import (chain_from_json, chain_to_json, deserialize, dumps,
                               element_from_json, element_to_json, module_from_json,
                               module_to_json, serialize)

CTX = PrecisionContext(5, (5, 0, 1), N=8, depth=3)


def test_series_round_trip():
    x = SeriesElement(CTX, [0, 25, 3, 0, 125 * 7], level=2)
    obj = element_to_json(x)
    assert obj["terms"][0] == [1, 2, 1]
    assert element_from_json(CTX, obj) == x


def test_pd_round_trip():
    x = PDElement.gamma(CTX, 3, level=1, coeff=(1, 2)) + PDElement.from_rationals(
        CTX, [1, 0, 3], level=1).scale_p(-1)
    y = deserialize(serialize(x), CTX)
    assert y.den == x.den and y.slots == x.slots and y.prec == x.prec and y.level == 1
    assert json.loads(serialize(x))["tag"] == "fractionS"


def test_module_and_chain_round_trip():
    M = random_filtered(3, 2, 3, CTX)
    back = module_from_json(module_to_json(M))
    assert back == M and validate(back).ok
    Mb = base_change(M)
    assert deserialize(serialize(Mb)) == Mb
    c = generator_chain(Mb, 2, 2)
    c2 = chain_from_json(chain_to_json(c))
    assert [list(c2.at(n)) for n in range(3)] == [list(c.at(n)) for n in range(3)]


def test_output_is_canonical():
    M = random_filtered(1, 2, 1, CTX)
    a, b = serialize(M), serialize(module_from_json(json.loads(serialize(M))))
    assert a == b
    assert " " not in a
    assert dumps({"b": float("inf"), "a": (1, 2)}) == '{"a":[1,2],"b":"inf"}'


def test_errors():
    with pytest.raises(ParseError):
        deserialize('{"kind": "module"')
    obj = module_to_json(random_filtered(0, 1, 1, CTX))
    obj["schema"] = 99
    with pytest.raises(SchemaMismatch):
        module_from_json(obj)
    with pytest.raises(SchemaMismatch):
        deserialize('{"kind": "banana"}')
    with pytest.raises(SchemaMismatch):
        element_from_json(CTX, {"tag": "X", "level": 0, "prec": 8})
    with pytest.raises(SchemaMismatch):
        deserialize(serialize(SeriesElement.one(CTX)))
    c = chain_to_json(generator_chain(base_change(random_filtered(0, 1, 1, CTX)), 1, 1))
    del c["elems"]
    with pytest.raises(SchemaMismatch):
        chain_from_json(c)
