"""Canonical JSON encoding of tower elements, modules, chains and certificates.

Output is byte-stable: keys are sorted, separators fixed and integers are
plain JSON numbers, so two runs with the same inputs produce identical files.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .bk import FilteredBK
from .breuil import BreuilModule
from .certificate import Certificate
from .errors import ParseError, SchemaMismatch
from .limit import Chain, ChainElement
from .precision import PrecisionContext, vp
from .tower import PDElement, SeriesElement

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "dumps",
    "loads",
    "element_to_json",
    "element_from_json",
    "module_to_json",
    "module_from_json",
    "chain_to_json",
    "chain_from_json",
    "certificate_to_json",
    "serialize",
    "deserialize",
]


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False)


def _plain(x):
    """Infinite filtration degrees become the string "inf"; tuples become lists."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def _require(obj: dict, *keys):
    if not isinstance(obj, dict):
        raise SchemaMismatch(f"expected an object, got {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaMismatch(f"missing keys {missing}")


# elements -------------------------------------------------------------


def element_to_json(x) -> dict:
    if isinstance(x, SeriesElement):
        p = x.ctx.p
        terms = []
        for d, c in enumerate(x.coeffs):
            if c:
                v = vp(c, p)
                terms.append([d, v, c // p ** v])
        return {"tag": "frakS", "level": x.level, "prec": x.prec, "uprec": x.uprec,
                "terms": terms}
    if isinstance(x, PDElement):
        slots = [[j, list(a)] for j, a in enumerate(x.slots) if a]
        return {"tag": x.tag, "level": x.level, "prec": x.prec, "den": x.den,
                "tail": x.tail, "window": x.J, "slots": slots}
    raise SchemaMismatch(f"cannot serialize {type(x).__name__}")


def element_from_json(ctx: PrecisionContext, obj: dict):
    _require(obj, "tag", "level", "prec")
    tag = obj["tag"]
    try:
        if tag == "frakS":
            _require(obj, "terms")
            coeffs: list[int] = []
            for d, v, unit in obj["terms"]:
                if len(coeffs) <= d:
                    coeffs.extend([0] * (d + 1 - len(coeffs)))
                coeffs[d] = unit * ctx.p ** v
            return SeriesElement(ctx, coeffs, obj["level"], obj["prec"], obj.get("uprec"))
        if tag in ("S", "fractionS"):
            _require(obj, "den", "window", "slots")
            slots = [()] * obj["window"]
            for j, a in obj["slots"]:
                slots[j] = tuple(a)
            return PDElement(ctx, slots, obj["level"], obj["den"], obj["prec"],
                             obj.get("tail", 0))
    except (TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed element: {exc}") from exc
    raise SchemaMismatch(f"unknown element tag {tag!r}")


# modules --------------------------------------------------------------


def _ctx_json(ctx: PrecisionContext) -> dict:
    out = ctx.as_dict()
    if ctx.fil_window is not None:
        out["fil_window"] = ctx.fil_window
    return out


def context_from_json(obj: dict) -> PrecisionContext:
    _require(obj, "p", "E", "N", "M")
    try:
        return PrecisionContext(obj["p"], tuple(obj["E"]), N=obj["N"], M=obj["M"],
                                depth=obj.get("depth", 3), fil_window=obj.get("fil_window"))
    except TypeError as exc:
        raise ParseError(f"malformed context: {exc}") from exc


def module_to_json(M) -> dict:
    semantics = "S" if isinstance(M, BreuilModule) else "frakS"
    out = _ctx_json(M.ctx)
    out.update({
        "schema": SCHEMA_VERSION,
        "kind": "module",
        "semantics": semantics,
        "d": M.d,
        "r": M.r,
        "A": [[element_to_json(a) for a in row] for row in M.A],
        "B": [[element_to_json(a) for a in row] for row in M.B],
    })
    return out


def _check_schema(obj: dict, kind: str):
    _require(obj, "schema", "kind")
    if obj["schema"] != SCHEMA_VERSION:
        raise SchemaMismatch(f"schema version {obj['schema']} != {SCHEMA_VERSION}")
    if obj["kind"] != kind:
        raise SchemaMismatch(f"expected a {kind}, got {obj['kind']!r}")


def module_from_json(obj: dict):
    _check_schema(obj, "module")
    _require(obj, "d", "r", "A", "B", "semantics")
    ctx = context_from_json(obj)
    A = [[element_from_json(ctx, a) for a in row] for row in obj["A"]]
    B = [[element_from_json(ctx, a) for a in row] for row in obj["B"]]
    if obj["semantics"] == "S":
        return BreuilModule(ctx, obj["d"], obj["r"], A, B)
    if obj["semantics"] == "frakS":
        return FilteredBK(ctx, obj["d"], obj["r"], A, B)
    raise SchemaMismatch(f"unknown semantics {obj['semantics']!r}")


# chains ---------------------------------------------------------------


def chain_to_json(c: Chain) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "chain",
        "module": module_to_json(c.module),
        "depth": c.depth,
        "elems": [{"n": el.n, "w": [element_to_json(a) for a in el.w]} for el in c.elems],
    }


def chain_from_json(obj: dict) -> Chain:
    _check_schema(obj, "chain")
    _require(obj, "module", "depth", "elems")
    M = module_from_json(obj["module"])
    if not isinstance(M, BreuilModule):
        raise SchemaMismatch("chain module must have semantics 'S'")
    elems = []
    for el in obj["elems"]:
        _require(el, "n", "w")
        elems.append(ChainElement(el["n"], [element_from_json(M.ctx, a) for a in el["w"]]))
    return Chain(M, obj["depth"], elems)


# certificates ---------------------------------------------------------


def certificate_to_json(cert: Certificate) -> dict:
    out = cert.as_dict()
    out["schema"] = SCHEMA_VERSION
    out["kind"] = "certificate"
    return out


def serialize(x) -> str:
    if isinstance(x, (FilteredBK, BreuilModule)):
        return dumps(module_to_json(x))
    if isinstance(x, Chain):
        return dumps(chain_to_json(x))
    if isinstance(x, Certificate):
        return dumps(certificate_to_json(x))
    if isinstance(x, (SeriesElement, PDElement)):
        return dumps(element_to_json(x))
    raise SchemaMismatch(f"cannot serialize {type(x).__name__}")


def deserialize(text: str, ctx: PrecisionContext | None = None):
    obj = loads(text)
    if isinstance(obj, dict) and obj.get("kind") == "module":
        return module_from_json(obj)
    if isinstance(obj, dict) and obj.get("kind") == "chain":
        return chain_from_json(obj)
    if isinstance(obj, dict) and "tag" in obj:
        if ctx is None:
            raise SchemaMismatch("element JSON needs a context")
        return element_from_json(ctx, obj)
    raise SchemaMismatch("unrecognized document")
