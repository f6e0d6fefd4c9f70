"""Command-line entry point: ``bktower <command> [options]``.

Exit codes: 0 all checks PASS, 1 some FAIL, 2 only INCONCLUSIVE, 3 bad
configuration or I/O.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from .bk import validate
from .breuil import BreuilModule
from .certificate import FAIL, INCONCLUSIVE, PASS, Certificate
from .errors import (BKTowerError, ConfigInvalid, DescentInconclusive, Incompatible,
                     ParseError, PrecisionExhausted, SchemaMismatch)
from .harness import SuiteConfig, example_suite, ring_suite, roundtrip_suite
from .limit import descend
from .serialize import chain_from_json, dumps, element_to_json, loads, module_from_json

EXIT = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}
EXIT_CONFIG = 3

_INT_KEYS = {"p", "e", "N", "M", "depth", "d", "r", "seed", "count", "jobs", "min_digits",
             "fil_window"}


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigInvalid(f"{path}:{lineno}: expected key = value")
        out[key.strip()] = value.strip()
    return out


def _coerce(raw: dict) -> dict:
    known = {f.name for f in fields(SuiteConfig)}
    out = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigInvalid(f"unknown config key {key!r}")
        if key in _INT_KEYS and value is not None:
            try:
                value = int(value)
            except (TypeError, ValueError):
                raise ConfigInvalid(f"{key} must be an integer, got {value!r}") from None
        out[key] = value
    return out


def build_config(args: argparse.Namespace, suite: str) -> SuiteConfig:
    raw = read_config(args.config) if args.config else {}
    for key in ("p", "e", "E", "N", "M", "depth", "d", "r", "seed", "count", "jobs",
                "min_digits", "fil_window"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    raw["suite"] = suite
    if getattr(args, "name", None):
        raw["example"] = args.name
    cfg = SuiteConfig(**_coerce(raw))
    cfg.context()  # validates p, E and precision parameters
    return cfg


def _add_common(sp: argparse.ArgumentParser):
    sp.add_argument("--config", help="flat key=value configuration file")
    sp.add_argument("--p", type=int)
    sp.add_argument("--e", type=int, help="degree of E when --E is not given (E = u^e + p)")
    sp.add_argument("--E", help='Eisenstein polynomial, e.g. "u^2+5"')
    sp.add_argument("--N", type=int, help="p-adic precision in digits")
    sp.add_argument("--M", type=int, help="u-adic cutoff at level 0")
    sp.add_argument("--depth", type=int)
    sp.add_argument("--d", type=int, help="maximal rank of random modules")
    sp.add_argument("--r", type=int, help="maximal height of random modules")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--count", type=int)
    sp.add_argument("--jobs", type=int, help="worker processes")
    sp.add_argument("--min-digits", dest="min_digits", type=int)
    sp.add_argument("--fil-window", dest="fil_window", type=int)
    sp.add_argument("--suite", help="ignored; the subcommand selects the suite")
    sp.add_argument("--out", help="write JSON here instead of stdout")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bktower", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bktower {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("ring-suite", help="ring-tower invariant battery")
    _add_common(sp)
    sp = sub.add_parser("roundtrip", help="seeded module -> Breuil module -> module round trips")
    _add_common(sp)
    sp = sub.add_parser("example", help="worked rank-one examples")
    sp.add_argument("name", choices=["mu-p-infinity", "qp-zp"])
    sp.add_argument("--lambda-terms", dest="lambda_terms", type=int,
                    help="truncate the λ product (reports the residual window)")
    _add_common(sp)
    sp = sub.add_parser("descend", help="descend a chain read from JSON")
    sp.add_argument("path", help="chain JSON file ('-' for stdin)")
    sp.add_argument("--out")
    sp = sub.add_parser("validate", help="validate a module read from JSON")
    sp.add_argument("path", help="module JSON file ('-' for stdin)")
    sp.add_argument("--out")
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc


def _emit(doc: dict, out: str | None):
    text = dumps(doc) + "\n"
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ConfigInvalid(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _cmd_descend(args) -> dict:
    chain = chain_from_json(loads(_read(args.path)))
    try:
        res = descend(chain)
        doc = res.certificate.as_dict()
        doc["g"] = [element_to_json(a) for a in res.g]
        doc["residual_fil"] = "inf" if res.residual_fil == float("inf") else res.residual_fil
        return doc
    except Incompatible as exc:
        cert = Certificate("descend").add("compatibility", FAIL,
                                          {"message": str(exc), "level": exc.level})
        return cert.as_dict()
    except (PrecisionExhausted, DescentInconclusive) as exc:
        return Certificate("descend").add("precision", INCONCLUSIVE, str(exc)).as_dict()


def _cmd_validate(args) -> dict:
    M = module_from_json(loads(_read(args.path)))
    if isinstance(M, BreuilModule):
        M = M.source
    cert = validate(M, raise_on_fail=False)
    doc = cert.as_dict()
    doc["module"] = {"d": M.d, "r": M.r, "p": M.ctx.p}
    return doc


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ring-suite":
            cfg = build_config(args, "ring")
            doc = ring_suite(cfg).as_dict()
        elif args.command == "roundtrip":
            cfg = build_config(args, "roundtrip")
            doc = roundtrip_suite(cfg).as_dict()
        elif args.command == "example":
            cfg = build_config(args, "example")
            doc = example_suite(cfg, args.lambda_terms).as_dict()
        elif args.command == "descend":
            doc = _cmd_descend(args)
        else:
            doc = _cmd_validate(args)
        _emit(doc, args.out)
    except (ConfigInvalid, ParseError, SchemaMismatch) as exc:
        sys.stderr.write(f"bktower: {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG
    except BKTowerError as exc:
        sys.stderr.write(f"bktower: {type(exc).__name__}: {exc}\n")
        return EXIT[FAIL]
    return EXIT[doc["status"]]


if __name__ == "__main__":
    sys.exit(main())
