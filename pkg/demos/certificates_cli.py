"""Serialize objects, then drive the command-line tool on them.

Run with ``python demos/certificates_cli.py``.
"""

import json
import tempfile
from pathlib import Path

from bktower import PrecisionContext, base_change, generator_chain, mu_p_infinity
from bktower.cli import main
from bktower.serialize import deserialize, serialize

ctx = PrecisionContext(3, (3, 1), N=8, depth=3)
M = mu_p_infinity(ctx)
text = serialize(M)
print("module JSON:", text[:90], "...")
print("round trip equal:", deserialize(text) == M)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "module.json").write_text(text)
    (tmp / "chain.json").write_text(serialize(generator_chain(base_change(M), 1, 3)))
    for argv in (["validate", str(tmp / "module.json"), "--out", str(tmp / "v.json")],
                 ["descend", str(tmp / "chain.json"), "--out", str(tmp / "cert.json")],
                 ["ring-suite", "--p", "5", "--e", "2", "--count", "5", "--out",
                  str(tmp / "ring.json")]):
        code = main(argv)
        print("bktower", argv[0], "-> exit", code)
    cert = json.loads((tmp / "cert.json").read_text())
    print("descent certificate:", cert["status"], cert["windows"].get("p_digits"), "digits")
    ring = json.loads((tmp / "ring.json").read_text())
    print("ring suite:", ring["status"], ring["counts"])
