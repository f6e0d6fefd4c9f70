"""The two rank-one examples: μ_{p^∞} and Q_p/Z_p.

Run with ``python demos/worked_examples.py``.
"""

import json

from bktower.harness import SuiteConfig, example_suite

for p in (3, 5):
    for name in ("mu-p-infinity", "qp-zp"):
        report = example_suite(SuiteConfig(p=p, depth=4, example=name))
        case = report.cases[0]
        print(f"{name} at p={p}: {report.status}")
        for chk in case["checks"]:
            print(f"    {chk['status']:<12} {chk['check']}")

# Truncating λ to a single factor leaves a visible residual.
report = example_suite(SuiteConfig(p=3, depth=2), lambda_terms=1)
twist = next(c for c in report.cases[0]["checks"] if c["check"].startswith("λ"))
print("truncated λ:", report.status, json.dumps(twist["detail"], ensure_ascii=False))
