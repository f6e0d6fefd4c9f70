"""Structured pass/fail records returned by validators and suites."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


@dataclass
class Certificate:
    name: str
    checks: list[dict] = field(default_factory=list)
    windows: dict[str, Any] = field(default_factory=dict)

    def add(self, label: str, status, detail: Any = None) -> "Certificate":
        if isinstance(status, bool):
            status = PASS if status else FAIL
        entry = {"check": label, "status": status}
        if detail is not None:
            entry["detail"] = detail
        self.checks.append(entry)
        return self

    @property
    def status(self) -> str:
        states = {c["status"] for c in self.checks}
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states:
            return INCONCLUSIVE
        return PASS

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def first_failure(self) -> dict | None:
        return next((c for c in self.checks if c["status"] == FAIL), None)

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "checks": self.checks,
                "windows": self.windows}
