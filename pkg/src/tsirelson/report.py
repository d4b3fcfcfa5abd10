"""Structured verdicts returned by every checker."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .rational import jsonable

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"
HYPOTHESIS_NOT_MET = "hypothesis-not-met"


@dataclass
class Check:
    """One named condition. ``ok is None`` means undecided or not applicable."""

    name: str
    ok: bool | None
    detail: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "ok": self.ok, "detail": jsonable(self.detail)}


@dataclass
class Report:
    kind: str
    checks: list[Check] = field(default_factory=list)
    values: dict[str, Any] = field(default_factory=dict)
    verdict: str | None = None

    def add(self, name: str, ok: bool | None, **detail: Any) -> Check:
        check = Check(name, ok, detail)
        self.checks.append(check)
        return check

    def finish(self) -> "Report":
        if self.verdict is None:
            if any(c.ok is False for c in self.checks):
                self.verdict = FAIL
            elif any(c.ok is None for c in self.checks):
                self.verdict = UNKNOWN
            else:
                self.verdict = PASS
        return self

    @property
    def ok(self) -> bool:
        return self.finish().verdict == PASS

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if c.ok is False]

    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if c.ok is False), None)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict[str, Any]:
        self.finish()
        first = self.first_failure()
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "first_failure": first.name if first else None,
            "checks": [c.to_json() for c in self.checks],
            "values": jsonable(self.values),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Report":
        """Restore a serialised report; detail values stay in their JSON form."""
        checks = [Check(c["name"], c["ok"], dict(c.get("detail", {}))) for c in data.get("checks", [])]
        return cls(data["kind"], checks, dict(data.get("values", {})), data.get("verdict"))
