"""Experiment reports: ordered check records, JSON (canonical) or CSV."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

CSV_COLUMNS = ["name", "anchor", "inputs_digest", "measured", "expected", "pass"]


def digest(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class Check:
    name: str
    anchor: str
    inputs: object
    measured: object
    expected: object
    passed: bool | None  # None: undecided at this precision

    def record(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "inputs_digest": digest(self.inputs),
            "measured": self.measured,
            "expected": self.expected,
            "pass": self.passed,
        }


@dataclass
class ExperimentReport:
    config: dict
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    timing: dict | None = None

    def add(self, name, anchor, inputs, measured, expected, passed) -> Check:
        c = Check(name, anchor, inputs, measured, expected, passed)
        self.checks.append(c)
        return c

    @property
    def failed(self) -> list:
        return [c for c in self.checks if c.passed is False]

    @property
    def undecided(self) -> list:
        return [c for c in self.checks if c.passed is None]

    def exit_code(self) -> int:
        if self.failed:
            return 1
        if self.undecided:
            return 3
        return 0

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "checks": [c.record() for c in self.checks],
            "summary": {
                "total": len(self.checks),
                "passed": sum(c.passed is True for c in self.checks),
                "failed": len(self.failed),
                "undecided": len(self.undecided),
            },
        }
        if self.extra:
            out["extra"] = self.extra
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=str) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for c in self.checks:
            rec = c.record()
            rec["measured"] = json.dumps(rec["measured"], sort_keys=True, default=str)
            rec["expected"] = json.dumps(rec["expected"], sort_keys=True, default=str)
            rec["pass"] = {True: "pass", False: "fail", None: "undecided"}[rec["pass"]]
            w.writerow(rec)
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()
