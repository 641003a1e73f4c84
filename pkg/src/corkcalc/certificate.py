"""Replayable verification records."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

from . import __version__

FORMAT_VERSION = 1


@dataclass
class Check:
    name: str
    passed: bool
    range: str
    witness: Any = None
    detail: str = ""


@dataclass
class Certificate:
    """A construction chain, the checks run along it, and the axioms it relies on."""

    chain: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    axioms: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    request: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def step(self, op: str, role: str, **params) -> None:
        self.chain.append({"op": op, "role": role, "params": params})

    def check(self, name: str, passed: bool, range: str, witness: Any = None, detail: str = "") -> Check:
        c = Check(name, bool(passed), range, witness, detail)
        self.checks.append(c)
        return c

    def axiom(self, text: str) -> None:
        if text not in self.axioms:
            self.axioms.append(text)

    def extend(self, other: "Certificate") -> "Certificate":
        self.chain.extend(other.chain)
        self.checks.extend(other.checks)
        for a in other.axioms:
            self.axiom(a)
        self.data.update(other.data)
        return self

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def body(self) -> dict:
        """Everything that replay must reproduce exactly."""
        return {
            "format": FORMAT_VERSION,
            "versions": {"corkcalc": __version__},
            "request": self.request,
            "passed": self.passed,
            "chain": self.chain,
            "checks": [asdict(c) for c in self.checks],
            "axioms": self.axioms,
            "data": self.data,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.body()).encode()).hexdigest()

    def to_json(self, timestamp: str | None = None) -> str:
        doc = self.body()
        doc["digest"] = self.digest()
        doc["timestamp"] = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()
        return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_doc(cls, doc: dict) -> "Certificate":
        cert = cls(
            chain=doc["chain"],
            checks=[Check(**c) for c in doc["checks"]],
            axioms=doc["axioms"],
            data=doc.get("data", {}),
            request=doc.get("request"),
        )
        return cert

    def summary(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  [{c.range}]" for c in self.checks]
        return "\n".join(lines)


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
