"""Verdict bookkeeping shared by the one-shot checks and the harness.

Every asserted inequality ``lhs <= rhs + tol`` is judged on brackets
``[lo, hi]`` that are known to contain the true quantities.  It passes only
when ``lhs.hi <= rhs.lo + tol`` (upper side of the left, lower side of the
right), fails only when ``lhs.lo > rhs.hi + tol`` and is skipped otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PASS = "pass"
VIOLATION = "violation"
SKIPPED = "skipped"


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    source: str = "exact"

    @classmethod
    def exact(cls, x: float, source: str = "exact") -> "Bracket":
        return cls(float(x), float(x), source)

    @classmethod
    def of(cls, result) -> "Bracket":
        """Bracket of a ``SmoothResult``."""
        lo, hi = result.interval
        return cls(float(lo), float(hi), f"{result.mode}:{result.certification}")

    def __add__(self, other):
        if isinstance(other, Bracket):
            return Bracket(self.lo + other.lo, self.hi + other.hi, f"{self.source}+{other.source}")
        return Bracket(self.lo + other, self.hi + other, self.source)

    def scale(self, c: float) -> "Bracket":
        a, b = self.lo * c, self.hi * c
        return Bracket(min(a, b), max(a, b), self.source)


def judge(lhs: Bracket, rhs: Bracket, tol: float) -> tuple[str, float, dict]:
    """Decide ``lhs <= rhs + tol``; returns (verdict, slack, audit entry).

    ``slack`` is ``lhs.hi - rhs.lo``: the worst case excess over the exact
    inequality allowed by the brackets.
    """
    slack = float(lhs.hi - rhs.lo)
    if lhs.hi <= rhs.lo + tol:
        verdict = PASS
    elif lhs.lo > rhs.hi + tol:
        verdict = VIOLATION
    else:
        verdict = SKIPPED
    audit = {"lhs_side": "upper", "lhs_source": lhs.source,
             "rhs_side": "lower", "rhs_source": rhs.source, "verdict": verdict}
    return verdict, slack, audit


@dataclass
class PropReport:
    prop_id: str
    samples: int = 0
    violations: int = 0
    skipped: int = 0
    max_slack: float = -np.inf
    worst_witness: dict | None = None
    config: dict = field(default_factory=dict)
    audit: dict = field(default_factory=lambda: {"pass": 0, "violation": 0, "skipped": 0,
                                                 "lhs_sides": [], "rhs_sides": []})
    tolerance: float = 0.0
    notes: list = field(default_factory=list)
    expect_violation: bool = False

    def record(self, verdict: str, slack: float, audit: dict, witness: dict | None = None):
        """Add one judged instance."""
        self.samples += 1
        self.audit[verdict] += 1
        for key, side in (("lhs_sides", audit.get("lhs_source")), ("rhs_sides", audit.get("rhs_source"))):
            if side is not None and side not in self.audit[key]:
                self.audit[key].append(side)
        if verdict == VIOLATION:
            self.violations += 1
        elif verdict == SKIPPED:
            self.skipped += 1
        if verdict != SKIPPED and slack > self.max_slack:
            self.max_slack = float(slack)
            self.worst_witness = witness

    def record_many(self, judgments, witness: dict | None = None):
        """Add one instance made of several judged inequalities.

        The instance is a violation if any part is, skipped if any part is
        skipped, and its slack is the largest part slack.
        """
        verdicts = [j[0] for j in judgments]
        if VIOLATION in verdicts:
            verdict = VIOLATION
        elif SKIPPED in verdicts:
            verdict = SKIPPED
        else:
            verdict = PASS
        slack = max(j[1] for j in judgments)
        for _, _, audit in judgments:
            for key, side in (("lhs_sides", audit.get("lhs_source")),
                              ("rhs_sides", audit.get("rhs_source"))):
                if side is not None and side not in self.audit[key]:
                    self.audit[key].append(side)
        self.record(verdict, slack, {}, witness)
        return verdict

    def skip(self, reason: str, witness: dict | None = None):
        self.samples += 1
        self.skipped += 1
        self.audit["skipped"] += 1
        key = f"skip:{reason}"
        self.audit[key] = self.audit.get(key, 0) + 1

    @property
    def passed(self) -> bool:
        """No violation, or for an expected counterexample: every instance violates."""
        if self.expect_violation:
            return self.samples > 0 and self.violations == self.samples
        return self.violations == 0

    def merge(self, other: "PropReport") -> "PropReport":
        """Fold another report on the same property into this one."""
        self.samples += other.samples
        self.violations += other.violations
        self.skipped += other.skipped
        for key, val in other.audit.items():
            if isinstance(val, list):
                for side in val:
                    if side not in self.audit.setdefault(key, []):
                        self.audit[key].append(side)
            else:
                self.audit[key] = self.audit.get(key, 0) + val
        if other.max_slack > self.max_slack:
            self.max_slack = other.max_slack
            self.worst_witness = other.worst_witness
        self.notes.extend(other.notes)
        return self

    def to_dict(self) -> dict:
        max_slack = self.max_slack if np.isfinite(self.max_slack) else 0.0
        audit = dict(self.audit)
        audit["lhs_sides"] = sorted(audit["lhs_sides"])
        audit["rhs_sides"] = sorted(audit["rhs_sides"])
        return {
            "prop_id": self.prop_id,
            "samples": self.samples,
            "violations": self.violations,
            "skipped": self.skipped,
            "max_slack": float(max_slack),
            "tolerance": self.tolerance,
            "worst_witness": self.worst_witness,
            "config": self.config,
            "audit": audit,
            "notes": list(self.notes),
            "expect_violation": self.expect_violation,
            "passed": self.passed,
        }
