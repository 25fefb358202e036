"""Theorem reports: hypothesis certificates, gap curves, verdicts.

The report is the persistence unit of every convergence checker.  A report
may only carry verdict ``pass`` when all hypotheses hold and the final gap
meets the tolerance; hypothesis failure blocks the conclusion entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SCHEMA_VERSION = 1

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"
NOT_APPLICABLE = "not_applicable"

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_FAILED = "hypothesis_failed"


@dataclass(frozen=True)
class HypothesisResult:
    label: str
    verdict: str  # holds | fails | inconclusive | not_applicable
    certificate: dict = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {"label": self.label, "verdict": self.verdict, "certificate": self.certificate}

    @classmethod
    def from_dict(cls, obj: dict) -> "HypothesisResult":
        return cls(obj["label"], obj["verdict"], obj.get("certificate", {}))


@dataclass(frozen=True)
class TheoremReport:
    theorem_id: str
    family: str
    hypothesis_results: tuple[HypothesisResult, ...]
    curve: tuple[tuple[float, float], ...]  # (index, gap) pairs
    final_gap: float
    tolerance: float
    verdict: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.verdict == PASS:
            if not all(h.ok for h in self.hypothesis_results):
                raise ValueError("pass verdict with a failed hypothesis")
            if self.final_gap > self.tolerance:
                raise ValueError("pass verdict above tolerance")

    @classmethod
    def build(cls, theorem_id: str, family: str, hypotheses, curve, final_gap: float,
              tolerance: float, meta: dict | None = None) -> "TheoremReport":
        """Derive the verdict: hypothesis_failed dominates, then the gap test."""
        hyps = tuple(hypotheses)
        if not all(h.ok for h in hyps):
            verdict = HYPOTHESIS_FAILED
        elif final_gap <= tolerance:
            verdict = PASS
        else:
            verdict = FAIL
        m = dict(meta or {})
        if verdict == HYPOTHESIS_FAILED:
            m["conclusion_asserted"] = False
        return cls(theorem_id, family, hyps, tuple((float(a), float(b)) for a, b in curve),
                   float(final_gap), float(tolerance), verdict, m)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "theorem": self.theorem_id,
            "family": self.family,
            "hypotheses": [h.to_dict() for h in self.hypothesis_results],
            "curve": [[a, b] for a, b in self.curve],
            "final_gap": self.final_gap,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TheoremReport":
        if obj.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {obj.get('schema')!r}")
        return cls(
            obj["theorem"], obj["family"],
            tuple(HypothesisResult.from_dict(h) for h in obj["hypotheses"]),
            tuple((float(a), float(b)) for a, b in obj["curve"]),
            float(obj["final_gap"]), float(obj["tolerance"]), obj["verdict"],
            obj.get("meta", {}),
        )
