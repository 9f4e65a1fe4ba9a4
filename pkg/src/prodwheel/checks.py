"""Residual records for the duality identities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class ResidualCheck:
    """Scaled residuals of one identity, with the threshold they are judged against.

    ``one_sided`` marks residuals computed with one-sided differences at a kink;
    ``skipped`` carries the reason when the identity does not apply.
    """

    name: str
    values: tuple[float, ...]
    threshold: float
    one_sided: bool = False
    skipped: str | None = None

    @property
    def max_residual(self) -> float:
        return max(self.values, default=0.0)

    @property
    def passed(self) -> bool:
        return self.skipped is None and all(v < self.threshold for v in self.values)

    @property
    def verdict(self) -> str:
        if self.skipped is not None:
            return "skipped"
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict[str, Any]:
        out = {
            "name": self.name,
            "residuals": list(self.values),
            "threshold": self.threshold,
            "verdict": self.verdict,
        }
        if self.one_sided:
            out["one_sided"] = True
        if self.skipped is not None:
            out["skipped"] = self.skipped
        return out


@dataclass(frozen=True)
class LemmaReport:
    checks: tuple[ResidualCheck, ...] = field(default_factory=tuple)

    def __getitem__(self, name: str) -> ResidualCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def __add__(self, other: "LemmaReport") -> "LemmaReport":
        return LemmaReport(self.checks + other.checks)

    @property
    def passed(self) -> bool:
        """True when no check failed; skipped checks do not count against."""
        return all(c.verdict != "fail" for c in self.checks)

    def as_dict(self) -> dict[str, Any]:
        return {"passed": self.passed, "checks": [c.as_dict() for c in self.checks]}
