"""Solver tolerances and brackets shared by the cost, curve and profit solvers."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any


class SolverError(RuntimeError):
    """A numerical solve could not produce an answer."""


class InfeasibleTargetError(SolverError):
    """The requested output is not attainable inside the search box."""


class NonConvergenceError(SolverError):
    """The iteration budget ran out before the tolerances were met."""


@dataclass(frozen=True)
class SolverConfig:
    feasibility_tol: float = 1e-8
    foc_tol: float = 1e-6
    lemma_tol: float = 1e-4
    consistency_tol: float = 1e-6
    box_cap: float = 1e9
    max_iter: int = 100
    multistart: int = 8
    # profit maximisation over output
    output_cap: float = 1e9
    profit_rel_width: float = 1e-10
    # cost-curve minima
    threshold_lo: float = 1e-6
    threshold_hi: float = 1e6
    threshold_rel_width: float = 1e-8

    def with_overrides(self, overrides: dict[str, Any] | None) -> "SolverConfig":
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown solver option(s): {', '.join(sorted(unknown))}")
        return replace(self, **overrides)

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_CONFIG = SolverConfig()
