"""The full pipeline for one scenario and the entrepreneur's seven answers.

Stages run in a fixed order: cost side (cost function probe, thresholds),
then profit maximisation, then the duality checks and the operating decision.
A solver failure stops the stages that depend on it; the partial report keeps
a record of what failed.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .checks import LemmaReport
from .config import SolverError
from .costmin import CostSolution, solve_cost_min
from .curves import ThresholdPoints, threshold_points
from .markets import Monopoly
from .profit import (
    MONOPOLY_THRESHOLD_ADVISORY,
    FirmOutcome,
    OperatingDecision,
    classify_operation_decision,
    solve_profit,
    verify_lemmas,
)
from .scenario import SCHEMA_VERSION, Scenario

__all__ = ["WheelReport", "run_wheel", "entrepreneur_report", "answers_text", "to_json",
           "to_text", "format_number", "EXOGENOUS_PRICE"]

SIGNIFICANT_DIGITS = 12
EXOGENOUS_PRICE = "exogenous (price taker)"
REFERENCE_OUTPUT = 1.0


@dataclass
class WheelReport:
    scenario: Scenario
    cost_at_reference: CostSolution | None = None
    thresholds: ThresholdPoints | None = None
    outcome: FirmOutcome | None = None
    lemmas: LemmaReport | None = None
    decision: OperatingDecision | None = None
    failures: list[dict[str, str]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def cost_at_optimum(self) -> CostSolution | None:
        return None if self.outcome is None else self.outcome.cost

    def answers(self) -> dict[str, Any]:
        return entrepreneur_report(self)

    def as_dict(self, include_timings: bool = False) -> dict[str, Any]:
        sc = self.scenario
        out: dict[str, Any] = {
            "scenario": sc.as_dict(),
            "technology": {
                "family": sc.technology.family,
                "returns_to_scale": sc.technology.returns_to_scale,
            },
            "cost_at_reference_output": _maybe(self.cost_at_reference),
            "thresholds": _maybe(self.thresholds),
            "outcome": _maybe(self.outcome),
            "cost_at_optimum": _maybe(self.cost_at_optimum),
            "lemmas": _maybe(self.lemmas),
            "decision": _maybe(self.decision),
            "answers": self.answers(),
            "failures": list(self.failures),
            "provenance": {
                "engine": f"prodwheel {__version__}",
                "schema_version": SCHEMA_VERSION,
                "stages": list(_STAGES),
                "tolerances": sc.config.as_dict(),
            },
        }
        if isinstance(sc.market, Monopoly) and self.thresholds is not None:
            out["thresholds"]["advisory"] = MONOPOLY_THRESHOLD_ADVISORY
        if include_timings:
            out["provenance"]["timings_s"] = dict(self.timings)
        return out


_STAGES = ("cost_minimization", "thresholds", "profit_maximization", "lemmas", "decision")


def _maybe(obj):
    return None if obj is None else obj.as_dict()


def run_wheel(scenario: Scenario) -> WheelReport:
    tech, W, market, cfg = (scenario.technology, scenario.factor_prices,
                            scenario.market, scenario.config)
    report = WheelReport(scenario)

    def stage(name, fn):
        start = time.perf_counter()
        try:
            return fn()
        except SolverError as exc:
            report.failures.append({"stage": name, "error": str(exc)})
            return None
        finally:
            report.timings[name] = time.perf_counter() - start

    report.cost_at_reference = stage(
        "cost_minimization", lambda: solve_cost_min(tech, W, REFERENCE_OUTPUT, cfg))
    report.thresholds = stage("thresholds", lambda: threshold_points(tech, W, cfg))
    report.outcome = stage("profit_maximization", lambda: solve_profit(tech, W, market, cfg))
    if report.outcome is not None:
        report.lemmas = stage("lemmas", lambda: verify_lemmas(tech, W, market, cfg))
    if report.thresholds is not None:
        report.decision = classify_operation_decision(tech, W, market, report.thresholds)
    return report


def _param_names(scenario: Scenario) -> list[str]:
    return [f"W{i + 1}" for i in range(len(scenario.factor_prices))]


def entrepreneur_report(report: WheelReport) -> dict[str, Any]:
    """Answers to the seven questions, each traceable to a pipeline result."""
    sc = report.scenario
    tp, out = report.thresholds, report.outcome
    monopoly = isinstance(sc.market, Monopoly)
    prices = _param_names(sc)
    answers: dict[str, Any] = {}

    def threshold(price_attr: str):
        if tp is None:
            return {"value": None, "note": "thresholds unavailable"}
        price = getattr(tp, price_attr)
        # a price setter gets the caveat, with the number kept only for reference
        entry = {"value": None, "reference_value": price} if monopoly else {"value": price}
        kind = tp.shutdown.kind if price_attr == "P_Shutdown" else tp.zero_profit.kind
        if kind != "interior":
            entry["note"] = f"curve minimum is degenerate ({kind})"
        if monopoly:
            entry["caveat"] = MONOPOLY_THRESHOLD_ADVISORY
        return entry

    answers["Q1_short_run_exit_price"] = threshold("P_Shutdown")
    answers["Q2_long_run_exit_price"] = threshold("P_ZeroProfit")
    if out is None:
        for key in ("Q3_optimal_output", "Q4_optimal_inputs", "Q5_price", "Q6_max_profit"):
            answers[key] = {"value": None, "note": "profit maximisation failed"}
    else:
        status_note = None if out.is_interior else out.note or out.status
        answers["Q3_optimal_output"] = {"value": out.optimal_output}
        answers["Q4_optimal_inputs"] = {
            "value": None if out.unconditional_demands is None
            else [float(v) for v in out.unconditional_demands]}
        if monopoly:
            answers["Q5_price"] = {
                "value": out.optimal_price,
                "reset": "whenever input prices or demand conditions change",
            }
        else:
            answers["Q5_price"] = {"value": EXOGENOUS_PRICE}
        answers["Q6_max_profit"] = {"value": out.max_profit}
        if status_note:
            for key in ("Q3_optimal_output", "Q4_optimal_inputs", "Q6_max_profit"):
                answers[key]["note"] = status_note

    demand = sc.market.demand.parameter_names() if monopoly else []
    choice = prices + demand if monopoly else ["P", *prices]
    answers["Q7_determinants"] = {
        "Q1": prices,
        "Q2": prices,
        "Q3": choice,
        "Q4": choice,
        "Q5": choice if monopoly else ["P"],
        "Q6": choice,
    }
    return answers


# --------------------------------------------------------------------------
# formatting


def format_number(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{SIGNIFICANT_DIGITS}g}"


def _normalise(obj):
    """Round floats to 12 significant digits; non-finite values become strings."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return format_number(v)
        v = float(format_number(v))
        return 0.0 if v == 0 else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_normalise(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _normalise(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalise(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(data: dict[str, Any]) -> str:
    return json.dumps(_normalise(data), indent=2) + "\n"


def _text_lines(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list)) and value and not _is_flat_list(value):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar_text(value)}")
    elif isinstance(obj, list):
        for value in obj:
            if isinstance(value, (dict, list)) and not _is_flat_list(value):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(value, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar_text(value)}")
    return lines


def _is_flat_list(value) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def _scalar_text(value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_scalar_text(v) for v in value) + "]"
    if isinstance(value, float):
        return format_number(value)
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, dict) and not value:
        return "{}"
    return str(value)


def to_text(data: dict[str, Any]) -> str:
    return "\n".join(_text_lines(_normalise(data))) + "\n"


_QUESTIONS = {
    "Q1_short_run_exit_price": "1. Short run: at what market price should the firm stop producing?",
    "Q2_long_run_exit_price": "2. Long run: at what market price should the firm leave the industry?",
    "Q3_optimal_output": "3. Which output level maximises profit?",
    "Q4_optimal_inputs": "4. Which input quantities produce that output at least cost?",
    "Q5_price": "5. What price should the firm set, and when should it change?",
    "Q6_max_profit": "6. How large is the best profit the firm can earn?",
    "Q7_determinants": "7. Which parameters drive each answer?",
}


def answers_text(answers: dict[str, Any]) -> str:
    answers = _normalise(answers)
    lines = []
    for key, question in _QUESTIONS.items():
        lines.append(question)
        entry = answers[key]
        if key == "Q7_determinants":
            for q, params in entry.items():
                lines.append(f"   {q}: {', '.join(params)}")
        else:
            lines.append(f"   answer: {_scalar_text(entry['value'])}")
            for extra in ("reference_value", "reset", "note", "caveat"):
                if extra in entry:
                    lines.append(f"   {extra}: {_scalar_text(entry[extra])}")
    return "\n".join(lines) + "\n"
