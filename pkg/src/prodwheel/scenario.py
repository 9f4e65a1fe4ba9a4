"""Scenario files: JSON documents describing a firm, its prices and its market."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .config import DEFAULT_CONFIG, SolverConfig
from .costmin import FactorPrices
from .funcspace import Technology, technology_from_dict, technology_to_dict
from .markets import MarketSpec, market_from_dict, market_to_dict

__all__ = ["SCHEMA_VERSION", "SCENARIO_SCHEMA", "ScenarioError", "Scenario",
           "load_scenario", "scenario_from_dict"]

SCHEMA_VERSION = 1

_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_LIST = {"type": "array", "items": _POS, "minItems": 1}
_NONNEG = {"type": "number", "minimum": 0}


def _family(name: str, required: list[str], props: dict[str, Any]) -> dict[str, Any]:
    return {
        "if": {"properties": {"family": {"const": name}}, "required": ["family"]},
        "then": {
            "required": ["family", *required],
            "properties": {"family": {"const": name}, **props},
            "additionalProperties": False,
        },
    }


_TECHNOLOGY = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["cobb_douglas", "ces", "leontief", "linear", "power", "custom"]},
    },
    "allOf": [
        _family("cobb_douglas", ["exponents"],
                {"scale": _POS, "exponents": _POS_LIST, "fixed_cost": _NONNEG}),
        _family("ces", ["shares", "rho"],
                {"scale": _POS, "shares": _POS_LIST, "rho": {"type": "number", "maximum": 1},
                 "degree": _POS, "fixed_cost": _NONNEG}),
        _family("leontief", ["coefficients"], {"coefficients": _POS_LIST, "fixed_cost": _NONNEG}),
        _family("linear", ["coefficients"], {"coefficients": _POS_LIST, "fixed_cost": _NONNEG}),
        _family("power", ["exponent"],
                {"scale": _POS, "exponent": _POS, "fixed_cost": _NONNEG}),
        _family("custom", ["expression", "inputs"],
                {"expression": {"type": "string", "minLength": 1},
                 "inputs": {"type": "integer", "minimum": 1}, "box": _POS,
                 "fixed_cost": _NONNEG}),
    ],
}

_DEMAND = {
    "type": "object",
    "required": ["family"],
    "properties": {"family": {"enum": ["isoelastic", "linear", "custom"]}},
    "allOf": [
        _family("isoelastic", ["exponent"],
                {"scale": _POS,
                 "exponent": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}}),
        _family("linear", ["intercept", "slope"], {"intercept": _POS, "slope": _POS}),
        _family("custom", ["expression", "domain"],
                {"expression": {"type": "string", "minLength": 1},
                 "domain": {"type": "array", "items": _NONNEG, "minItems": 2, "maxItems": 2}}),
    ],
}

_MARKET = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["perfect_competition", "monopoly", "imperfect_competition"]}},
    "allOf": [
        {"if": {"properties": {"type": {"const": "perfect_competition"}}},
         "then": {"required": ["type", "price"],
                  "properties": {"type": True, "price": _POS},
                  "additionalProperties": False}},
        {"if": {"properties": {"type": {"const": "monopoly"}}},
         "then": {"required": ["type", "demand"],
                  "properties": {"type": True, "demand": _DEMAND},
                  "additionalProperties": False}},
    ],
}

_SOLVER = {
    "type": "object",
    "properties": {
        name: ({"type": "integer", "minimum": 1} if isinstance(value, int) else _POS)
        for name, value in DEFAULT_CONFIG.as_dict().items()
    },
    "additionalProperties": False,
}

_GRID_TEXT = {"type": "string", "pattern": r"^[^:]+:[^:]+:[^:]+$"}

_REPORT = {
    "type": "object",
    "properties": {
        "curve_grid": _GRID_TEXT,
        "layer_samples": {"type": "integer", "minimum": 2, "maximum": 201},
        "include_timings": {"type": "boolean"},
    },
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "technology", "factor_prices", "market"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "technology": _TECHNOLOGY,
        "factor_prices": _POS_LIST,
        "market": _MARKET,
        "solver": _SOLVER,
        "report": _REPORT,
    },
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending entry (dotted path)."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


@dataclass(frozen=True)
class Scenario:
    technology: Technology
    factor_prices: FactorPrices
    market: MarketSpec
    config: SolverConfig = DEFAULT_CONFIG
    report: dict[str, Any] = field(default_factory=dict)
    name: str = ""
    source: str | None = None

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"version": SCHEMA_VERSION}
        if self.name:
            out["name"] = self.name
        out["technology"] = technology_to_dict(self.technology)
        out["factor_prices"] = list(self.factor_prices.values)
        out["market"] = market_to_dict(self.market)
        overrides = {k: v for k, v in self.config.as_dict().items()
                     if v != getattr(DEFAULT_CONFIG, k)}
        if overrides:
            out["solver"] = overrides
        if self.report:
            out["report"] = dict(self.report)
        return out


def _path(error: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in error.absolute_path)


def scenario_from_dict(data: Any, source: str | None = None) -> Scenario:
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if error is not None:
        where = _path(error)
        if error.validator == "additionalProperties":
            extra = sorted(set(error.instance) - set(error.schema.get("properties", {})))
            where = ".".join(filter(None, [where, extra[0] if extra else ""]))
        raise ScenarioError(where or "<root>", error.message)

    try:
        tech = technology_from_dict(data["technology"])
    except ValueError as exc:
        raise ScenarioError("technology", str(exc)) from exc
    try:
        prices = FactorPrices(tuple(data["factor_prices"]))
    except ValueError as exc:
        raise ScenarioError("factor_prices", str(exc)) from exc
    if len(prices) != tech.input_count:
        raise ScenarioError(
            "factor_prices",
            f"expected {tech.input_count} prices for the technology, got {len(prices)}",
        )
    try:
        market = market_from_dict(data["market"])
    except NotImplementedError as exc:
        raise ScenarioError("market.type", str(exc)) from exc
    except ValueError as exc:
        raise ScenarioError("market", str(exc)) from exc
    try:
        config = DEFAULT_CONFIG.with_overrides(data.get("solver"))
    except (TypeError, ValueError) as exc:
        raise ScenarioError("solver", str(exc)) from exc
    return Scenario(tech, prices, market, config, dict(data.get("report", {})),
                    data.get("name", ""), source)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ScenarioError("", f"scenario file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(data, str(path))
