"""Market structures faced by the firm."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, ClassVar, Union

from .funcspace import InverseDemand, demand_from_dict, demand_to_dict

__all__ = ["PerfectCompetition", "Monopoly", "MarketSpec", "market_from_dict", "market_to_dict"]


@dataclass(frozen=True)
class PerfectCompetition:
    """Price-taking firm facing an exogenous output price."""

    price: float
    tag: ClassVar[str] = "perfect_competition"

    def __post_init__(self):
        if not (self.price > 0 and math.isfinite(self.price)):
            raise ValueError(f"output price must be finite and > 0, got {self.price}")


@dataclass(frozen=True)
class Monopoly:
    """Single seller choosing a point on the inverse demand curve."""

    demand: InverseDemand
    tag: ClassVar[str] = "monopoly"


MarketSpec = Union[PerfectCompetition, Monopoly]

RESERVED_MARKETS = ("imperfect_competition",)


def market_from_dict(data: dict[str, Any]) -> MarketSpec:
    kind = data["type"]
    if kind == PerfectCompetition.tag:
        return PerfectCompetition(float(data["price"]))
    if kind == Monopoly.tag:
        return Monopoly(demand_from_dict(data["demand"]))
    if kind in RESERVED_MARKETS:
        raise NotImplementedError(f"market type {kind!r} is not implemented, see future work")
    raise ValueError(f"unknown market type {kind!r}")


def market_to_dict(market: MarketSpec) -> dict[str, Any]:
    if isinstance(market, PerfectCompetition):
        return {"type": market.tag, "price": market.price}
    return {"type": market.tag, "demand": demand_to_dict(market.demand)}
