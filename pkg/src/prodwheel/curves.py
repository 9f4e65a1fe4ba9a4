"""Cost and revenue curves, zero-profit / shutdown thresholds, expansion path.

Also the three nested notions of optimality: technical (on the production
surface), allocative (on the expansion path) and scale (the profit-maximising
point on that path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from ._scalar import golden_section
from .config import DEFAULT_CONFIG, InfeasibleTargetError, SolverConfig, SolverError
from .costmin import as_prices, solve_cost_min
from .funcspace import DomainError, Technology
from .markets import MarketSpec, Monopoly, PerfectCompetition

__all__ = [
    "CostCurvePoint",
    "RevenuePoint",
    "PathPoint",
    "CurveMinimum",
    "ThresholdPoints",
    "OptimalityLayers",
    "sample_cost_curves",
    "threshold_points",
    "expansion_path",
    "revenue_curves",
    "optimality_layers",
]

# how a curve's infimum is attained
INTERIOR = "interior"
AT_ZERO = "at_zero"
AT_INFINITY = "at_infinity"
FLAT = "flat"

_FLAT_TOL = 1e-8
_SCAN_PER_DECADE = 4


class CostCurvePoint(NamedTuple):
    y: float
    AC: float
    AVC: float
    MC: float
    error: str | None = None


class RevenuePoint(NamedTuple):
    Y: float
    TR: float
    AR: float
    MR: float


class PathPoint(NamedTuple):
    y: float
    demands: np.ndarray | None
    error: str | None = None


def sample_cost_curves(
    tech: Technology, W, y_grid: Sequence[float], config: SolverConfig = DEFAULT_CONFIG
) -> list[CostCurvePoint]:
    """AC, AVC and MC on a grid of positive outputs; solver failures are reported per point."""
    W = as_prices(W, tech)
    points = []
    for y in y_grid:
        y = float(y)
        if not y > 0:
            raise ValueError(f"cost curves need y > 0, got {y}")
        try:
            sol = solve_cost_min(tech, W, y, config)
        except SolverError as exc:
            points.append(CostCurvePoint(y, math.nan, math.nan, math.nan, str(exc)))
            continue
        points.append(CostCurvePoint(y, sol.total_cost / y, sol.variable_cost / y,
                                     sol.marginal_cost))
    return points


@dataclass(frozen=True)
class CurveMinimum:
    """Infimum of AC or AVC: where it is reached and its value.

    ``y`` is 0.0 for a minimum at the origin and None when the curve is flat or
    keeps falling (``kind`` says which); ``price`` is then the limiting value.
    """

    y: float | None
    price: float
    kind: str

    @property
    def finite(self) -> bool:
        return self.kind == INTERIOR


@dataclass(frozen=True)
class ThresholdPoints:
    zero_profit: CurveMinimum
    shutdown: CurveMinimum

    @property
    def y_ZP(self) -> float | None:
        return self.zero_profit.y

    @property
    def P_ZeroProfit(self) -> float:
        return self.zero_profit.price

    @property
    def y_SD(self) -> float | None:
        return self.shutdown.y

    @property
    def P_Shutdown(self) -> float:
        return self.shutdown.price

    @property
    def no_finite_minimum(self) -> bool:
        return self.zero_profit.kind in (AT_INFINITY, FLAT)

    @property
    def shutdown_degenerate(self) -> bool:
        return self.shutdown.kind != INTERIOR

    @property
    def coincident_at_zero(self) -> bool:
        return self.zero_profit.kind == AT_ZERO and self.shutdown.kind == AT_ZERO

    def as_dict(self) -> dict[str, Any]:
        return {
            "y_ZP": self.y_ZP,
            "P_ZeroProfit": self.P_ZeroProfit,
            "zero_profit_kind": self.zero_profit.kind,
            "y_SD": self.y_SD,
            "P_Shutdown": self.P_Shutdown,
            "shutdown_kind": self.shutdown.kind,
            "no_finite_minimum": self.no_finite_minimum,
            "coincident_at_zero": self.coincident_at_zero,
        }


def _curve_minimum(tech, W, include_fixed: bool, cfg: SolverConfig) -> CurveMinimum:
    fixed = tech.fixed_cost if include_fixed else 0.0

    def parts(y):
        sol = solve_cost_min(tech, W, y, cfg)
        return (sol.variable_cost + fixed) / y, sol.marginal_cost

    def curve(y):
        return parts(y)[0]

    def gap(y):
        avg, mc = parts(y)
        return mc - avg

    decades = math.log10(cfg.threshold_hi / cfg.threshold_lo)
    ys = np.geomspace(cfg.threshold_lo, cfg.threshold_hi,
                      int(round(decades * _SCAN_PER_DECADE)) + 1)
    avg, rel = [], []
    for y in ys:
        try:
            a, mc = parts(y)
        except InfeasibleTargetError:
            # scan only the attainable range
            break
        avg.append(a)
        rel.append((mc - a) / a if a > 0 else mc - a)
    if not avg:
        raise InfeasibleTargetError(f"no output above {cfg.threshold_lo:g} is attainable")
    ys = ys[:len(avg)]
    avg, rel = np.asarray(avg), np.asarray(rel)

    if np.all(np.abs(rel) <= _FLAT_TOL):
        return CurveMinimum(None, float(np.median(avg)), FLAT)
    if rel[-1] < -_FLAT_TOL and np.all(rel < _FLAT_TOL):
        # MC below the average everywhere: falling towards its limit; fixed cost
        # per unit vanishes there, so report the variable part
        sol = solve_cost_min(tech, W, ys[-1], cfg)
        return CurveMinimum(None, float(sol.variable_cost / ys[-1]), AT_INFINITY)
    if rel[0] >= -_FLAT_TOL:
        if fixed == 0:
            # average variable cost tends to marginal cost as y -> 0
            mc0 = solve_cost_min(tech, W, 0.0, cfg).marginal_cost
            return CurveMinimum(0.0, float(mc0), AT_ZERO)
        a, b = ys[0] * 1e-6, ys[0]
    else:
        k = int(np.argmax(rel >= -_FLAT_TOL))
        # one extra scan point on the right so a node sitting on the minimum stays inside
        a, b = ys[k - 1], ys[min(k + 1, len(ys) - 1)]

    y_min, value = golden_section(curve, a, b, cfg.threshold_rel_width)
    # polish: the minimum is where marginal cost crosses the average
    ga, gb = gap(a), gap(b)
    if ga < 0 < gb:
        root = brentq(gap, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        root_value = curve(root)
        if root_value <= value + 1e-12 * abs(value):
            y_min, value = root, root_value
    return CurveMinimum(float(y_min), float(value), INTERIOR)


def threshold_points(
    tech: Technology, W, config: SolverConfig = DEFAULT_CONFIG
) -> ThresholdPoints:
    """Zero-profit (min AC) and shutdown (min AVC) outputs and prices.

    Degenerate minima (at the origin, at infinity, or flat curves) are encoded
    in the result instead of raising.
    """
    W = as_prices(W, tech)
    shutdown = _curve_minimum(tech, W, False, config)
    if tech.fixed_cost == 0:
        zero_profit = shutdown
    else:
        zero_profit = _curve_minimum(tech, W, True, config)
    return ThresholdPoints(zero_profit, shutdown)


def expansion_path(
    tech: Technology, W, y_grid: Sequence[float], config: SolverConfig = DEFAULT_CONFIG
) -> list[PathPoint]:
    W = as_prices(W, tech)
    path = []
    for y in y_grid:
        try:
            path.append(PathPoint(float(y), solve_cost_min(tech, W, y, config).conditional_demands))
        except SolverError as exc:
            path.append(PathPoint(float(y), None, str(exc)))
    return path


def revenue_curves(market: MarketSpec, Y_grid: Sequence[float]) -> list[RevenuePoint]:
    """Total, average and marginal revenue; MR is analytic for built-in demand families."""
    out = []
    for Y in Y_grid:
        Y = float(Y)
        if isinstance(market, PerfectCompetition):
            if Y < 0:
                raise DomainError(f"output must be >= 0, got {Y}")
            P = market.price
            out.append(RevenuePoint(Y, P * Y, P, P))
        elif isinstance(market, Monopoly):
            P = market.demand.price(Y)
            out.append(RevenuePoint(Y, P * Y, P, market.demand.marginal_revenue(Y)))
        else:
            raise TypeError(f"unsupported market {market!r}")
    return out


@dataclass(frozen=True)
class OptimalityLayers:
    technical: list[tuple[np.ndarray, float]]
    allocative: list[PathPoint]
    scale: tuple[float, np.ndarray]


def optimality_layers(
    tech: Technology,
    W,
    market: MarketSpec,
    samples: int = 21,
    config: SolverConfig = DEFAULT_CONFIG,
) -> OptimalityLayers:
    """Production-surface samples, the expansion path through ``y*``, and ``(y*, x*)``.

    ``samples`` sets the points on the path and the points per axis of the
    surface grid (capped near 4000 surface points).
    """
    from .profit import solve_profit

    W = as_prices(W, tech)
    outcome = solve_profit(tech, W, market, config)
    if not math.isfinite(outcome.optimal_output):
        raise SolverError(f"no finite profit-maximising output ({outcome.status})")
    y_star = outcome.optimal_output
    x_star = outcome.unconditional_demands

    top = 2.0 * y_star if y_star > 0 else 1.0
    ys = np.unique(np.append(np.linspace(0.0, top, samples), y_star))
    allocative = expansion_path(tech, W, ys, config)

    n = tech.input_count
    per_axis = max(2, min(samples, int(4000 ** (1.0 / n))))
    upper = np.where(x_star > 0, 2.0 * x_star, 1.0)
    axes = [np.linspace(0.0, upper[i], per_axis) for i in range(n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    heights = tech.output(grid)
    technical = [(x, float(h)) for x, h in zip(grid, heights)]
    return OptimalityLayers(technical, allocative, (y_star, x_star))
