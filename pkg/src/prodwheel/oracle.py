"""Brute-force and finite-difference oracles.

Nothing here calls into the cost or profit solvers: the grid scans evaluate
the technology directly and the analytic cost formulas are written in their
dual (unit-cost) form rather than derived from first-order conditions. When a
solver and an oracle agree, that is evidence rather than a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .funcspace import (
    CES,
    CobbDouglas,
    Leontief,
    Linear,
    PowerSingleInput,
    Technology,
)
from .markets import MarketSpec, Monopoly, PerfectCompetition

__all__ = [
    "GridSpec",
    "CostOracleResult",
    "ProfitOracleResult",
    "fd_step",
    "central_difference",
    "one_sided_difference",
    "closed_form_variable_cost",
    "grid_cost_oracle",
    "grid_profit_oracle",
]

MAX_GRID_POINTS = 10_000_000
MAX_COST_ORACLE_INPUTS = 3
_CHUNK = 1 << 20
_STEP_SCALE = np.finfo(float).eps ** (1.0 / 3.0)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned grid ``lower + k * step`` up to ``upper`` in each dimension."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    step: tuple[float, ...]

    def __post_init__(self):
        lower, upper, step = (tuple(float(v) for v in np.atleast_1d(a))
                              for a in (self.lower, self.upper, self.step))
        if not len(lower) == len(upper) == len(step):
            raise ValueError("lower, upper and step must have the same length")
        for lo, hi, st in zip(lower, upper, step):
            if not lo < hi:
                raise ValueError(f"grid needs lower < upper, got {lo} >= {hi}")
            if not st > 0:
                raise ValueError(f"grid step must be > 0, got {st}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "step", step)
        if self.size > MAX_GRID_POINTS:
            raise ValueError(f"grid has {self.size} points, limit is {MAX_GRID_POINTS}")

    @classmethod
    def uniform(cls, lower: float, upper: float, step: float, dims: int = 1) -> "GridSpec":
        return cls((lower,) * dims, (upper,) * dims, (step,) * dims)

    @property
    def ndim(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(
            int(math.floor((hi - lo) / st * (1 + 1e-12))) + 1
            for lo, hi, st in zip(self.lower, self.upper, self.step)
        )

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, i: int) -> np.ndarray:
        return self.lower[i] + self.step[i] * np.arange(self.shape[i])


class CostOracleResult(NamedTuple):
    x_best: np.ndarray
    cost_best: float
    resolution_bound: float


class ProfitOracleResult(NamedTuple):
    y_best: float
    profit_best: float


def fd_step(value: float) -> float:
    """Central-difference step: cube root of machine epsilon, scaled by ``max(1, |value|)``."""
    return float(_STEP_SCALE * max(1.0, abs(value)))


def central_difference(
    func: Callable[[np.ndarray], float],
    point: Sequence[float] | float,
    index: int = 0,
    h: float | None = None,
) -> float:
    """``(f(p + h e_i) - f(p - h e_i)) / 2h``."""
    p = np.array(point, dtype=float, ndmin=1)
    if h is None:
        h = fd_step(p[index])
    up, down = p.copy(), p.copy()
    up[index] += h
    down[index] -= h
    return (func(_unwrap(up, point)) - func(_unwrap(down, point))) / (2.0 * h)


def one_sided_difference(
    func: Callable[[np.ndarray], float],
    point: Sequence[float] | float,
    index: int = 0,
    side: int = 1,
    h: float | None = None,
) -> float:
    """Forward (``side=1``) or backward (``side=-1``) difference, used at kinks."""
    p = np.array(point, dtype=float, ndmin=1)
    if h is None:
        h = fd_step(p[index])
    moved = p.copy()
    moved[index] += side * h
    return side * (func(_unwrap(moved, point)) - func(_unwrap(p, point))) / h


def _unwrap(p: np.ndarray, like):
    return float(p[0]) if np.ndim(like) == 0 else p


def closed_form_variable_cost(tech: Technology, W: Sequence[float], y):
    """Minimised variable cost from the dual unit-cost formula, or None if unknown.

    Vectorised over ``y``.
    """
    W = np.asarray(W, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(tech, PowerSingleInput):
        return W[0] * (y / tech.scale) ** (1.0 / tech.exponent)
    if isinstance(tech, CobbDouglas):
        a = np.asarray(tech.exponents)
        s = a.sum()
        unit = np.prod((W / a) ** (a / s))
        return s * unit * (y / tech.scale) ** (1.0 / s)
    if isinstance(tech, CES):
        core = (y / tech.scale) ** (1.0 / tech.degree)
        shares = np.asarray(tech.shares)
        if tech.rho == 1.0:
            return core * np.min(W / shares)
        sigma = 1.0 / (1.0 - tech.rho)
        unit = np.sum(shares ** sigma * W ** (1.0 - sigma)) ** (1.0 / (1.0 - sigma))
        return core * unit
    if isinstance(tech, Linear):
        return y * np.min(W / np.asarray(tech.coefficients))
    if isinstance(tech, Leontief):
        return y * np.sum(W / np.asarray(tech.coefficients))
    return None


def grid_cost_oracle(
    tech: Technology, W: Sequence[float], y: float, grid: GridSpec
) -> CostOracleResult:
    """Cheapest grid bundle with ``f(x) >= y``.

    Ties go to the lexicographically smallest bundle. Since rounding the true
    optimum up to the next grid node stays feasible for a monotone technology,
    ``cost_best`` lies in ``[C*, C* + W . step]``.
    """
    W = np.asarray(W, dtype=float)
    n = tech.input_count
    if grid.ndim != n:
        raise ValueError(f"grid has {grid.ndim} dimensions, technology has {n} inputs")
    if n > MAX_COST_ORACLE_INPUTS:
        raise ValueError(f"cost oracle supports at most {MAX_COST_ORACLE_INPUTS} inputs")
    axes = [grid.axis(i) for i in range(n)]
    shape = grid.shape
    # absorbs rounding in lower + k*step so that e.g. x = 9 meets y = 3 under sqrt
    need = y - 1e-12 * max(1.0, abs(y))

    best_cost = math.inf
    best_flat = -1
    for start in range(0, grid.size, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, grid.size))
        idx = np.unravel_index(flat, shape)
        x = np.stack([axes[i][idx[i]] for i in range(n)], axis=-1)
        out = tech.output(x)
        cost = np.where(out >= need, x @ W, math.inf)
        k = int(np.argmin(cost))
        if cost[k] < best_cost:
            best_cost = float(cost[k])
            best_flat = int(flat[k])
    if best_flat < 0:
        raise ValueError(f"no grid point reaches output {y}")
    idx = np.unravel_index(best_flat, shape)
    x_best = np.array([axes[i][idx[i]] for i in range(n)])
    return CostOracleResult(x_best, best_cost + tech.fixed_cost, float(W @ np.asarray(grid.step)))


def _revenue(market: MarketSpec | float, y: np.ndarray) -> np.ndarray:
    if isinstance(market, Monopoly):
        demand = market.demand
        inside = np.array([demand.contains(v) for v in y])
        rev = np.full(y.shape, -math.inf)
        rev[inside] = demand._price(y[inside]) * y[inside]
        return rev
    price = market.price if isinstance(market, PerfectCompetition) else float(market)
    return price * y


def grid_profit_oracle(
    tech: Technology,
    W: Sequence[float],
    market: MarketSpec | float,
    grid: GridSpec,
    cost: str = "closed_form",
    cost_grid: GridSpec | None = None,
) -> ProfitOracleResult:
    """Best profit over a 1-D output grid; ties go to the smallest output.

    ``market`` may be a bare number for a price-taker. ``cost`` selects the
    analytic dual formula (``"closed_form"``) or a nested ``grid_cost_oracle``
    scan over ``cost_grid`` (``"grid"``). Outputs outside a monopoly's demand
    domain are skipped.
    """
    if grid.ndim != 1:
        raise ValueError("profit oracle needs a one-dimensional output grid")
    y = grid.axis(0)
    if cost == "closed_form":
        vc = closed_form_variable_cost(tech, W, y)
        if vc is None:
            raise ValueError(f"no closed-form cost for family {tech.family!r}; use cost='grid'")
        total = vc + tech.fixed_cost
    elif cost == "grid":
        if cost_grid is None:
            raise ValueError("cost='grid' needs cost_grid")
        total = np.array([grid_cost_oracle(tech, W, v, cost_grid).cost_best for v in y])
    else:
        raise ValueError(f"unknown cost mode {cost!r}")
    profit = _revenue(market, y) - total
    k = int(np.argmax(profit))
    if not math.isfinite(profit[k]):
        raise ValueError("no grid output lies in the demand domain")
    return ProfitOracleResult(float(y[k]), float(profit[k]))
