"""Profit maximisation under perfect competition and monopoly.

Both problems are solved over output only, each objective evaluation going
through the cost function: to maximise profit the firm first minimises cost.
A coarse logarithmic scan brackets the optimum, golden-section search narrows
it, and a root of marginal profit (when it changes sign in the bracket)
sharpens the answer. Profit still rising at the edge of the attainable range
is reported as unbounded rather than as a finite optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Callable

import numpy as np
from scipy.optimize import brentq

from ._scalar import golden_section
from .checks import LemmaReport, ResidualCheck
from .config import DEFAULT_CONFIG, InfeasibleTargetError, SolverConfig, SolverError
from .costmin import CostSolution, as_prices, shephard_residuals, solve_cost_min
from .funcspace import InverseDemand, Technology
from .markets import MarketSpec, Monopoly, PerfectCompetition
from .oracle import central_difference

__all__ = [
    "PerfectCompetition",
    "Monopoly",
    "MarketSpec",
    "MarginalCondition",
    "FirmOutcome",
    "OperatingDecision",
    "LemmaReport",
    "ResidualCheck",
    "solve_profit",
    "solve_profit_pc",
    "solve_profit_monopoly",
    "profit_function",
    "hotelling_residuals",
    "consistency_residual",
    "verify_lemmas",
    "classify_operation_decision",
    "MONOPOLY_THRESHOLD_ADVISORY",
]

INTERIOR = "interior"
BOUNDARY = "boundary"
UNBOUNDED = "unbounded"

MONOPOLY_THRESHOLD_ADVISORY = (
    "a monopolist sets its own price, so shutdown and zero-profit prices are "
    "reported for reference only and are not operating recommendations"
)


@dataclass(frozen=True)
class MarginalCondition:
    """Revenue side (P or MR) against marginal cost at the chosen output."""

    rule: str
    marginal_revenue: float
    marginal_cost: float

    @property
    def gap(self) -> float:
        return self.marginal_revenue - self.marginal_cost


@dataclass(frozen=True)
class FirmOutcome:
    market: str
    optimal_output: float
    optimal_price: float | None
    unconditional_demands: np.ndarray | None
    max_profit: float
    revenue: float
    cost: CostSolution | None
    marginal_condition: MarginalCondition | None
    status: str
    second_order_ok: bool | None = None
    note: str | None = None

    @property
    def is_interior(self) -> bool:
        return self.status == INTERIOR

    def as_dict(self) -> dict[str, Any]:
        mc = self.marginal_condition
        return {
            "market": self.market,
            "status": self.status,
            "optimal_output": self.optimal_output,
            "optimal_price": self.optimal_price,
            "unconditional_demands": (None if self.unconditional_demands is None
                                      else [float(v) for v in self.unconditional_demands]),
            "max_profit": self.max_profit,
            "revenue": self.revenue,
            "total_cost": None if self.cost is None else self.cost.total_cost,
            "marginal_condition": None if mc is None else {
                "rule": mc.rule,
                "marginal_revenue": mc.marginal_revenue,
                "marginal_cost": mc.marginal_cost,
                "gap": mc.gap,
            },
            "second_order_ok": self.second_order_ok,
            "note": self.note,
        }


def _scan_points(lo: float, hi: float, bounded: bool) -> np.ndarray:
    geo = 10.0 ** (np.arange(-16, 19) / 2.0)
    pts = [lo, *geo[(geo > lo) & (geo < hi)], hi]
    if bounded:
        pts.extend(np.linspace(lo, hi, 41)[1:-1])
    return np.unique(np.asarray(pts, dtype=float))


def _maximize_output(
    profit: Callable[[float], float],
    marginal: Callable[[float], float],
    lo: float,
    hi: float,
    bounded: bool,
    cfg: SolverConfig,
) -> tuple[float, str]:
    """Return ``(argmax, status)`` of ``profit`` on ``[lo, hi]``."""
    ys, vals = [], []
    hit_limit = False
    for y in _scan_points(lo, hi, bounded):
        try:
            v = profit(y)
        except InfeasibleTargetError:
            hit_limit = True
            break
        ys.append(y)
        vals.append(v)
    vals = np.asarray(vals)
    k = int(np.argmax(vals))
    last = len(ys) - 1

    if k == last and last > 0 and (hit_limit or not bounded) and vals[k] > vals[k - 1]:
        return math.inf, UNBOUNDED

    a = ys[max(k - 1, 0)]
    b = ys[min(k + 1, last)]
    if a == b:
        return ys[k], BOUNDARY
    y_best, neg = golden_section(lambda t: -profit(t), a, b, cfg.profit_rel_width)
    best_val = -neg
    if vals[k] > best_val:
        y_best, best_val = ys[k], vals[k]

    # sharpen with the root of marginal profit when it is bracketed
    try:
        ma, mb = marginal(a), marginal(b)
    except (SolverError, ValueError):
        ma = mb = math.nan
    if ma > 0 > mb:
        root = brentq(marginal, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        root_val = profit(root)
        if root_val >= best_val - 1e-12 * max(1.0, abs(best_val)):
            y_best, best_val = root, root_val

    if vals[0] >= best_val:
        return ys[0], BOUNDARY
    if bounded and y_best >= hi:
        return y_best, BOUNDARY
    return y_best, INTERIOR


def _second_order(marginal, y: float, lo: float) -> bool | None:
    h = 1e-5 * abs(y)
    if y - h <= lo:
        return None
    try:
        return central_difference(marginal, y, h=h) < 0
    except (SolverError, ValueError):
        return None


def _build_outcome(tech, W, market_tag, y, status, price, revenue_fn, mr_fn, rule, cfg,
                   second_order=None):
    if status == UNBOUNDED:
        return FirmOutcome(
            market=market_tag, optimal_output=math.inf,
            optimal_price=price if market_tag == PerfectCompetition.tag else None,
            unconditional_demands=None, max_profit=math.inf, revenue=math.inf, cost=None,
            marginal_condition=None, status=UNBOUNDED,
            note=f"profit still increasing at the edge of the search range "
                 f"(output cap {cfg.output_cap:g}, input cap {cfg.box_cap:g})",
        )
    sol = solve_cost_min(tech, W, y, cfg)
    revenue = revenue_fn(y)
    mc = MarginalCondition(rule, mr_fn(y), sol.marginal_cost)
    return FirmOutcome(
        market=market_tag,
        optimal_output=float(y),
        optimal_price=float(price),
        unconditional_demands=sol.conditional_demands,
        max_profit=revenue - sol.total_cost,
        revenue=revenue,
        cost=sol,
        marginal_condition=mc,
        status=status,
        second_order_ok=second_order,
        note="shutdown: producing nothing beats every positive output" if status == BOUNDARY
        and y == 0 else None,
    )


def solve_profit_pc(
    tech: Technology, W, P: float, config: SolverConfig = DEFAULT_CONFIG
) -> FirmOutcome:
    """Price-taking firm: maximise ``P y - C(W, y)`` over ``y >= 0``."""
    W = as_prices(W, tech)
    P = float(P)
    if not (P >= 0 and math.isfinite(P)):
        raise ValueError(f"output price must be finite and >= 0, got {P}")

    def profit(y):
        return P * y - solve_cost_min(tech, W, y, config).total_cost

    def marginal(y):
        return P - solve_cost_min(tech, W, y, config).marginal_cost

    y, status = _maximize_output(profit, marginal, 0.0, config.output_cap, False, config)
    so = _second_order(marginal, y, 0.0) if status == INTERIOR else None
    return _build_outcome(tech, W, PerfectCompetition.tag, y, status, P,
                          lambda v: P * v, lambda v: P, "P=MC", config, so)


def solve_profit_monopoly(
    tech: Technology, W, demand: InverseDemand, config: SolverConfig = DEFAULT_CONFIG
) -> FirmOutcome:
    """Monopolist: maximise ``P(Y) Y - C(W, Y)`` over the demand domain."""
    W = as_prices(W, tech)
    lo, hi = demand.domain
    bounded = hi < config.output_cap
    hi = min(hi, config.output_cap)
    if not demand.contains(hi):
        hi = hi * (1.0 - 1e-12)

    def revenue(Y):
        # an empty market earns nothing even where P(0) is undefined
        return 0.0 if Y == 0 else demand.price(Y) * Y

    def profit(Y):
        return revenue(Y) - solve_cost_min(tech, W, Y, config).total_cost

    def marginal(Y):
        return demand.marginal_revenue(Y) - solve_cost_min(tech, W, Y, config).marginal_cost

    Y, status = _maximize_output(profit, marginal, lo, hi, bounded, config)
    if status == BOUNDARY and Y == lo:
        outcome = _build_outcome(
            tech, W, Monopoly.tag, Y, status, demand.price(Y) if demand.contains(Y) else math.nan,
            revenue, lambda v: demand.marginal_revenue(v) if demand.contains(v) else math.nan,
            "MR=MC", config,
        )
        return _replace_note(outcome, "no interior optimum: marginal revenue never exceeds "
                                      "marginal cost on the demand domain")
    so = _second_order(marginal, Y, lo) if status == INTERIOR else None
    price = demand.price(Y) if status != UNBOUNDED else math.nan
    return _build_outcome(tech, W, Monopoly.tag, Y, status, price, revenue,
                          demand.marginal_revenue, "MR=MC", config, so)


def _replace_note(outcome: FirmOutcome, note: str) -> FirmOutcome:
    return replace(outcome, note=note)


def solve_profit(
    tech: Technology, W, market: MarketSpec, config: SolverConfig = DEFAULT_CONFIG
) -> FirmOutcome:
    if isinstance(market, PerfectCompetition):
        return solve_profit_pc(tech, W, market.price, config)
    if isinstance(market, Monopoly):
        return solve_profit_monopoly(tech, W, market.demand, config)
    raise TypeError(f"unsupported market {market!r}")


def profit_function(
    tech: Technology, W, market: MarketSpec, config: SolverConfig = DEFAULT_CONFIG
) -> float:
    """``Pi(P, W)`` or ``Pi(W)``: maximised profit as a function of prices only."""
    return solve_profit(tech, W, market, config).max_profit


# --------------------------------------------------------------------------
# envelope identities


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def hotelling_residuals(
    tech: Technology, W, market: MarketSpec, config: SolverConfig = DEFAULT_CONFIG,
    outcome: FirmOutcome | None = None,
) -> LemmaReport:
    """Finite-difference derivatives of the profit function against ``y*`` and ``-x^U``.

    Every perturbed evaluation is a fresh profit maximisation. Under monopoly
    only input-price derivatives are checked.
    """
    W = as_prices(W, tech)
    outcome = outcome or solve_profit(tech, W, market, config)
    names = ["hotelling_inputs"]
    if isinstance(market, PerfectCompetition):
        names.insert(0, "hotelling_supply")
    if not outcome.is_interior:
        reason = f"optimum is {outcome.status}, profit function not differentiable there"
        return LemmaReport(tuple(ResidualCheck(n, (), config.lemma_tol, skipped=reason)
                                 for n in names))

    def checked_profit(mkt, prices):
        res = solve_profit(tech, prices, mkt, config)
        if not res.is_interior:
            raise SolverError(f"perturbed optimum is {res.status}")
        return res.max_profit

    checks = []
    try:
        if isinstance(market, PerfectCompetition):
            dP = central_difference(lambda p: checked_profit(PerfectCompetition(p), W),
                                    market.price)
            checks.append(ResidualCheck("hotelling_supply",
                                        (_rel(dP, outcome.optimal_output),), config.lemma_tol))
        residuals = []
        for i in range(W.size):
            dW = central_difference(lambda w: checked_profit(market, w), W, i)
            residuals.append(_rel(-dW, float(outcome.unconditional_demands[i])))
        checks.append(ResidualCheck("hotelling_inputs", tuple(residuals), config.lemma_tol))
    except SolverError as exc:
        done = {c.name for c in checks}
        checks.extend(ResidualCheck(n, (), config.lemma_tol, skipped=str(exc))
                      for n in names if n not in done)
    return LemmaReport(tuple(checks))


def consistency_residual(
    tech: Technology, W, market: MarketSpec, config: SolverConfig = DEFAULT_CONFIG,
    outcome: FirmOutcome | None = None,
) -> ResidualCheck:
    """Relative gap between ``x^c(W, y*)`` (fresh cost solve) and the outcome's ``x^U``."""
    W = as_prices(W, tech)
    outcome = outcome or solve_profit(tech, W, market, config)
    if outcome.status == UNBOUNDED:
        return ResidualCheck("consistency", (), config.consistency_tol,
                             skipped="no finite optimum")
    xc = solve_cost_min(tech, W, outcome.optimal_output, config).conditional_demands
    xu = outcome.unconditional_demands
    residuals = tuple(
        float(abs(c - u) / abs(u)) if u != 0 else float(abs(c)) for c, u in zip(xc, xu)
    )
    return ResidualCheck("consistency", residuals, config.consistency_tol)


def verify_lemmas(
    tech: Technology, W, market: MarketSpec, config: SolverConfig = DEFAULT_CONFIG
) -> LemmaReport:
    """Shephard at the optimal output, Hotelling, and demand consistency."""
    W = as_prices(W, tech)
    outcome = solve_profit(tech, W, market, config)
    if outcome.status == UNBOUNDED:
        shephard = ResidualCheck("shephard", (), config.lemma_tol, skipped="no finite optimum")
    else:
        shephard = shephard_residuals(tech, W, outcome.optimal_output, config)
    return (LemmaReport((shephard,))
            + hotelling_residuals(tech, W, market, config, outcome)
            + LemmaReport((consistency_residual(tech, W, market, config, outcome),)))


# --------------------------------------------------------------------------
# operating decision


@dataclass(frozen=True)
class OperatingDecision:
    decision: str
    price: float | None
    p_zero_profit: float
    p_shutdown: float
    advisory: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "decision": self.decision,
            "price": self.price,
            "p_zero_profit": self.p_zero_profit,
            "p_shutdown": self.p_shutdown,
            "advisory": self.advisory,
        }


OPERATE_WITH_PROFIT = "operate_with_profit"
OPERATE_AT_LOSS = "operate_at_loss_short_run"
SHUTDOWN = "shutdown"


def classify_operation_decision(tech: Technology, W, market, thresholds) -> OperatingDecision:
    """Place the market price against the shutdown and zero-profit prices.

    ``market`` may be a ``MarketSpec`` or a bare price (which may be 0).
    """
    p_zp, p_sd = thresholds.P_ZeroProfit, thresholds.P_Shutdown
    if isinstance(market, Monopoly):
        return OperatingDecision("not_applicable", None, p_zp, p_sd, MONOPOLY_THRESHOLD_ADVISORY)
    price = market.price if isinstance(market, PerfectCompetition) else float(market)
    if price <= p_sd:
        decision = SHUTDOWN
    elif price <= p_zp:
        decision = OPERATE_AT_LOSS
    else:
        decision = OPERATE_WITH_PROFIT
    return OperatingDecision(decision, price, p_zp, p_sd)
