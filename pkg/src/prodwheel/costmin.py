"""Cost minimisation: conditional factor demands, the cost function, Shephard's lemma.

Cobb-Douglas, single-input power, linear and Leontief technologies (and CES
with ``rho == 1``) have closed-form solutions. CES and custom technologies go
through a damped Newton iteration on the Lagrangian first-order conditions in
log coordinates, falling back to multistart SLSQP when Newton fails
(corners, singular Jacobians).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .checks import ResidualCheck
from .config import DEFAULT_CONFIG, InfeasibleTargetError, NonConvergenceError, SolverConfig
from .funcspace import (
    CES,
    CobbDouglas,
    Leontief,
    Linear,
    PowerSingleInput,
    Technology,
)
from .oracle import central_difference, one_sided_difference

__all__ = [
    "FactorPrices",
    "CostSolution",
    "as_prices",
    "solve_cost_min",
    "cost_function",
    "shephard_residuals",
]


@dataclass(frozen=True)
class FactorPrices:
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in np.atleast_1d(self.values))
        if not values or not all(v > 0 and math.isfinite(v) for v in values):
            raise ValueError(f"factor prices must be finite and > 0, got {values}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def as_prices(W, tech: Technology) -> np.ndarray:
    """Validate ``W`` against ``tech`` and return it as a float array."""
    if not isinstance(W, FactorPrices):
        W = FactorPrices(W)
    if len(W) != tech.input_count:
        raise ValueError(f"expected {tech.input_count} factor prices, got {len(W)}")
    return np.asarray(W.values, dtype=float)


@dataclass(frozen=True)
class CostSolution:
    target_output: float
    conditional_demands: np.ndarray
    total_cost: float
    variable_cost: float
    marginal_cost: float
    fixed_cost: float
    method: str
    iterations: int = 0
    constraint_residual: float = 0.0
    corner: bool = False

    def as_dict(self) -> dict:
        return {
            "target_output": self.target_output,
            "conditional_demands": [float(v) for v in self.conditional_demands],
            "total_cost": self.total_cost,
            "variable_cost": self.variable_cost,
            "marginal_cost": self.marginal_cost,
            "method": self.method,
            "iterations": self.iterations,
            "constraint_residual": self.constraint_residual,
            "corner": self.corner,
        }


def _finish(tech, W, y, x, mc, method, iterations=0, corner=False) -> CostSolution:
    x = np.asarray(x, dtype=float)
    vc = float(W @ x)
    residual = abs(float(tech.output(x)) - y) if y > 0 else 0.0
    return CostSolution(
        target_output=float(y),
        conditional_demands=x,
        total_cost=vc + tech.fixed_cost,
        variable_cost=vc,
        marginal_cost=float(mc),
        fixed_cost=tech.fixed_cost,
        method=method,
        iterations=iterations,
        constraint_residual=residual,
        corner=corner,
    )


def _limit_power(y: float, exponent: float, coef: float) -> float:
    """``coef * y**exponent`` with the y -> 0 limit spelled out."""
    if y > 0:
        return coef * y ** exponent
    if exponent > 0:
        return 0.0
    return coef if exponent == 0 else math.inf


def _power(tech: PowerSingleInput, W, y):
    alpha, A = tech.exponent, tech.scale
    x = (y / A) ** (1.0 / alpha)
    # MC = W / f'(x) = W x / (alpha y)
    mc = W[0] * x / (alpha * y) if y > 0 else _limit_power(
        0.0, 1.0 / alpha - 1.0, W[0] / (alpha * A ** (1.0 / alpha))
    )
    return _finish(tech, W, y, [x], mc, "closed_form:power")


def _cobb_douglas(tech: CobbDouglas, W, y):
    a = np.asarray(tech.exponents)
    s = a.sum()
    # FOC: x_i = lam * a_i * y / W_i; substitute into the constraint
    k = np.prod((a / W) ** a)
    if y == 0:
        mc = _limit_power(0.0, 1.0 / s - 1.0, (tech.scale * k) ** (-1.0 / s))
        return _finish(tech, W, y, np.zeros_like(a), mc, "closed_form:cobb_douglas")
    lam_y = (y / (tech.scale * k)) ** (1.0 / s)
    x = lam_y * a / W
    return _finish(tech, W, y, x, lam_y / y, "closed_form:cobb_douglas")


def _cheapest_input(tech, W, effective, y, core, dcore):
    """All output from the input with the lowest price per effective unit.

    ``core`` is the required effective-input index ``sum c_i x_i`` and ``dcore``
    its derivative with respect to y. Ties go to the lowest index.
    """
    unit = W / effective
    j = int(np.argmin(unit))
    x = np.zeros_like(W)
    x[j] = core / effective[j]
    return _finish(tech, W, y, x, unit[j] * dcore, f"closed_form:{tech.family}", corner=True)


def _linear(tech: Linear, W, y):
    return _cheapest_input(tech, W, np.asarray(tech.coefficients), y, y, 1.0)


def _ces_unit_elasticity(tech: CES, W, y):
    nu, A = tech.degree, tech.scale
    core = (y / A) ** (1.0 / nu)
    dcore = _limit_power(y, 1.0 / nu - 1.0, 1.0 / (nu * A ** (1.0 / nu)))
    return _cheapest_input(tech, W, np.asarray(tech.shares), y, core, dcore)


def _leontief(tech: Leontief, W, y):
    c = np.asarray(tech.coefficients)
    return _finish(tech, W, y, y / c, float(np.sum(W / c)), "closed_form:leontief")


# --------------------------------------------------------------------------
# numerical path


def _ray_scale(tech: Technology, direction: np.ndarray, y: float, cap: float) -> float:
    """Smallest ``t`` with ``f(t * direction) = y``; grows the bracket x10 up to ``cap``."""
    hi = 1.0
    while float(tech.output(hi * direction)) < y:
        hi *= 10.0
        if hi * direction.max() > cap:
            raise InfeasibleTargetError(
                f"output {y} not reached within input bound {cap:g}"
            )
    lo = 0.0 if hi == 1.0 else hi / 10.0
    return brentq(lambda t: float(tech.output(t * direction)) - y, lo, hi,
                  xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _lagrange_multiplier(grad: np.ndarray, W: np.ndarray, active: np.ndarray) -> float:
    g, w = grad[active], W[active]
    return float(np.dot(w, g) / np.dot(g, g))


def _foc_residual(tech, W, y, u, mu):
    with np.errstate(all="ignore"):
        x = np.exp(u)
        if not np.all(np.isfinite(x) & (x > 0)):
            return None
        g = tech.gradient(x).values
        fx = float(tech.output(x))
    if not (np.all(g > 0) and np.all(np.isfinite(g)) and fx > 0 and math.isfinite(fx)):
        return None
    return np.concatenate([mu + np.log(g) - np.log(W), [math.log(fx) - math.log(y)]])


def _newton(tech, W, y, x0, cfg: SolverConfig):
    """Damped Newton on ``log(lam f_i) = log W_i``, ``log f = log y`` in ``(log x, log lam)``."""
    n = x0.size
    g0 = tech.gradient(x0).values
    if not (np.all(g0 > 0) and np.all(np.isfinite(g0))):
        return None
    z = np.concatenate([np.log(x0), [math.log(_lagrange_multiplier(g0, W, np.ones(n, bool)))]])
    r = _foc_residual(tech, W, y, z[:n], z[n])
    if r is None:
        return None
    for it in range(1, cfg.max_iter + 1):
        J = np.zeros((n + 1, n + 1))
        J[:n, n] = 1.0
        for j in range(n):
            h = 1e-6 * max(1.0, abs(z[j]))
            zp = z.copy()
            zp[j] += h
            rp = _foc_residual(tech, W, y, zp[:n], zp[n])
            if rp is None:
                return None
            J[:, j] = (rp - r) / h
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)) or np.linalg.cond(J) > 1e12:
            return None
        norm = np.linalg.norm(r)
        t = 1.0
        while True:
            trial = z + t * step
            rt = _foc_residual(tech, W, y, trial[:n], trial[n])
            if rt is not None and np.linalg.norm(rt) < (1.0 - 1e-4 * t) * norm:
                break
            t *= 0.5
            if t < 1e-10:
                break
        if t < 1e-10:
            # no descent: accept if already converged to the noise floor
            if np.max(np.abs(r)) <= 1e-2 * cfg.foc_tol:
                return np.exp(z[:n]), it
            return None
        z, r = trial, rt
        if np.max(np.abs(r)) <= 1e-11 or (
            np.max(np.abs(t * step)) <= 1e-13 and np.max(np.abs(r)) <= 1e-2 * cfg.foc_tol
        ):
            return np.exp(z[:n]), it
    return None


def _slsqp_multistart(tech, W, y, x0, cfg: SolverConfig):
    n = x0.size
    rng = np.random.default_rng(0)
    starts = [x0]
    for _ in range(cfg.multistart - 1):
        d = np.exp(rng.uniform(-2.0, 2.0, n))
        d /= d.max()
        try:
            starts.append(_ray_scale(tech, d, y, cfg.box_cap) * d)
        except InfeasibleTargetError:
            continue
    scale = float(W @ x0)
    best = None
    for start in starts:
        res = minimize(
            lambda x: float(W @ x) / scale,
            start,
            jac=lambda x: W / scale,
            method="SLSQP",
            bounds=[(0.0, cfg.box_cap)] * n,
            constraints=[{"type": "eq",
                          "fun": lambda x: (float(tech.output(np.maximum(x, 0.0))) - y) / max(1.0, y)}],
            options={"ftol": 1e-15, "maxiter": 1000},
        )
        x = np.maximum(res.x, 0.0)
        if not np.all(np.isfinite(x)) or x.max() <= 0:
            continue
        # restore exact feasibility along the ray through the candidate
        try:
            x = _ray_scale(tech, x / x.max(), y, cfg.box_cap) * (x / x.max())
        except InfeasibleTargetError:
            continue
        if best is None or W @ x < W @ best[0]:
            best = (x, res.nit)
    return best


def _numeric_mc(tech, W, x) -> float:
    active = x > 1e-10 * x.max()
    grad = np.empty_like(x)
    for i in range(x.size):
        if active[i]:
            grad[i] = central_difference(lambda v: float(tech.output(v)), x, i,
                                         h=min(1e-6 * max(1.0, x[i]), 0.5 * x[i]))
        else:
            grad[i] = 0.0
    return _lagrange_multiplier(grad, W, active)


def _numeric(tech: Technology, W, y, cfg: SolverConfig):
    n = tech.input_count
    zero = np.zeros(n)
    if y <= float(tech.output(zero)):
        if y == 0:
            # marginal cost at zero output is a limit; approximate it just above zero
            try:
                mc = _numeric(tech, W, 1e-10, cfg).marginal_cost
            except Exception:
                mc = math.nan
        else:
            mc = 0.0
        return _finish(tech, W, y, zero, mc, "numeric:zero")
    d = W.min() / W
    x0 = _ray_scale(tech, d, y, cfg.box_cap) * d

    result = _newton(tech, W, y, x0, cfg)
    if result is not None:
        x, it = result
        x = _ray_scale(tech, x / x.max(), y, cfg.box_cap) * (x / x.max())
        g = tech.gradient(x).values
        mc = _lagrange_multiplier(g, W, np.ones(n, bool))
        return _finish(tech, W, y, x, mc, "numeric:newton", iterations=it)

    best = _slsqp_multistart(tech, W, y, x0, cfg)
    if best is None:
        raise NonConvergenceError(f"cost minimisation failed for y={y}")
    x, it = best
    active = x > 1e-10 * x.max()
    return _finish(tech, W, y, x, _numeric_mc(tech, W, x), "numeric:slsqp_multistart",
                   iterations=it, corner=not bool(active.all()))


def solve_cost_min(
    tech: Technology, W, y: float, config: SolverConfig = DEFAULT_CONFIG
) -> CostSolution:
    """Cheapest input bundle producing ``y`` at factor prices ``W``.

    Raises
    ------
    InfeasibleTargetError
        ``y`` is not attainable with inputs below ``config.box_cap``.
    NonConvergenceError
        Neither Newton nor the multistart fallback converged.
    """
    W = as_prices(W, tech)
    y = float(y)
    if not (y >= 0 and math.isfinite(y)):
        raise ValueError(f"target output must be finite and >= 0, got {y}")
    if isinstance(tech, PowerSingleInput):
        sol = _power(tech, W, y)
    elif isinstance(tech, CobbDouglas):
        sol = _cobb_douglas(tech, W, y)
    elif isinstance(tech, Linear):
        sol = _linear(tech, W, y)
    elif isinstance(tech, Leontief):
        sol = _leontief(tech, W, y)
    elif isinstance(tech, CES) and tech.rho == 1.0:
        sol = _ces_unit_elasticity(tech, W, y)
    else:
        sol = _numeric(tech, W, y, config)
    if sol.constraint_residual > config.feasibility_tol * max(1.0, y):
        raise NonConvergenceError(
            f"constraint residual {sol.constraint_residual:.3g} exceeds tolerance at y={y}"
        )
    if np.any(sol.conditional_demands > config.box_cap):
        raise InfeasibleTargetError(f"output {y} needs inputs beyond {config.box_cap:g}")
    return sol


def cost_function(tech: Technology, W, y: float, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Total cost ``C(W, y)`` including fixed cost."""
    return solve_cost_min(tech, W, y, config).total_cost


def _kinked_in_prices(tech: Technology, W: np.ndarray) -> bool:
    if isinstance(tech, Leontief):
        return True
    if isinstance(tech, Linear):
        unit = W / np.asarray(tech.coefficients)
    elif isinstance(tech, CES) and tech.rho == 1.0:
        unit = W / np.asarray(tech.shares)
    else:
        return False
    return int(np.sum(np.isclose(unit, unit.min(), rtol=1e-9, atol=0.0))) > 1


def shephard_residuals(
    tech: Technology, W, y: float, config: SolverConfig = DEFAULT_CONFIG
) -> ResidualCheck:
    """``|dC/dW_i - x_i^c| / max(1, |x_i^c|)`` with ``dC/dW_i`` by finite differences.

    Leontief technologies and tied linear technologies are flagged and use
    forward differences.
    """
    W = as_prices(W, tech)
    sol = solve_cost_min(tech, W, y, config)
    kinked = _kinked_in_prices(tech, W)

    def cost_at(prices):
        return cost_function(tech, prices, y, config)

    residuals = []
    for i in range(W.size):
        if kinked:
            slope = one_sided_difference(cost_at, W, i)
        else:
            slope = central_difference(cost_at, W, i)
        xi = float(sol.conditional_demands[i])
        residuals.append(abs(slope - xi) / max(1.0, abs(xi)))
    return ResidualCheck("shephard", tuple(residuals), config.lemma_tol, one_sided=kinked)
