"""Production technologies and inverse demand functions.

Every technology evaluates on arrays whose last axis indexes inputs, so the
same object serves the solvers (one bundle at a time) and the brute-force
oracles (whole grids at once).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, NamedTuple, Sequence

import numpy as np

from .expr import ExprAst, evaluate, parse_expression

__all__ = [
    "Technology",
    "CobbDouglas",
    "CES",
    "Leontief",
    "Linear",
    "PowerSingleInput",
    "CustomTechnology",
    "InverseDemand",
    "Isoelastic",
    "LinearDemand",
    "CustomDemand",
    "Gradient",
    "DomainError",
    "eval_technology",
    "tech_gradient",
    "eval_inverse_demand",
    "technology_from_dict",
    "technology_to_dict",
    "demand_from_dict",
    "demand_to_dict",
]

_FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)
_MONOTONE_POINTS = 101
_MONOTONE_BUDGET = 1_100_000


class DomainError(ValueError):
    """Argument outside the domain of a technology or demand function."""


class Gradient(NamedTuple):
    values: np.ndarray
    # True when evaluated at a kink and ``values`` is a one-sided derivative
    one_sided: bool = False


def _floats(values, name: str, positive: bool = True) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        raise ValueError(f"{name} must not be empty")
    if positive and not all(v > 0 and math.isfinite(v) for v in out):
        raise ValueError(f"{name} must be finite and > 0, got {out}")
    return out


def _check_fixed_cost(fixed_cost: float) -> None:
    if not (math.isfinite(fixed_cost) and fixed_cost >= 0):
        raise ValueError(f"fixed_cost must be finite and >= 0, got {fixed_cost}")


def _rts_label(degree: float | None) -> str | None:
    if degree is None:
        return None
    if abs(degree - 1.0) <= 1e-12:
        return "CRS"
    return "DRS" if degree < 1.0 else "IRS"


def _central_gradient(func, x: np.ndarray) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        h = _FD_STEP * max(1.0, abs(x[i]))
        up = x.copy()
        up[i] += h
        if x[i] - h >= 0.0:
            down = x.copy()
            down[i] -= h
            grad[i] = (func(up) - func(down)) / (2.0 * h)
        else:
            grad[i] = (func(up) - func(x)) / h
    return grad


class Technology:
    """Base class for production functions ``y = f(x)``.

    Subclasses implement ``output`` (vectorised over leading axes) and
    optionally an analytic ``_gradient``.
    """

    family: ClassVar[str] = ""
    input_count: int
    fixed_cost: float

    def output(self, x):
        raise NotImplementedError

    def gradient(self, x) -> Gradient:
        x = np.asarray(x, dtype=float)
        return Gradient(_central_gradient(lambda v: float(self.output(v)), x))

    @property
    def scale_elasticity(self) -> float | None:
        """Degree of homogeneity, or None when the family has none."""
        return None

    @property
    def returns_to_scale(self) -> str | None:
        return _rts_label(self.scale_elasticity)

    def __call__(self, x) -> float:
        return eval_technology(self, x)


@dataclass(frozen=True)
class CobbDouglas(Technology):
    scale: float
    exponents: tuple[float, ...]
    fixed_cost: float = 0.0
    family: ClassVar[str] = "cobb_douglas"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be > 0, got {self.scale}")
        object.__setattr__(self, "exponents", _floats(self.exponents, "exponents"))
        _check_fixed_cost(self.fixed_cost)

    @property
    def input_count(self) -> int:
        return len(self.exponents)

    @property
    def scale_elasticity(self) -> float:
        return float(sum(self.exponents))

    def output(self, x):
        x = np.asarray(x, dtype=float)
        return self.scale * np.prod(x ** np.asarray(self.exponents), axis=-1)

    def gradient(self, x) -> Gradient:
        x = np.asarray(x, dtype=float)
        y = self.output(x)
        return Gradient(np.asarray(self.exponents) * y / x)


@dataclass(frozen=True)
class CES(Technology):
    """``y = A * (sum_i s_i x_i^rho)^(degree/rho)`` with ``rho <= 1``, ``rho != 0``."""

    scale: float
    shares: tuple[float, ...]
    rho: float
    degree: float = 1.0
    fixed_cost: float = 0.0
    family: ClassVar[str] = "ces"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be > 0, got {self.scale}")
        object.__setattr__(self, "shares", _floats(self.shares, "shares"))
        if not (self.rho <= 1.0 and self.rho != 0.0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must satisfy rho <= 1 and rho != 0, got {self.rho}")
        if not (self.degree > 0 and math.isfinite(self.degree)):
            raise ValueError(f"degree must be > 0, got {self.degree}")
        _check_fixed_cost(self.fixed_cost)

    @property
    def input_count(self) -> int:
        return len(self.shares)

    @property
    def scale_elasticity(self) -> float:
        return float(self.degree)

    def _aggregate(self, x):
        with np.errstate(divide="ignore"):
            return np.sum(np.asarray(self.shares) * x ** self.rho, axis=-1)

    def output(self, x):
        x = np.asarray(x, dtype=float)
        s = self._aggregate(x)
        with np.errstate(divide="ignore"):
            y = self.scale * s ** (self.degree / self.rho)
        # rho < 0: a zero input sends the aggregate to +inf and output to 0
        return np.where(np.isfinite(s), y, 0.0)

    def gradient(self, x) -> Gradient:
        x = np.asarray(x, dtype=float)
        s = self._aggregate(x)
        y = self.output(x)
        return Gradient(self.degree * y * np.asarray(self.shares) * x ** (self.rho - 1.0) / s)


@dataclass(frozen=True)
class Leontief(Technology):
    """Fixed proportions: ``y = min_i c_i x_i``."""

    coefficients: tuple[float, ...]
    fixed_cost: float = 0.0
    family: ClassVar[str] = "leontief"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _floats(self.coefficients, "coefficients"))
        _check_fixed_cost(self.fixed_cost)

    @property
    def input_count(self) -> int:
        return len(self.coefficients)

    @property
    def scale_elasticity(self) -> float:
        return 1.0

    def output(self, x):
        x = np.asarray(x, dtype=float)
        return np.min(np.asarray(self.coefficients) * x, axis=-1)

    def gradient(self, x) -> Gradient:
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.coefficients)
        effective = c * x
        lowest = effective.min()
        binding = np.isclose(effective, lowest, rtol=1e-12, atol=0.0)
        # at a kink report the left derivative: shrinking a binding input loses c_i
        return Gradient(np.where(binding, c, 0.0), one_sided=bool(binding.sum() > 1))


@dataclass(frozen=True)
class Linear(Technology):
    """Perfect substitutes: ``y = sum_i c_i x_i``."""

    coefficients: tuple[float, ...]
    fixed_cost: float = 0.0
    family: ClassVar[str] = "linear"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _floats(self.coefficients, "coefficients"))
        _check_fixed_cost(self.fixed_cost)

    @property
    def input_count(self) -> int:
        return len(self.coefficients)

    @property
    def scale_elasticity(self) -> float:
        return 1.0

    def output(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(np.asarray(self.coefficients) * x, axis=-1)

    def gradient(self, x) -> Gradient:
        return Gradient(np.asarray(self.coefficients, dtype=float).copy())


@dataclass(frozen=True)
class PowerSingleInput(Technology):
    """``y = A * x^alpha`` with one input."""

    scale: float
    exponent: float
    fixed_cost: float = 0.0
    family: ClassVar[str] = "power"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        _check_fixed_cost(self.fixed_cost)

    @property
    def input_count(self) -> int:
        return 1

    @property
    def scale_elasticity(self) -> float:
        return float(self.exponent)

    def output(self, x):
        x = np.asarray(x, dtype=float)
        return self.scale * x[..., 0] ** self.exponent

    def gradient(self, x) -> Gradient:
        x = np.asarray(x, dtype=float)
        return Gradient(self.scale * self.exponent * x ** (self.exponent - 1.0))


def _input_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


@dataclass(frozen=True)
class CustomTechnology(Technology):
    """Technology given by an expression over ``x1 .. xn``.

    At construction the expression is sampled on a 101-point-per-axis grid
    over ``[0, box]^n`` and rejected unless it is finite, non-negative and
    nondecreasing along every axis there. For many inputs the points per axis
    are reduced so the grid stays near one million points.
    """

    expression: str
    input_count: int
    fixed_cost: float = 0.0
    box: float = 10.0
    ast: ExprAst = field(init=False, repr=False, compare=False)
    family: ClassVar[str] = "custom"

    def __post_init__(self):
        if int(self.input_count) != self.input_count or self.input_count < 1:
            raise ValueError(f"input_count must be a positive integer, got {self.input_count}")
        if not (self.box > 0 and math.isfinite(self.box)):
            raise ValueError(f"box must be > 0, got {self.box}")
        _check_fixed_cost(self.fixed_cost)
        object.__setattr__(
            self, "ast", parse_expression(self.expression, _input_names(self.input_count))
        )
        self._check_monotone()

    def output(self, x):
        x = np.asarray(x, dtype=float)
        env = {f"x{i + 1}": x[..., i] for i in range(self.input_count)}
        value = evaluate(self.ast, env)
        return np.broadcast_to(np.asarray(value, dtype=float), x.shape[:-1]) * 1.0

    def _check_monotone(self) -> None:
        n = self.input_count
        points = _MONOTONE_POINTS
        while points ** n > _MONOTONE_BUDGET and points > 3:
            points -= 1
        axis = np.linspace(0.0, self.box, points)
        grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1)
        y = self.output(grid)
        if not np.all(np.isfinite(y)):
            raise ValueError(f"expression {self.expression!r} is not finite on [0, {self.box}]^{n}")
        tol = 1e-12 * max(1.0, float(np.max(np.abs(y))))
        if np.min(y) < -tol:
            raise ValueError(f"expression {self.expression!r} takes negative values for x >= 0")
        for i in range(n):
            if np.min(np.diff(y, axis=i)) < -tol:
                raise ValueError(
                    f"expression {self.expression!r} is decreasing in x{i + 1} on the sample grid"
                )


def eval_technology(tech: Technology, x: Sequence[float]) -> float:
    """Output of ``tech`` at a single input bundle."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != tech.input_count:
        raise DomainError(f"expected {tech.input_count} inputs, got shape {x.shape}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError(f"inputs must be finite and >= 0, got {x.tolist()}")
    return float(tech.output(x))


def tech_gradient(tech: Technology, x: Sequence[float]) -> Gradient:
    """Marginal products at ``x``; analytic for built-in families."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != tech.input_count:
        raise DomainError(f"expected {tech.input_count} inputs, got shape {x.shape}")
    if np.any(x <= 0):
        raise DomainError(f"gradient requires x > 0, got {x.tolist()}")
    return tech.gradient(x)


# --------------------------------------------------------------------------
# inverse demand


class InverseDemand:
    """Base class for inverse demand ``P(Y)`` on a validity domain."""

    family: ClassVar[str] = ""

    @property
    def domain(self) -> tuple[float, float]:
        raise NotImplementedError

    def contains(self, Y: float) -> bool:
        lo, hi = self.domain
        return lo <= Y <= hi

    def _price(self, Y):
        raise NotImplementedError

    def _marginal_revenue(self, Y):
        # d(P(Y) Y)/dY by central differences, one-sided near the domain edges
        lo, hi = self.domain
        h = _FD_STEP * max(1.0, abs(Y))
        a, b = max(lo, Y - h), min(hi, Y + h)
        if a == b:
            raise DomainError(f"domain too narrow to differentiate at Y={Y}")
        return (self._price(b) * b - self._price(a) * a) / (b - a)

    def price(self, Y: float) -> float:
        if not (math.isfinite(Y) and self.contains(Y)):
            raise DomainError(f"Y={Y} outside demand domain {self.domain}")
        return float(self._price(Y))

    def marginal_revenue(self, Y: float) -> float:
        if not (math.isfinite(Y) and self.contains(Y)):
            raise DomainError(f"Y={Y} outside demand domain {self.domain}")
        return float(self._marginal_revenue(Y))

    def parameter_names(self) -> list[str]:
        raise NotImplementedError

    def __call__(self, Y: float) -> float:
        return self.price(Y)


@dataclass(frozen=True)
class Isoelastic(InverseDemand):
    """``P(Y) = A * Y^(-eta)`` with ``0 < eta < 1``."""

    scale: float
    exponent: float
    upper: float = 1e9
    family: ClassVar[str] = "isoelastic"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if not (0.0 < self.exponent < 1.0):
            raise ValueError(f"exponent must satisfy 0 < eta < 1, got {self.exponent}")

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, self.upper)

    def contains(self, Y: float) -> bool:
        return 0.0 < Y <= self.upper

    def _price(self, Y):
        return self.scale * Y ** (-self.exponent)

    def _marginal_revenue(self, Y):
        return (1.0 - self.exponent) * self.scale * Y ** (-self.exponent)

    def parameter_names(self) -> list[str]:
        return ["demand.scale", "demand.exponent"]


@dataclass(frozen=True)
class LinearDemand(InverseDemand):
    """``P(Y) = a - b Y`` on ``0 <= Y < a/b``."""

    intercept: float
    slope: float
    family: ClassVar[str] = "linear"

    def __post_init__(self):
        if not (self.intercept > 0 and math.isfinite(self.intercept)):
            raise ValueError(f"intercept must be > 0, got {self.intercept}")
        if not (self.slope > 0 and math.isfinite(self.slope)):
            raise ValueError(f"slope must be > 0, got {self.slope}")

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, self.intercept / self.slope)

    def contains(self, Y: float) -> bool:
        return 0.0 <= Y < self.intercept / self.slope

    def _price(self, Y):
        return self.intercept - self.slope * Y

    def _marginal_revenue(self, Y):
        return self.intercept - 2.0 * self.slope * Y

    def parameter_names(self) -> list[str]:
        return ["demand.intercept", "demand.slope"]


@dataclass(frozen=True)
class CustomDemand(InverseDemand):
    """Inverse demand given by an expression in ``Y`` on ``[lower, upper]``.

    Positivity and strict decrease are checked on 101 linearly spaced and 101
    log-spaced interior points at construction.
    """

    expression: str
    lower: float
    upper: float
    ast: ExprAst = field(init=False, repr=False, compare=False)
    family: ClassVar[str] = "custom"

    def __post_init__(self):
        if not (0.0 <= self.lower < self.upper and math.isfinite(self.upper)):
            raise ValueError(f"need 0 <= lower < upper, got ({self.lower}, {self.upper})")
        object.__setattr__(self, "ast", parse_expression(self.expression, ["Y"]))
        lin = np.linspace(self.lower, self.upper, 103)[1:-1]
        lo = max(self.lower, self.upper * 1e-9)
        geo = np.geomspace(lo, self.upper, 103)[1:-1]
        Y = np.unique(np.concatenate([lin, geo]))
        P = np.asarray(self._price(Y), dtype=float)
        if not np.all(np.isfinite(P)) or np.min(P) <= 0:
            raise ValueError(f"demand {self.expression!r} must be finite and > 0 on its domain")
        if np.max(np.diff(P)) >= 0:
            raise ValueError(f"demand {self.expression!r} is not strictly decreasing on its domain")

    @property
    def domain(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def _price(self, Y):
        value = evaluate(self.ast, {"Y": np.asarray(Y, dtype=float)})
        return np.broadcast_to(np.asarray(value, dtype=float), np.shape(Y)) * 1.0

    def parameter_names(self) -> list[str]:
        return ["demand.expression"]


def eval_inverse_demand(demand: InverseDemand, Y: float) -> float:
    return demand.price(Y)


# --------------------------------------------------------------------------
# scenario-file encoding


def technology_from_dict(data: dict[str, Any]) -> Technology:
    family = data["family"]
    fixed_cost = float(data.get("fixed_cost", 0.0))
    if family == "cobb_douglas":
        return CobbDouglas(data.get("scale", 1.0), tuple(data["exponents"]), fixed_cost)
    if family == "ces":
        return CES(
            data.get("scale", 1.0),
            tuple(data["shares"]),
            data["rho"],
            data.get("degree", 1.0),
            fixed_cost,
        )
    if family == "leontief":
        return Leontief(tuple(data["coefficients"]), fixed_cost)
    if family == "linear":
        return Linear(tuple(data["coefficients"]), fixed_cost)
    if family == "power":
        return PowerSingleInput(data.get("scale", 1.0), data["exponent"], fixed_cost)
    if family == "custom":
        return CustomTechnology(
            data["expression"], int(data["inputs"]), fixed_cost, data.get("box", 10.0)
        )
    raise ValueError(f"unknown technology family {family!r}")


def technology_to_dict(tech: Technology) -> dict[str, Any]:
    if isinstance(tech, CobbDouglas):
        body = {"scale": tech.scale, "exponents": list(tech.exponents)}
    elif isinstance(tech, CES):
        body = {"scale": tech.scale, "shares": list(tech.shares), "rho": tech.rho,
                "degree": tech.degree}
    elif isinstance(tech, (Leontief, Linear)):
        body = {"coefficients": list(tech.coefficients)}
    elif isinstance(tech, PowerSingleInput):
        body = {"scale": tech.scale, "exponent": tech.exponent}
    elif isinstance(tech, CustomTechnology):
        body = {"expression": tech.expression, "inputs": tech.input_count, "box": tech.box}
    else:
        raise TypeError(f"cannot encode {type(tech).__name__}")
    return {"family": tech.family, **body, "fixed_cost": tech.fixed_cost}


def demand_from_dict(data: dict[str, Any]) -> InverseDemand:
    family = data["family"]
    if family == "isoelastic":
        return Isoelastic(data.get("scale", 1.0), data["exponent"])
    if family == "linear":
        return LinearDemand(data["intercept"], data["slope"])
    if family == "custom":
        lower, upper = data["domain"]
        return CustomDemand(data["expression"], lower, upper)
    raise ValueError(f"unknown demand family {family!r}")


def demand_to_dict(demand: InverseDemand) -> dict[str, Any]:
    if isinstance(demand, Isoelastic):
        return {"family": "isoelastic", "scale": demand.scale, "exponent": demand.exponent}
    if isinstance(demand, LinearDemand):
        return {"family": "linear", "intercept": demand.intercept, "slope": demand.slope}
    if isinstance(demand, CustomDemand):
        return {"family": "custom", "expression": demand.expression,
                "domain": [demand.lower, demand.upper]}
    raise TypeError(f"cannot encode {type(demand).__name__}")
