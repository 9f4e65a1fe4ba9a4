import math

import numpy as np
import pytest

from prodwheel.config import SolverError
from prodwheel.costmin import cost_function
from prodwheel.curves import (
    expansion_path,
    optimality_layers,
    revenue_curves,
    sample_cost_curves,
    threshold_points,
)
from prodwheel.funcspace import (
    CES,
    CobbDouglas,
    CustomTechnology,
    Isoelastic,
    Linear,
    LinearDemand,
    PowerSingleInput,
    eval_technology,
    tech_gradient,
)
from prodwheel.markets import Monopoly, PerfectCompetition
from prodwheel.oracle import central_difference

SQRT = PowerSingleInput(1.0, 0.5)
SQRT_F1 = PowerSingleInput(1.0, 0.5, fixed_cost=1.0)


def test_cost_curve_values():
    (p,) = sample_cost_curves(SQRT, [1.0], [2.0])
    assert (p.AC, p.AVC, p.MC) == pytest.approx((2.0, 2.0, 4.0))
    (p,) = sample_cost_curves(SQRT_F1, [1.0], [1.0])
    assert (p.AC, p.AVC, p.MC) == pytest.approx((2.0, 1.0, 2.0))
    for p in sample_cost_curves(PowerSingleInput(1.0, 1.0), [2.0], [0.1, 1.0, 50.0]):
        assert (p.AC, p.AVC, p.MC) == pytest.approx((2.0, 2.0, 2.0))


def test_cost_curves_need_positive_output():
    with pytest.raises(ValueError):
        sample_cost_curves(SQRT, [1.0], [0.0])


@pytest.mark.parametrize("tech, W", [
    (SQRT_F1, [1.0]),
    (CobbDouglas(1.0, (0.3, 0.4), fixed_cost=2.0), [1.0, 3.0]),
    (CES(1.0, (0.4, 0.6), -0.5, 0.7), [2.0, 1.0]),
    (CustomTechnology("x1^0.3*x2^0.3", 2), [1.0, 1.0]),
    (Linear((1.0, 2.0)), [3.0, 1.0]),
])
def test_marginal_cost_matches_cost_derivative(tech, W):
    for p in sample_cost_curves(tech, W, np.geomspace(0.1, 20.0, 9)):
        dC = central_difference(lambda y: cost_function(tech, W, y), p.y)
        assert abs(p.MC - dC) <= 1e-4 * abs(dC)


def test_thresholds_with_fixed_cost():
    tp = threshold_points(SQRT_F1, [1.0])
    assert tp.y_ZP == pytest.approx(1.0, abs=1e-6)
    assert tp.P_ZeroProfit == pytest.approx(2.0, abs=1e-6)
    assert tp.shutdown.kind == "at_zero"
    assert tp.y_SD == 0.0
    assert tp.P_Shutdown == 0.0
    assert tp.shutdown_degenerate
    assert not tp.coincident_at_zero


def test_thresholds_coincide_at_zero_without_fixed_cost():
    tp = threshold_points(SQRT, [1.0])
    assert tp.coincident_at_zero
    assert tp.P_ZeroProfit == 0.0 and tp.P_Shutdown == 0.0


def test_constant_marginal_cost_thresholds():
    tp = threshold_points(PowerSingleInput(0.5, 1.0, fixed_cost=4.0), [1.5])
    assert tp.no_finite_minimum
    assert tp.zero_profit.kind == "at_infinity"
    assert tp.P_ZeroProfit == pytest.approx(3.0, rel=1e-6)
    assert tp.shutdown.kind == "flat"
    assert tp.P_Shutdown == pytest.approx(3.0, rel=1e-12)


@pytest.mark.parametrize("tech, W", [
    (SQRT_F1, [1.0]),
    (PowerSingleInput(2.0, 0.6, fixed_cost=3.0), [0.7]),
    (CobbDouglas(1.0, (0.3, 0.4), fixed_cost=2.0), [1.0, 3.0]),
    (CES(1.0, (0.4, 0.6), -0.5, 0.7, fixed_cost=0.5), [2.0, 1.0]),
])
def test_zero_profit_point_is_average_cost_minimum(tech, W):
    tp = threshold_points(tech, W)
    y = tp.y_ZP
    (p,) = sample_cost_curves(tech, W, [y])
    assert abs(p.MC - p.AC) <= 1e-6 * p.AC
    for delta in (1e-3, 1e-2):
        left, right = sample_cost_curves(tech, W, [y * (1 - delta), y * (1 + delta)])
        assert left.AC > p.AC and right.AC > p.AC
    assert tp.P_Shutdown <= tp.P_ZeroProfit


def test_u_shaped_average_variable_cost():
    # increasing returns at low output, decreasing later: AVC has an interior minimum
    tech = CustomTechnology("x1^2/(1 + x1^1.5)", 1, box=50.0)
    tp = threshold_points(tech, [1.0])
    assert tp.shutdown.kind == "interior"
    (p,) = sample_cost_curves(tech, [1.0], [tp.y_SD])
    assert abs(p.MC - p.AVC) <= 1e-6 * p.AVC


def test_expansion_path_examples():
    path = expansion_path(SQRT, [1.0], [1.0, 2.0])
    assert [float(p.demands[0]) for p in path] == pytest.approx([1.0, 4.0])

    for p in expansion_path(CobbDouglas(1.0, (0.4, 0.4)), [2.0, 2.0], [0.5, 1.0, 3.0]):
        assert p.demands[0] == pytest.approx(p.demands[1], rel=1e-12)

    # L^(1/3) K^(2/3) at W = (1, 2): K/L = (2/3 * 1) / (1/3 * 2) = 1
    for p in expansion_path(CobbDouglas(1.0, (1 / 3, 2 / 3)), [1.0, 2.0], [0.5, 1.0, 4.0]):
        L, K = p.demands
        assert K / L == pytest.approx(1.0, rel=1e-12)


def test_revenue_curve_examples():
    (pc,) = revenue_curves(PerfectCompetition(2.0), [3.0])
    assert tuple(pc) == (3.0, 6.0, 2.0, 2.0)
    (mono,) = revenue_curves(Monopoly(Isoelastic(1.0, 0.5)), [4.0])
    assert tuple(mono) == pytest.approx((4.0, 2.0, 0.5, 0.25))
    (lin,) = revenue_curves(Monopoly(LinearDemand(10.0, 1.0)), [2.0])
    assert lin.MR == 6.0


def test_marginal_revenue_below_average_revenue():
    for demand in (Isoelastic(2.0, 0.3), LinearDemand(10.0, 1.0)):
        for p in revenue_curves(Monopoly(demand), np.linspace(0.5, 9.5, 19)):
            assert p.MR < p.AR
    for p in revenue_curves(PerfectCompetition(3.0), [0.0, 1.0, 10.0]):
        assert p.MR == p.AR


def test_optimality_layers_example():
    layers = optimality_layers(SQRT, [1.0], PerfectCompetition(2.0))
    y_star, x_star = layers.scale
    assert y_star == pytest.approx(1.0, abs=1e-9)
    assert x_star[0] == pytest.approx(1.0, abs=1e-9)
    for x, h in layers.technical:
        assert h == eval_technology(SQRT, x)
    for p in layers.allocative:
        assert p.demands[0] == pytest.approx(p.y**2, rel=1e-12, abs=1e-15)
    assert any(p.y == y_star for p in layers.allocative)


def test_allocative_layer_satisfies_price_ratios():
    tech = CobbDouglas(1.0, (0.3, 0.2, 0.4))
    W = [1.0, 2.0, 0.5]
    layers = optimality_layers(tech, W, PerfectCompetition(3.0), samples=11)
    for p in layers.allocative:
        if p.y == 0:
            continue
        g = tech_gradient(tech, p.demands).values
        for i in range(3):
            for j in range(3):
                assert abs(W[i] / W[j] - g[i] / g[j]) <= 1e-6 * W[i] / W[j]


def test_optimality_layers_reject_unbounded():
    with pytest.raises(SolverError):
        optimality_layers(PowerSingleInput(1.0, 1.0), [1.0], PerfectCompetition(2.0))


def test_threshold_as_dict_round_numbers():
    d = threshold_points(SQRT_F1, [1.0]).as_dict()
    assert d["zero_profit_kind"] == "interior"
    assert d["shutdown_kind"] == "at_zero"
    assert not math.isnan(d["P_ZeroProfit"])
