import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodwheel.config import InfeasibleTargetError, SolverConfig
from prodwheel.costmin import FactorPrices, cost_function, shephard_residuals, solve_cost_min
from prodwheel.funcspace import (
    CES,
    CobbDouglas,
    CustomTechnology,
    Leontief,
    Linear,
    PowerSingleInput,
    eval_technology,
    tech_gradient,
)
from prodwheel.oracle import GridSpec, closed_form_variable_cost, grid_cost_oracle

SQRT = PowerSingleInput(1.0, 0.5)

INSTANCES = [
    (SQRT, (1.0,)),
    (PowerSingleInput(2.0, 1.4), (3.0,)),
    (CobbDouglas(1.0, (0.3, 0.5)), (1.0, 2.0)),
    (CobbDouglas(1.5, (0.2, 0.3, 0.4)), (2.0, 1.0, 0.5)),
    (CES(1.0, (0.4, 0.6), -1.0), (1.0, 2.0)),
    (CES(1.2, (0.3, 0.7), 0.6, 0.8), (2.0, 1.0)),
    (CES(1.0, (0.5, 0.5), 1.0), (1.0, 3.0)),
    (Leontief((1.0, 2.0)), (1.0, 1.0)),
    (Linear((1.0, 3.0)), (2.0, 3.0)),
    (CustomTechnology("x1^0.4*x2^0.4", 2), (1.0, 2.0)),
    (CustomTechnology("(x1^0.5 + x2^0.5)^1.5", 2), (2.0, 1.0)),
]
IDS = [f"{t.family}-{k}" for k, (t, _) in enumerate(INSTANCES)]


def test_square_root_example():
    sol = solve_cost_min(SQRT, [1.0], 3.0)
    assert sol.conditional_demands[0] == pytest.approx(9.0, rel=1e-15)
    assert sol.total_cost == pytest.approx(9.0, rel=1e-15)
    assert cost_function(SQRT, [1.0], 3.0) == pytest.approx(9.0, rel=1e-15)


def test_symmetric_cobb_douglas_example():
    sol = solve_cost_min(CobbDouglas(1.0, (0.5, 0.5)), [1.0, 1.0], 2.0)
    np.testing.assert_allclose(sol.conditional_demands, [2.0, 2.0], rtol=1e-12)
    assert sol.total_cost == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("tech, W", INSTANCES, ids=IDS)
def test_zero_output_costs_nothing(tech, W):
    sol = solve_cost_min(tech, W, 0.0)
    assert np.all(sol.conditional_demands == 0)
    assert sol.total_cost == 0.0


@pytest.mark.parametrize("tech, W", INSTANCES, ids=IDS)
@pytest.mark.parametrize("y", [0.3, 1.0, 7.5])
def test_feasibility_and_accounting(tech, W, y):
    sol = solve_cost_min(tech, W, y)
    assert abs(eval_technology(tech, sol.conditional_demands) - y) <= 1e-8 * max(1.0, y)
    assert sol.total_cost == float(np.dot(W, sol.conditional_demands)) + tech.fixed_cost
    assert sol.variable_cost == pytest.approx(float(np.dot(W, sol.conditional_demands)), rel=1e-15)


@pytest.mark.parametrize("tech, W", [i for i in INSTANCES if not isinstance(i[0], (Leontief, Linear))
                                     and getattr(i[0], "rho", 0) != 1.0],
                         ids=lambda v: getattr(v, "family", None))
def test_first_order_conditions(tech, W):
    sol = solve_cost_min(tech, W, 2.0)
    grad = tech_gradient(tech, sol.conditional_demands).values
    for wi, gi in zip(W, grad):
        assert abs(wi - sol.marginal_cost * gi) <= 1e-6 * wi


@pytest.mark.parametrize("tech, W", INSTANCES, ids=IDS)
def test_matches_dual_cost_formula(tech, W):
    expected = closed_form_variable_cost(tech, W, 2.0)
    if expected is None:
        pytest.skip("no closed form")
    assert solve_cost_min(tech, W, 2.0).variable_cost == pytest.approx(float(expected), rel=1e-10)


def test_numeric_ces_agrees_with_dual_formula():
    # CES goes through the numerical Lagrangian solver
    rng = np.random.default_rng(11)
    for _ in range(20):
        rho = float(rng.choice([rng.uniform(-3, -0.1), rng.uniform(0.1, 0.9)]))
        shares = tuple(rng.uniform(0.1, 1.0, 3))
        tech = CES(float(rng.uniform(0.5, 2)), shares, rho, float(rng.uniform(0.5, 1.0)))
        W = rng.uniform(0.5, 4.0, 3)
        y = float(rng.uniform(0.1, 10))
        got = solve_cost_min(tech, W, y).variable_cost
        assert got == pytest.approx(float(closed_form_variable_cost(tech, W, y)), rel=1e-9)


@pytest.mark.parametrize("tech, W", [i for i in INSTANCES if i[0].input_count <= 2], ids=lambda v: getattr(v, "family", None))
def test_oracle_dominance(tech, W):
    y = 1.5
    sol = solve_cost_min(tech, W, y)
    upper = 2.5 * float(max(sol.conditional_demands)) + 0.5
    n = tech.input_count
    grid = GridSpec.uniform(0.0, upper, upper / (100_000 if n == 1 else 800), n)
    oracle = grid_cost_oracle(tech, W, y, grid)
    assert sol.total_cost <= oracle.cost_best + oracle.resolution_bound
    assert oracle.cost_best >= sol.total_cost - 1e-9 * sol.total_cost


def test_linear_picks_cheapest_effective_input():
    sol = solve_cost_min(Linear((1.0, 3.0)), [2.0, 3.0], 6.0)
    # input 2 costs 1 per unit of output, input 1 costs 2
    np.testing.assert_allclose(sol.conditional_demands, [0.0, 2.0])
    assert sol.corner
    assert sol.marginal_cost == pytest.approx(1.0)


def test_leontief_uses_fixed_proportions():
    sol = solve_cost_min(Leontief((1.0, 2.0)), [1.0, 4.0], 4.0)
    np.testing.assert_allclose(sol.conditional_demands, [4.0, 2.0])
    assert sol.marginal_cost == pytest.approx(3.0)


def test_fixed_cost_enters_total_only():
    tech = PowerSingleInput(1.0, 0.5, fixed_cost=2.0)
    sol = solve_cost_min(tech, [1.0], 3.0)
    assert sol.variable_cost == pytest.approx(9.0)
    assert sol.total_cost == pytest.approx(11.0)
    assert sol.marginal_cost == pytest.approx(6.0)


def test_unreachable_target_is_infeasible():
    cfg = SolverConfig(box_cap=10.0)
    with pytest.raises(InfeasibleTargetError):
        solve_cost_min(CustomTechnology("x1^0.5*x2^0.5", 2), [1.0, 1.0], 50.0, cfg)
    with pytest.raises(InfeasibleTargetError):
        solve_cost_min(SQRT, [1.0], 50.0, cfg)


def test_factor_prices_validation():
    with pytest.raises(ValueError):
        FactorPrices((1.0, 0.0))
    with pytest.raises(ValueError):
        solve_cost_min(CobbDouglas(1.0, (0.5, 0.5)), [1.0], 1.0)


@pytest.mark.parametrize("tech, W", INSTANCES, ids=IDS)
def test_homogeneity_of_variable_cost(tech, W):
    base = solve_cost_min(tech, W, 2.0).variable_cost
    for t in (0.5, 3.0, 17.0):
        scaled = solve_cost_min(tech, np.multiply(t, W), 2.0).variable_cost
        assert scaled == pytest.approx(t * base, rel=1e-8)


@pytest.mark.parametrize("tech, W", INSTANCES, ids=IDS)
def test_monotone_in_output_and_prices(tech, W):
    ys = [0.1, 0.5, 1.0, 2.0, 4.0]
    costs = [cost_function(tech, W, y) for y in ys]
    assert all(b >= a for a, b in zip(costs, costs[1:]))
    base = cost_function(tech, W, 2.0)
    for i in range(len(W)):
        bumped = list(W)
        bumped[i] *= 1.5
        assert cost_function(tech, bumped, 2.0) >= base - 1e-12 * base


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), theta=st.floats(0.0, 1.0))
def test_variable_cost_concave_in_prices(seed, theta):
    rng = np.random.default_rng(seed)
    tech, _ = INSTANCES[int(rng.integers(len(INSTANCES)))]
    n = tech.input_count
    W1, W2 = rng.uniform(0.2, 5.0, n), rng.uniform(0.2, 5.0, n)
    y = float(rng.uniform(0.2, 5.0))

    def vc(W):
        return solve_cost_min(tech, W, y).variable_cost

    mixed = vc(theta * W1 + (1 - theta) * W2)
    assert mixed >= theta * vc(W1) + (1 - theta) * vc(W2) - 1e-8 * max(1.0, mixed)


def test_shephard_square_root_example():
    check = shephard_residuals(SQRT, [1.0], 3.0)
    assert check.passed
    assert check.max_residual < 1e-8


@pytest.mark.parametrize("tech, W", INSTANCES, ids=IDS)
def test_shephard_at_zero_output(tech, W):
    check = shephard_residuals(tech, W, 0.0)
    assert check.values == (0.0,) * len(W)


def test_shephard_random_cobb_douglas():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        tech = CobbDouglas(float(rng.uniform(0.5, 2)), tuple(rng.uniform(0.1, 0.6, n)))
        check = shephard_residuals(tech, rng.uniform(0.2, 5.0, n), float(rng.uniform(0.1, 10)))
        assert check.passed, check.values
        assert check.max_residual < 1e-4


def test_shephard_on_kinked_costs_uses_one_sided_differences():
    check = shephard_residuals(Leontief((1.0, 2.0)), [1.0, 1.0], 2.0)
    assert check.one_sided
    assert check.passed
    check = shephard_residuals(CustomTechnology("x1^0.3*x2^0.6", 2), [1.0, 2.0], 1.5)
    assert not check.one_sided
    assert check.passed


def test_marginal_cost_at_zero_output():
    assert solve_cost_min(SQRT, [1.0], 0.0).marginal_cost == 0.0
    assert solve_cost_min(Linear((1.0, 3.0)), [2.0, 3.0], 0.0).marginal_cost == pytest.approx(1.0)
