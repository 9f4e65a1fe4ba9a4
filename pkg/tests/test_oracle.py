import math

import numpy as np
import pytest

from prodwheel.funcspace import CobbDouglas, Isoelastic, Linear, PowerSingleInput
from prodwheel.markets import Monopoly, PerfectCompetition
from prodwheel.oracle import (
    GridSpec,
    central_difference,
    fd_step,
    grid_cost_oracle,
    grid_profit_oracle,
    one_sided_difference,
)

SQRT = PowerSingleInput(1.0, 0.5)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec((1.0,), (0.0,), (0.1,))
    with pytest.raises(ValueError):
        GridSpec((0.0,), (1.0,), (0.0,))
    with pytest.raises(ValueError):
        GridSpec.uniform(0.0, 1.0, 1e-4, 2)  # 1e8 points
    assert GridSpec.uniform(0.0, 1.0, 0.25, 2).shape == (5, 5)


def test_cost_oracle_square_root():
    res = grid_cost_oracle(SQRT, [1.0], 3.0, GridSpec((0.0,), (20.0,), (1e-3,)))
    assert res.x_best[0] == pytest.approx(9.0, abs=1e-3)
    assert res.cost_best == pytest.approx(9.0, abs=1e-3)
    assert res.resolution_bound == pytest.approx(1e-3)


def test_cost_oracle_zero_output():
    res = grid_cost_oracle(CobbDouglas(1.0, (0.5, 0.5)), [1.0, 2.0], 0.0, GridSpec.uniform(0, 2, 0.1, 2))
    np.testing.assert_array_equal(res.x_best, [0.0, 0.0])
    assert res.cost_best == 0.0


def test_cost_oracle_tie_break_is_lexicographic():
    # equal prices and coefficients: every bundle on x1 + x2 = 2 costs the same
    res = grid_cost_oracle(Linear((1.0, 1.0)), [1.0, 1.0], 2.0, GridSpec.uniform(0, 3, 0.5, 2))
    np.testing.assert_array_equal(res.x_best, [0.0, 2.0])


def test_cost_oracle_includes_fixed_cost_and_errors():
    tech = PowerSingleInput(1.0, 0.5, fixed_cost=2.0)
    assert grid_cost_oracle(tech, [1.0], 1.0, GridSpec((0.0,), (2.0,), (0.5,))).cost_best == 3.0
    with pytest.raises(ValueError, match="no grid point"):
        grid_cost_oracle(SQRT, [1.0], 10.0, GridSpec((0.0,), (2.0,), (0.5,)))
    with pytest.raises(ValueError):
        grid_cost_oracle(SQRT, [1.0], 1.0, GridSpec.uniform(0, 2, 0.5, 2))


def test_oracles_are_reproducible():
    grid = GridSpec.uniform(0.0, 4.0, 0.01, 2)
    tech = CobbDouglas(1.0, (0.3, 0.6))
    a = grid_cost_oracle(tech, [1.0, 2.0], 1.3, grid)
    b = grid_cost_oracle(tech, [1.0, 2.0], 1.3, grid)
    assert a.cost_best == b.cost_best
    np.testing.assert_array_equal(a.x_best, b.x_best)


def test_profit_oracle_examples():
    res = grid_profit_oracle(SQRT, [1.0], PerfectCompetition(2.0), GridSpec((0.0,), (5.0,), (1e-3,)))
    assert res.y_best == pytest.approx(1.0, abs=1e-3)
    res = grid_profit_oracle(PowerSingleInput(1.0, 1.0), [1.0], Monopoly(Isoelastic(1.0, 0.5)),
                             GridSpec((1e-4,), (2.0,), (1e-4,)))
    assert res.y_best == pytest.approx(0.25, abs=1e-4)
    assert res.profit_best == pytest.approx(0.25, abs=1e-6)


def test_profit_oracle_plateau_returns_smallest_output():
    # constant returns at price equal to unit cost: profit is 0 everywhere
    res = grid_profit_oracle(PowerSingleInput(1.0, 1.0), [2.0], 2.0, GridSpec((0.0,), (5.0,), (0.5,)))
    assert res.y_best == 0.0
    assert res.profit_best == 0.0


def test_profit_oracle_with_nested_cost_grid():
    res = grid_profit_oracle(SQRT, [1.0], 2.0, GridSpec((0.0,), (2.0,), (0.05,)),
                             cost="grid", cost_grid=GridSpec((0.0,), (5.0,), (1e-3,)))
    assert res.y_best == pytest.approx(1.0, abs=0.05)
    assert res.profit_best == pytest.approx(1.0, abs=1e-2)


def test_central_difference_examples():
    assert central_difference(lambda v: v * v, 3.0) == pytest.approx(6.0, abs=1e-6)

    def profit(p):
        P, W = p
        return P**2 / (4 * W)

    assert central_difference(profit, [2.0, 1.0], 0) == pytest.approx(1.0, abs=1e-8)
    assert central_difference(profit, [2.0, 1.0], 1) == pytest.approx(-1.0, abs=1e-8)


def test_central_difference_is_second_order():
    f, exact = math.exp, math.exp(1.0)
    errors = [abs(central_difference(f, 1.0, h=h) - exact) for h in (1e-2, 5e-3, 2.5e-3)]
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine == pytest.approx(4.0, rel=0.02)


def test_one_sided_difference_and_step():
    assert one_sided_difference(lambda v: abs(v), 0.0, side=1) == 1.0
    assert one_sided_difference(lambda v: abs(v), 0.0, side=-1) == -1.0
    assert fd_step(1e-3) == fd_step(1.0)
    assert fd_step(100.0) == pytest.approx(100 * fd_step(1.0))
