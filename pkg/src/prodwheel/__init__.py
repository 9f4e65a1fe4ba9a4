"""Producer theory engine: cost minimisation, cost curves, profit maximisation
under perfect competition and monopoly, and numerical checks of the duality
identities that tie them together."""

__version__ = "0.1.0"

from .config import (  # noqa: E402
    InfeasibleTargetError,
    NonConvergenceError,
    SolverConfig,
    SolverError,
)
from .costmin import CostSolution, FactorPrices, cost_function, shephard_residuals, solve_cost_min  # noqa: E402
from .curves import (  # noqa: E402
    expansion_path,
    optimality_layers,
    revenue_curves,
    sample_cost_curves,
    threshold_points,
)
from .funcspace import (  # noqa: E402
    CES,
    CobbDouglas,
    CustomDemand,
    CustomTechnology,
    Isoelastic,
    Leontief,
    Linear,
    LinearDemand,
    PowerSingleInput,
    eval_inverse_demand,
    eval_technology,
    tech_gradient,
)
from .markets import Monopoly, PerfectCompetition  # noqa: E402
from .profit import (  # noqa: E402
    classify_operation_decision,
    consistency_residual,
    hotelling_residuals,
    solve_profit,
    solve_profit_monopoly,
    solve_profit_pc,
    verify_lemmas,
)
