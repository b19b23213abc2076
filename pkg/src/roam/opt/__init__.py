from .model import INF, FlowNetwork, LPModel, MILPModel, Solution, SolveStatus
from .lp import solve_lp
from .flow import solve_min_cost_flow
from .milp import solve_milp
from .norms import linearize_norm_ball
from .duality import dual_model, dualize_into

__all__ = [
    "INF",
    "FlowNetwork",
    "LPModel",
    "MILPModel",
    "Solution",
    "SolveStatus",
    "solve_lp",
    "solve_min_cost_flow",
    "solve_milp",
    "linearize_norm_ball",
    "dual_model",
    "dualize_into",
]
