"""Group-level allocation: successive convex approximation around an inner convex solver."""

from .inner import ConvexSubproblem, InnerResult, inner_convex_solve, kkt_residual
from .solver import (FeasibilityReport, GroupBudget, GroupUser, LinearizationPoint, SolveConfig, SolveResult,
                     feasibility_check, linearization_point, solve_group, solve_group_sp1, solve_group_sp2)
from .surrogates import (McCormickBounds, envelope_interval, linearize_inv_rate, mccormick_envelope,
                         quadratic_transform_step)

__all__ = [
    "ConvexSubproblem", "FeasibilityReport", "GroupBudget", "GroupUser", "InnerResult", "LinearizationPoint",
    "McCormickBounds", "SolveConfig", "SolveResult", "envelope_interval", "feasibility_check",
    "inner_convex_solve", "kkt_residual", "linearization_point", "linearize_inv_rate", "mccormick_envelope",
    "quadratic_transform_step", "solve_group", "solve_group_sp1", "solve_group_sp2",
]
