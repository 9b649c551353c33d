from .bnb import (
    INFEASIBLE_STATUS,
    LIMIT_STATUS,
    OPTIMAL_STATUS,
    SolveOptions,
    SolveResult,
    solve,
)
from .bridge import solve_external
from .brute import brute_force
from .lp import lp_relax
from .simplex import LPResult, solve_lp

__all__ = [
    "INFEASIBLE_STATUS",
    "LIMIT_STATUS",
    "OPTIMAL_STATUS",
    "LPResult",
    "SolveOptions",
    "SolveResult",
    "brute_force",
    "lp_relax",
    "solve",
    "solve_external",
    "solve_lp",
]
