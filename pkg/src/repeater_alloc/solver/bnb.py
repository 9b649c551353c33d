"""Branch-and-bound for pure binary ILPs."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import SolverError
from ..ilp import Assignment, IlpModel, evaluate
from .lp import LPData, make_engine
from .simplex import INFEASIBLE, OPTIMAL, LPResult

OPTIMAL_STATUS = "optimal"
INFEASIBLE_STATUS = "infeasible"
LIMIT_STATUS = "limit-reached"


@dataclass(frozen=True)
class SolveOptions:
    int_tol: float = 1e-6
    feas_tol: float = 1e-7
    node_limit: int = 1_000_000
    time_limit: float | None = None
    branching: str = "most-fractional"
    search: str = "best-bound"
    lp_engine: str = "auto"

    def __post_init__(self):
        for tol in (self.int_tol, self.feas_tol):
            if not 0 < tol < 1e-3:
                raise ValueError("tolerances must lie in (0, 1e-3)")
        if self.node_limit <= 0 or (self.time_limit is not None and self.time_limit <= 0):
            raise ValueError("limits must be positive")
        if self.branching not in ("most-fractional", "first-fractional"):
            raise ValueError(f"unknown branching rule {self.branching!r}")
        if self.search not in ("best-bound", "depth-first"):
            raise ValueError(f"unknown search {self.search!r}")
        if self.lp_engine not in ("auto", "highs", "tableau"):
            raise ValueError(f"unknown LP engine {self.lp_engine!r}")


@dataclass
class SolveResult:
    status: str
    assignment: Assignment | None
    objective: float
    dual_bound: float
    nodes: int
    wall_time: float
    bound_history: list = field(default_factory=list, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL_STATUS


@dataclass
class _Reduced:
    """The model restricted to its free columns."""

    data: LPData
    free: np.ndarray  # column indices into the full model
    base: np.ndarray  # full-length vector holding the fixed values
    offset: float  # objective contribution of the fixed columns
    integral: bool

    def expand(self, x_free) -> np.ndarray:
        x = self.base.copy()
        x[self.free] = x_free
        return x


def _presolve(model: IlpModel, data: LPData, tol: float):
    """Project fixed columns out of the LP; None if a fixing alone violates a row."""
    base = np.zeros(model.n_vars)
    is_free = np.ones(model.n_vars, dtype=bool)
    for i, v in model.fixed.items():
        base[i] = v
        is_free[i] = False
    free = np.flatnonzero(is_free)
    A = data.A
    shift = A @ base
    Af = A[:, free].tocsr()
    lo, hi = data.row_lo - shift, data.row_hi - shift
    empty = np.diff(Af.indptr) == 0
    if np.any(empty & ((lo > tol) | (hi < -tol))):
        return None
    keep = ~empty
    reduced = LPData(data.c[free], Af[keep], lo[keep], hi[keep])
    c_used = np.concatenate([data.c[free], data.c[base != 0]])
    integral = bool(np.all(np.abs(c_used - np.round(c_used)) < 1e-12))
    return _Reduced(reduced, free, base, float(data.c @ base), integral)


def solve(model: IlpModel, opts: SolveOptions | None = None) -> SolveResult:
    """Exact minimisation by LP-based branch-and-bound.

    Nodes are evaluated eagerly: a child's LP is solved when it is created and
    it enters the queue keyed by that bound. Equal bounds go deepest first,
    then by creation order, so runs are deterministic.
    """
    opts = opts or SolveOptions()
    t0 = time.perf_counter()
    red = _presolve(model, LPData.from_model(model), opts.feas_tol)
    if red is None:
        return SolveResult(INFEASIBLE_STATUS, None, math.inf, math.inf, 0, time.perf_counter() - t0)
    n_free = len(red.free)
    engine = make_engine(opts.lp_engine, red.data)
    integral_obj = red.integral

    def relax(fixes):
        lb, ub = np.zeros(n_free), np.ones(n_free)
        for i, v in fixes:
            lb[i] = ub[i] = v
        if n_free == 0:
            res = LPResult(OPTIMAL, np.zeros(0), 0.0)
            if red.data.A.shape[0]:
                ax = red.data.A @ res.x
                if np.any(ax < red.data.row_lo - opts.feas_tol) or np.any(ax > red.data.row_hi + opts.feas_tol):
                    res = LPResult(INFEASIBLE, None, math.inf)
        else:
            res = engine(lb, ub)
        if res.status not in (OPTIMAL, INFEASIBLE):
            raise SolverError(f"LP relaxation failed: {res.status}")
        if res.status == OPTIMAL:
            res = LPResult(OPTIMAL, res.x, res.value + red.offset)
        return res

    def pick(x):
        frac = np.abs(x - np.round(x))
        cand = np.flatnonzero(frac > opts.int_tol)
        if cand.size == 0:
            return None
        if opts.branching == "first-fractional":
            return int(cand[0])
        # argmax returns the first index among equals: ties go to declaration order
        return int(cand[np.argmax(-np.abs(x[cand] - 0.5))])

    best_x, best_val = None, math.inf

    def node_bound(value):
        # with integer objective coefficients the LP bound rounds up
        return math.ceil(value - 1e-6) if integral_obj else round(value, 9)

    def prunable(bound):
        if best_x is None:
            return False
        if integral_obj:
            return math.ceil(bound - 1e-6) >= best_val - 1e-9
        return bound >= best_val - 1e-9 * max(1.0, abs(best_val))

    counter = itertools.count()
    nodes = 1
    root = relax(())
    history = []
    if root.status == INFEASIBLE:
        return SolveResult(INFEASIBLE_STATUS, None, math.inf, math.inf, nodes, time.perf_counter() - t0)
    open_nodes = []  # (key, seq, bound, fixes, x)

    def push(res, fixes, depth):
        nonlocal best_x, best_val
        j = pick(res.x)
        if j is None:
            if res.value < best_val:
                best_x, best_val = np.round(res.x).astype(np.int8), res.value
            return
        bound = node_bound(res.value)
        if opts.search == "best-bound":
            # equal bounds: deeper node first, which dives towards an incumbent
            key = (bound, -depth)
        else:
            key = (-depth, bound)
        heapq.heappush(open_nodes, (key, next(counter), bound, fixes, res.x))

    push(root, (), 0)
    status = OPTIMAL_STATUS
    dual = node_bound(root.value)
    while open_nodes:
        if opts.search == "best-bound":
            dual = max(dual, open_nodes[0][2])
        else:
            dual = max(dual, min(n[2] for n in open_nodes))
        if best_x is not None:
            dual = min(dual, best_val)
        history.append(dual)
        if nodes >= opts.node_limit or (
            opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit
        ):
            status = LIMIT_STATUS
            break
        _, _, bound, fixes, x = heapq.heappop(open_nodes)
        if prunable(bound):
            continue
        j = pick(x)
        # explore the rounding direction first
        first = 1 if x[j] >= 0.5 else 0
        for v in (first, 1 - first):
            child = fixes + ((j, v),)
            res = relax(child)
            nodes += 1
            if res.status == INFEASIBLE or prunable(res.value):
                continue
            push(res, child, len(child))

    wall = time.perf_counter() - t0
    if best_x is None:
        if status == LIMIT_STATUS:
            return SolveResult(LIMIT_STATUS, None, math.inf, dual, nodes, wall, history)
        return SolveResult(INFEASIBLE_STATUS, None, math.inf, math.inf, nodes, wall, history)
    assignment = Assignment(model, np.round(red.expand(best_x)).astype(np.int8))
    if status == OPTIMAL_STATUS:
        dual = assignment.objective_value
        history.append(dual)
    report = evaluate(model, assignment, tol=1e-6)
    if not report.feasible:
        raise SolverError(f"incumbent violates constraints: {report.violations[:3]}")
    return SolveResult(status, assignment, assignment.objective_value, dual, nodes, wall, history)
