"""Exhaustive enumeration over all 0/1 assignments; the test oracle."""

from __future__ import annotations

import math
import time

import numpy as np

from ..errors import SolverError
from ..ilp import EQ, GE, LE, Assignment, IlpModel
from .bnb import INFEASIBLE_STATUS, OPTIMAL_STATUS, SolveResult

_CHUNK_BITS = 14


def brute_force(model: IlpModel, cap: int = 24, tol: float = 1e-9) -> SolveResult:
    """Enumerate every assignment of the free variables; ties keep the lowest index.

    Fixed variables hold their values. Assignment number ``a`` sets the ``j``-th
    free variable to bit ``j`` of ``a``, which orders full vectors the same way
    as enumerating all variables would. ``cap`` bounds the free count.
    """
    free = np.array([i for i in range(model.n_vars) if i not in model.fixed], dtype=np.int64)
    n = free.size
    if n > cap:
        raise SolverError(f"brute force limited to {cap} free variables, model has {n}")
    t0 = time.perf_counter()
    A = model.matrix().toarray()
    rhs = np.array([c.rhs for c in model.constraints])
    senses = [c.sense for c in model.constraints]
    le = np.array([s == LE for s in senses], dtype=bool)
    ge = np.array([s == GE for s in senses], dtype=bool)
    eq = np.array([s == EQ for s in senses], dtype=bool)
    c = model.objective_vector()
    base = np.zeros(model.n_vars, dtype=np.int8)
    for i, v in model.fixed.items():
        base[i] = v

    best_val, best_x = math.inf, None
    chunk = 1 << min(n, _CHUNK_BITS)
    bits = np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, chunk):
        ids = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        X = np.tile(base, (ids.size, 1))
        X[:, free] = (ids[:, None] >> bits) & 1
        ok = np.ones(ids.size, dtype=bool)
        if A.shape[0]:
            act = X @ A.T
            ok &= np.all(act[:, le] <= rhs[le] + tol, axis=1)
            ok &= np.all(act[:, ge] >= rhs[ge] - tol, axis=1)
            ok &= np.all(np.abs(act[:, eq] - rhs[eq]) <= tol, axis=1)
        if not ok.any():
            continue
        vals = X[ok] @ c
        k = int(np.argmin(vals))
        if vals[k] < best_val - tol:
            best_val, best_x = float(vals[k]), X[ok][k].copy()
    wall = time.perf_counter() - t0
    if best_x is None:
        return SolveResult(INFEASIBLE_STATUS, None, math.inf, math.inf, 1 << n, wall)
    a = Assignment(model, best_x)
    return SolveResult(OPTIMAL_STATUS, a, a.objective_value, a.objective_value, 1 << n, wall)
