"""LP relaxation engines sharing one calling convention.

An engine is built once per :class:`LPData` and then called with column
bounds ``(lb, ub)``; it returns an :class:`LPResult`.
"""

from __future__ import annotations

import highspy
import numpy as np
import scipy.sparse as sp

from ..ilp import IlpModel
from .simplex import INFEASIBLE, OPTIMAL, LPResult, solve_lp

TABLEAU_MAX_VARS = 150


class LPData:
    """Model rows split once into the ``A_ub x <= b_ub`` / ``A_eq x = b_eq`` form."""

    def __init__(self, c, A, row_lo, row_hi):
        self.c = c
        self.A = A
        self.row_lo = row_lo
        self.row_hi = row_hi
        eq = np.isfinite(row_lo) & np.isfinite(row_hi) & (row_lo == row_hi)
        up = np.isfinite(row_hi) & ~eq
        dn = np.isfinite(row_lo) & ~eq
        parts, rhs = [], []
        if up.any():
            parts.append(A[up]); rhs.append(row_hi[up])
        if dn.any():
            parts.append(-A[dn]); rhs.append(-row_lo[dn])
        self.A_ub = sp.vstack(parts).tocsr() if parts else None
        self.b_ub = np.concatenate(rhs) if rhs else None
        self.A_eq = A[eq] if eq.any() else None
        self.b_eq = row_lo[eq] if eq.any() else None

    @classmethod
    def from_model(cls, model: IlpModel) -> "LPData":
        lo, hi = model.row_bounds()
        return cls(model.objective_vector(), model.matrix(), lo, hi)


class HighsSession:
    """One HiGHS instance per model; later solves only change column bounds.

    Keeping the instance lets the dual simplex restart from the previous basis,
    which is what makes branch-and-bound children cheap.
    """

    def __init__(self, data: LPData):
        A = data.A.tocsc()
        inf = highspy.kHighsInf
        lp = highspy.HighsLp()
        lp.num_col_, lp.num_row_ = A.shape[1], A.shape[0]
        lp.col_cost_ = np.asarray(data.c, float)
        lp.col_lower_ = np.zeros(A.shape[1])
        lp.col_upper_ = np.ones(A.shape[1])
        lp.row_lower_ = np.where(np.isfinite(data.row_lo), data.row_lo, -inf)
        lp.row_upper_ = np.where(np.isfinite(data.row_hi), data.row_hi, inf)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr
        lp.a_matrix_.index_ = A.indices
        lp.a_matrix_.value_ = A.data
        self.n = A.shape[1]
        self._cols = np.arange(self.n, dtype=np.int32)
        self._h = highspy.Highs()
        self._h.setOptionValue("output_flag", False)
        self._h.passModel(lp)

    def __call__(self, lb, ub) -> LPResult:
        h = self._h
        if self.n:
            h.changeColsBounds(self.n, self._cols, np.asarray(lb, float), np.asarray(ub, float))
        h.run()
        status = h.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            x = np.array(h.getSolution().col_value)
            return LPResult(OPTIMAL, x, float(h.getInfo().objective_function_value))
        if status == highspy.HighsModelStatus.kInfeasible:
            return LPResult(INFEASIBLE, None, np.inf)
        return LPResult(f"highs-{h.modelStatusToString(status)}", None, np.nan)


class TableauEngine:
    def __init__(self, data: LPData):
        self.data = data

    def __call__(self, lb, ub) -> LPResult:
        d = self.data
        return solve_lp(d.c, d.A, d.row_lo, d.row_hi, lb, ub)


ENGINES = {"highs": HighsSession, "tableau": TableauEngine}


def make_engine(name: str, data: LPData):
    """Engine bound to ``data``; ``auto`` uses the tableau for small models."""
    if name == "auto":
        name = "tableau" if data.A.shape[1] <= TABLEAU_MAX_VARS else "highs"
    if name not in ENGINES:
        raise ValueError(f"unknown LP engine {name!r}")
    return ENGINES[name](data)


def lp_relax(model: IlpModel, engine: str = "auto") -> LPResult:
    """LP relaxation with every binary relaxed to [0, 1] (fixings kept)."""
    lb = np.zeros(model.n_vars)
    ub = np.ones(model.n_vars)
    for i, v in model.fixed.items():
        lb[i] = ub[i] = v
    return make_engine(engine, LPData.from_model(model))(lb, ub)
