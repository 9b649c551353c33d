"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c x`` subject to ``row_lo <= A x <= row_hi`` and
``lb <= x <= ub`` where every column has finite bounds. Intended for the small
relaxations met in tests and desk-scale runs; the tableau is dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL, INFEASIBLE, ITERATION_LIMIT = "optimal", "infeasible", "iteration-limit"


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    value: float


class Tableau:
    """Canonical-form tableau ``min c y, T y = b, y >= 0`` with a tracked basis."""

    def __init__(self, A, b, c, basis, eps):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.T[m, :n] = c
        self.basis = list(basis)
        self.eps = eps
        for i, j in enumerate(self.basis):
            self.T[m] -= self.T[m, j] * self.T[i]

    @property
    def m(self):
        return self.T.shape[0] - 1

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j

    def run(self, allowed: np.ndarray, max_iter: int) -> str:
        T, eps = self.T, self.eps
        for _ in range(max_iter):
            red = T[-1, :-1]
            cand = np.flatnonzero((red < -eps) & allowed)
            if cand.size == 0:
                return OPTIMAL
            j = cand[0]  # Bland: lowest-index improving column
            colj = T[:-1, j]
            rows = np.flatnonzero(colj > eps)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / colj[rows]
            best = ratios.min()
            ties = rows[ratios <= best + eps * max(1.0, abs(best))]
            r = min(ties, key=lambda i: self.basis[i])  # Bland: lowest basic index leaves
            self.pivot(r, j)
        return ITERATION_LIMIT

    def solution(self, n):
        y = np.zeros(self.T.shape[1] - 1)
        for i, j in enumerate(self.basis):
            y[j] = self.T[i, -1]
        return y[:n]


def solve_lp(c, A, row_lo, row_hi, lb, ub, *, tol: float = 1e-9, max_iter: int = 50_000) -> LPResult:
    """Two-phase simplex on a bounded-variable LP (dense input or scipy sparse)."""
    c = np.asarray(c, float)
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A, float)
    lb = np.asarray(lb, float)
    ub = np.asarray(ub, float)
    n = c.size
    if np.any(lb > ub + tol):
        return LPResult(INFEASIBLE, None, np.inf)

    # shift x = lb + z, 0 <= z <= ub - lb; drop fixed columns
    free = np.flatnonzero(ub - lb > tol)
    shift = A @ lb if A.size else np.zeros(A.shape[0])
    const = float(c @ lb)
    Af = A[:, free]
    width = (ub - lb)[free]

    rows, rhs, kinds = [], [], []
    for i in range(A.shape[0]):
        lo, hi = row_lo[i] - shift[i], row_hi[i] - shift[i]
        if not np.any(np.abs(Af[i]) > 0):
            if lo > tol or hi < -tol:
                return LPResult(INFEASIBLE, None, np.inf)
            continue
        if np.isfinite(lo) and np.isfinite(hi) and abs(hi - lo) <= tol:
            rows.append(Af[i]); rhs.append(lo); kinds.append(0)
            continue
        if np.isfinite(hi):
            rows.append(Af[i]); rhs.append(hi); kinds.append(1)
        if np.isfinite(lo):
            rows.append(-Af[i]); rhs.append(-lo); kinds.append(1)
    for k, w in enumerate(width):
        e = np.zeros(free.size)
        e[k] = 1.0
        rows.append(e); rhs.append(w); kinds.append(1)

    nf = free.size
    m = len(rows)
    if m == 0:
        z = np.zeros(nf)
        x = lb.copy()
        return LPResult(OPTIMAL, x, const)
    M = np.array(rows)
    b = np.array(rhs, float)
    kinds = np.array(kinds)
    n_slack = int(kinds.sum())
    # columns: [z (nf) | slacks | artificials]
    S = np.zeros((m, n_slack))
    S[np.flatnonzero(kinds == 1), np.arange(n_slack)] = 1.0
    full = np.hstack([M, S])
    neg = b < 0
    full[neg] *= -1
    b = np.abs(b)
    basis = [-1] * m
    slack_rows = np.flatnonzero(kinds == 1)
    for col, r in enumerate(slack_rows):
        if not neg[r]:
            basis[r] = nf + col
    need = [r for r in range(m) if basis[r] < 0]
    n_art = len(need)
    art = np.zeros((m, n_art))
    for a, r in enumerate(need):
        art[r, a] = 1.0
        basis[r] = nf + n_slack + a
    ncols = nf + n_slack + n_art
    big = np.hstack([full, art])

    c1 = np.zeros(ncols)
    c1[nf + n_slack:] = 1.0
    tab = Tableau(big, b, c1, basis, tol)
    allowed = np.ones(ncols, dtype=bool)
    status = tab.run(allowed, max_iter)
    if status == ITERATION_LIMIT:
        return LPResult(ITERATION_LIMIT, None, np.nan)
    if -tab.T[-1, -1] > 1e-7 * max(1.0, float(b.max(initial=0.0))):
        return LPResult(INFEASIBLE, None, np.inf)

    # drive artificials out of the basis where possible
    for r in range(m):
        if tab.basis[r] >= nf + n_slack:
            row = tab.T[r, : nf + n_slack]
            nz = np.flatnonzero(np.abs(row) > tol)
            if nz.size:
                tab.pivot(r, nz[0])
    allowed[nf + n_slack:] = False

    c2 = np.zeros(ncols)
    c2[:nf] = c[free]
    tab.T[-1] = 0.0
    tab.T[-1, :ncols] = c2
    for i, j in enumerate(tab.basis):
        if tab.T[-1, j] != 0:
            tab.T[-1] -= tab.T[-1, j] * tab.T[i]
    status = tab.run(allowed, max_iter)
    if status != OPTIMAL:
        return LPResult(status, None, np.nan)
    z = tab.solution(nf)
    x = lb.copy()
    x[free] += z
    return LPResult(OPTIMAL, x, float(c @ x))
