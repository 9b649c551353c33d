"""Hand a model to an external solver through LP files.

The command is a list of argv strings in which ``{lp}`` and ``{sol}`` are
replaced by the path of the LP file written here and the solution file the
solver must produce. The solution file holds one ``name value`` pair per line;
variables it omits are 0. An optional first line ``# status infeasible``
reports infeasibility; anything else is read as an optimal solution.
"""

from __future__ import annotations

import math
import subprocess
import tempfile
import time
from pathlib import Path

from ..errors import SolverError
from ..ilp import IlpModel, evaluate, export_lp_text, parse_solution_text
from .bnb import INFEASIBLE_STATUS, OPTIMAL_STATUS, SolveResult


def solve_external(model: IlpModel, command: list[str], timeout: float | None = None) -> SolveResult:
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="repeater-alloc-") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        lp_path.write_text(export_lp_text(model), encoding="utf-8")
        argv = [a.replace("{lp}", str(lp_path)).replace("{sol}", str(sol_path)) for a in command]
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0:
            raise SolverError(f"external solver exited {proc.returncode}: {proc.stderr.strip()[:500]}")
        if not sol_path.exists():
            raise SolverError("external solver wrote no solution file")
        text = sol_path.read_text(encoding="utf-8")
    wall = time.perf_counter() - t0
    first = text.lstrip().splitlines()[0].strip().lower() if text.strip() else ""
    if first.startswith("#") and "infeasible" in first:
        return SolveResult(INFEASIBLE_STATUS, None, math.inf, math.inf, 0, wall)
    assignment = parse_solution_text(model, text)
    report = evaluate(model, assignment, tol=1e-6)
    if not report.feasible:
        raise SolverError(f"external solution infeasible: {report.violations[:3]}")
    v = assignment.objective_value
    return SolveResult(OPTIMAL_STATUS, assignment, v, v, 0, wall)
