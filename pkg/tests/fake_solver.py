"""Stand-in external solver: ``python fake_solver.py MODEL.lp SOLUTION.sol``."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from lp_reader import brute_solve, read_lp  # noqa: E402

lp_path, sol_path = sys.argv[1], sys.argv[2]
value, x = brute_solve(read_lp(Path(lp_path).read_text()))
if x is None:
    Path(sol_path).write_text("# status infeasible\n")
else:
    Path(sol_path).write_text("".join(f"{k} {v}\n" for k, v in x.items() if v))
