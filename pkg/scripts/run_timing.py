"""Solve time against network size with the built-in solver.

Uses L_max=1, N_max=6, K=2, D=8. Runs that reach the time limit are reported
as censored rather than dropped.
"""

import argparse
from dataclasses import replace

from repeater_alloc.analysis import TIMING_CONFIG, TIMING_HEADER, rows_to_csv, timing_harness, timing_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10,15,20,25")
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--out", help="CSV file (default stdout)")
    args = ap.parse_args()

    sizes = [int(v) for v in args.sizes.split(",")]
    rows = timing_harness(sizes, args.count, replace(TIMING_CONFIG, time_limit=args.time_limit), args.seed)
    text = rows_to_csv(timing_summary(rows), TIMING_HEADER)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
