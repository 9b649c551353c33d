"""Plan metrics, parameter sweeps and the timing harness."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import PlanFailure, SolverLimitError
from .formulations import expected_link_var_count
from .planner import DeploymentPlan, PlanOptions, plan, plan_connectivity
from .randomnet import DegenerateHullError, FeasibleDraw, generate_feasible, random_network
from .requirements import Bounds, ChainRequirements
from .solver import SolveOptions

SWEEP_HEADER = ["param_value", "instance_id", "repeater_count", "connectivity", "solve_ms", "status"]
VARY = ("d", "k", "lmax")


def vertex_connectivity(plan: DeploymentPlan) -> int:
    """Vertex connectivity of the plan graph (end nodes and repeaters, undirected links)."""
    return plan_connectivity(plan)


class ProtocolError(RuntimeError):
    """An instance feasible at the base configuration failed at a looser value."""


@dataclass(frozen=True)
class SweepConfig:
    """Random-instance and requirement parameters shared by sweeps and timings.

    Lengths live on the unit square, so ``l_max`` is given directly instead of
    being derived from hardware constants.
    """

    n: int = 25
    radius: float = 0.9
    l_max: float = 0.9
    n_max: int = 6
    k: int = 6
    d: int = 4
    formulation: str = "link"
    max_attempts: int = 5000
    time_limit: float | None = None

    def requirements(self) -> ChainRequirements:
        return ChainRequirements(k=self.k, d=self.d)

    def options(self) -> PlanOptions:
        return PlanOptions(
            formulation=self.formulation,
            bounds=Bounds(self.n_max, self.l_max, self.l_max),
            solver=SolveOptions(time_limit=self.time_limit),
            diagnose=False,
        )

    def varied(self, vary: str, value) -> "SweepConfig":
        if vary == "d":
            return replace(self, d=int(value))
        if vary == "k":
            return replace(self, k=int(value))
        if vary == "lmax":
            return replace(self, l_max=float(value))
        raise ValueError(f"vary must be one of {VARY}")


# computation-time experiment: L_max=1, N_max=6, K=2, D=8
TIMING_CONFIG = SweepConfig(l_max=1.0, n_max=6, k=2, d=8, max_attempts=200, time_limit=60.0)


def _check_looser(base: SweepConfig, vary: str, values) -> None:
    for v in values:
        ok = {"d": v >= base.d, "k": v <= base.k, "lmax": v >= base.l_max}[vary]
        if not ok:
            raise ValueError(f"{vary}={v} is stricter than the base configuration")


@dataclass
class SweepRow:
    param_value: float
    instance_id: int
    repeater_count: int
    connectivity: int
    solve_ms: float
    status: str


def draw_instance(base: SweepConfig, seed: int, instance_id: int) -> FeasibleDraw:
    """Instance ``i`` of a sweep: first feasible draw from seed ``(seed, i)``."""
    return generate_feasible(
        base.n, base.radius, [seed, instance_id], base.requirements(), base.options(), base.max_attempts
    )


def _run_instance(args):
    base, grid, seed, i = args
    draw = draw_instance(base, seed, i)
    out = {}
    for vary, values in grid.items():
        rows = out[vary] = []
        for v in values:
            cfg = base.varied(vary, v)
            if cfg == base:
                p = draw.plan
            else:
                try:
                    p = plan(draw.network, cfg.requirements(), cfg.options())
                except PlanFailure as exc:
                    raise ProtocolError(
                        f"instance {i} feasible at the base configuration fails at {vary}={v}: {exc}"
                    ) from exc
            ms = 1000 * p.provenance["solve_seconds"]
            rows.append(SweepRow(v, i, p.repeater_count, vertex_connectivity(p), ms, "optimal"))
    return i, out


def multi_sweep(base: SweepConfig, grid: dict, n_instances: int, seed: int = 0, workers: int = 1) -> dict:
    """Several one-parameter sweeps over the same instances.

    ``grid`` maps a parameter in :data:`VARY` to its values. Instances are drawn
    feasible at ``base`` and every value must be no stricter, so a failure
    anywhere is a :class:`ProtocolError`. Returns rows per parameter, ordered
    by value, then instance.
    """
    grid = {vary: list(values) for vary, values in grid.items()}
    for vary, values in grid.items():
        if vary not in VARY:
            raise ValueError(f"vary must be one of {VARY}")
        _check_looser(base, vary, values)
    jobs = [(base, grid, seed, i) for i in range(n_instances)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = dict(pool.map(_run_instance, jobs))
    else:
        results = dict(map(_run_instance, jobs))
    out = {}
    for vary, values in grid.items():
        order = {v: j for j, v in enumerate(values)}
        rows = [r for i in results for r in results[i][vary]]
        out[vary] = sorted(rows, key=lambda r: (order[r.param_value], r.instance_id))
    return out


def sweep(base: SweepConfig, vary: str, values, n_instances: int, seed: int = 0, workers: int = 1) -> list[SweepRow]:
    """Solve every instance at every value of one parameter; see :func:`multi_sweep`."""
    return multi_sweep(base, {vary: values}, n_instances, seed, workers)[vary]


def _stderr(a) -> float:
    a = np.asarray(a, float)
    return float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0


def summarize(rows: list[SweepRow]) -> list[dict]:
    """Per parameter value: mean and standard error of repeater count and connectivity."""
    out = []
    for v in dict.fromkeys(r.param_value for r in rows):
        sel = [r for r in rows if r.param_value == v]
        rc = [r.repeater_count for r in sel]
        cn = [r.connectivity for r in sel]
        out.append({
            "param_value": v,
            "instances": len(sel),
            "repeaters_mean": float(np.mean(rc)),
            "repeaters_stderr": _stderr(rc),
            "connectivity_mean": float(np.mean(cn)),
            "connectivity_stderr": _stderr(cn),
        })
    return out


def rows_to_csv(rows, header=None) -> str:
    """CSV text for dataclass rows or dicts."""
    dicts = [r if isinstance(r, dict) else asdict(r) for r in rows]
    header = header or (list(dicts[0]) if dicts else SWEEP_HEADER)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for d in dicts:
        w.writerow({k: (f"{d[k]:.3f}" if k.endswith("_ms") else d[k]) for k in header})
    return buf.getvalue()


def monotone(values, direction: str) -> bool:
    pairs = zip(values, values[1:])
    if direction == "nonincreasing":
        return all(b <= a for a, b in pairs)
    return all(b >= a for a, b in pairs)


def instance_trends(rows: list[SweepRow], direction: str) -> dict[int, bool]:
    """Per instance: is the repeater count monotone in the order values were swept?"""
    by_inst: dict[int, list[int]] = {}
    for r in rows:
        by_inst.setdefault(r.instance_id, []).append(r.repeater_count)
    return {i: monotone(v, direction) for i, v in by_inst.items()}


@dataclass
class TimingRow:
    size: int
    instance_id: int
    n_vars: int
    solve_ms: float
    status: str  # optimal, censored or exhausted


TIMING_HEADER = ["size", "instances", "solved", "censored", "exhausted", "mean_ms", "stderr_ms", "mean_vars"]


def timing_harness(sizes, count: int, config: SweepConfig | None = None, seed: int = 0) -> list[TimingRow]:
    """Time ``plan`` on ``count`` feasible random networks per size.

    Network ``i`` of size ``n`` is the first draw from seeds
    ``(seed, n, i, attempt)`` that is not proven infeasible. Runs hitting
    ``config.time_limit`` are kept with status ``censored``; if no draw within
    ``config.max_attempts`` is feasible the row has status ``exhausted``.
    Variable counts follow the link-based size formula for the drawn split.
    """
    cfg = config or TIMING_CONFIG
    rows = []
    for n in sizes:
        c = replace(cfg, n=n)
        for i in range(count):
            row = None
            n_vars = 0
            for attempt in range(c.max_attempts):
                try:
                    net = random_network(n, c.radius, [seed, n, i, attempt])
                except DegenerateHullError:
                    continue
                R, C = len(net.repeater_nodes), len(net.end_nodes)
                n_vars = expected_link_var_count(R, C * (C - 1) // 2, c.k)
                t0 = time.perf_counter()
                try:
                    plan(net, c.requirements(), c.options())
                    status = "optimal"
                except SolverLimitError:
                    status = "censored"
                except PlanFailure:
                    continue
                row = TimingRow(n, i, n_vars, 1000 * (time.perf_counter() - t0), status)
                break
            rows.append(row or TimingRow(n, i, n_vars, float("nan"), "exhausted"))
    return rows


def timing_summary(rows: list[TimingRow]) -> list[dict]:
    out = []
    for n in dict.fromkeys(r.size for r in rows):
        sel = [r for r in rows if r.size == n]
        timed = [r.solve_ms for r in sel if r.status != "exhausted"]
        out.append({
            "size": n,
            "instances": len(sel),
            "solved": sum(r.status == "optimal" for r in sel),
            "censored": sum(r.status == "censored" for r in sel),
            "exhausted": sum(r.status == "exhausted" for r in sel),
            "mean_ms": round(float(np.mean(timed)), 3) if timed else float("nan"),
            "stderr_ms": round(_stderr(timed), 3),
            "mean_vars": float(np.mean([r.n_vars for r in sel])),
        })
    return out
