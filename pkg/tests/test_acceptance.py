"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import itertools
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from repeater_alloc.analysis import SweepConfig, draw_instance, instance_trends, multi_sweep, summarize
from repeater_alloc.cli import main as cli_main
from repeater_alloc.errors import InfeasibleError, PlanFailure
from repeater_alloc.formulations import build_link_based, build_path_based, enumerate_paths
from repeater_alloc.ilp import evaluate, export_lp_text
from repeater_alloc.network import Fiber, FiberNetwork, Node, build_candidate_links, build_pair_set
from repeater_alloc.planner import (
    PlanOptions,
    audit,
    link_to_path_assignment,
    path_to_link_assignment,
    plan,
    prepare_model,
)
from repeater_alloc.randomnet import DegenerateHullError, random_network
from repeater_alloc.requirements import Bounds, ChainRequirements, derive_bounds, load_requirements
from repeater_alloc.solver import OPTIMAL_STATUS, brute_force, solve

from . import conftest
from .conftest import DATA, load, random_ilp
from .test_planner import DEMO_BOUNDS, demo_admissible_repeaters, min_repeaters_by_flow


@contextmanager
def criterion(num, title, budget_s=None):
    """Run a criterion body, record one PASS/FAIL line and enforce the time budget."""
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
        elapsed = time.perf_counter() - t0
        if budget_s is not None:
            assert elapsed < budget_s, f"took {elapsed:.1f} s, budget {budget_s} s"
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        line = f"criterion {num} FAIL  {title}: {msg}"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    elapsed = time.perf_counter() - t0
    extra = " ".join(f"{k}={v}" for k, v in info.items())
    line = f"criterion {num} PASS  {title} [{elapsed:.2f} s] {extra}".rstrip()
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def unit_instance(seed, n_lo=4, n_hi=8):
    """Seeded random geometric instance on the unit square with random requirements."""
    rng = np.random.default_rng([7, seed])
    n = int(rng.integers(n_lo, n_hi + 1))
    radius = float(rng.uniform(0.6, 1.0))
    while True:
        try:
            net = random_network(n, radius, int(rng.integers(1 << 31)))
            break
        except DegenerateHullError:
            pass
    b = Bounds(int(rng.integers(0, 4)), float(rng.uniform(0.45, 1.1)))
    req = ChainRequirements(k=int(rng.integers(1, 4)), d=int(rng.integers(1, 5)))
    return net, b, req


# 1 -------------------------------------------------------------------------


def test_criterion_1_toy_model_bounds(capsys):
    with criterion(1, "toy-model bounds N_max=6, L_max=136 km", budget_s=1.0) as info:
        req = load_requirements(DATA / "toy_requirements.json")
        hw = req.hardware
        assert (req.f_min, req.r_min_hz) == (0.93, 1)
        assert (hw.f_link, hw.m, hw.c_fiber_km_s, hw.l_att_km) == (0.99, 1000, 200000, 22)
        b = derive_bounds(req)
        assert b.n_max == 6 and b.l_max == 136
        assert cli_main(["bounds", "--requirements", str(DATA / "toy_requirements.json")]) == 0
        out = capsys.readouterr().out
        assert out.splitlines() == ["N_max=6", "L_max=136"]
        info["n_max"], info["l_max"] = b.n_max, b.l_max


# 2 -------------------------------------------------------------------------


def complete_network(n_rep, n_end):
    nodes = [Node(f"c{i}", "end") for i in range(n_end)] + [Node(f"r{i}", "repeater") for i in range(n_rep)]
    fibers = [Fiber(a.id, b.id, 1.0) for a, b in itertools.combinations(nodes, 2)]
    return FiberNetwork(tuple(nodes), tuple(fibers))


def test_criterion_2_formulation_sizes():
    wide = Bounds(6, 10.0)
    with criterion(2, "variable counts on complete candidate sets", budget_s=10.0) as info:
        checked = 0
        for R, C, K in itertools.product(range(6), range(2, 5), range(1, 4)):
            net = complete_network(R, C)
            links = build_candidate_links(net, build_pair_set(net, canonical=True))
            Q = C * (C - 1) // 2
            req = ChainRequirements(k=K, d=1)
            link_vars = build_link_based(links, wide, req).model.n_vars
            assert link_vars == R + K * Q * (R * R + R + 1), (R, C, K)
            paths_per_pair = sum(math.perm(R, r) for r in range(R + 1))
            path_vars = build_path_based(enumerate_paths(links, wide, prune=False), wide, req).model.n_vars
            assert path_vars == R + Q * paths_per_pair, (R, C, K)
            checked += 1
        assert checked == 6 * 3 * 3
        info["cases"] = checked


# 3 -------------------------------------------------------------------------


def test_criterion_3_formulation_equivalence():
    with criterion(3, "link and path optima agree, conversions feasible", budget_s=300.0) as info:
        solved = infeasible = 0
        seed = 0
        while solved < 200:
            net, b, req = unit_instance(seed)
            assert len(net.node_ids) <= 8
            opts = dict(bounds=b, seed=seed, diagnose=False)
            seed += 1
            try:
                pl = plan(net, req, PlanOptions(formulation="link", **opts))
            except InfeasibleError:
                with pytest.raises(InfeasibleError):
                    plan(net, req, PlanOptions(formulation="path", **opts))
                infeasible += 1
                continue
            pp = plan(net, req, PlanOptions(formulation="path", **opts))
            assert pl.repeater_count == pp.repeater_count, seed - 1
            as_path = link_to_path_assignment(pl.assignment, pl.artifacts, pp.artifacts)
            as_link = path_to_link_assignment(pp.assignment, pp.artifacts, pl.artifacts)
            assert evaluate(pp.artifacts.model, as_path).feasible, seed - 1
            assert evaluate(pl.artifacts.model, as_link).feasible, seed - 1
            assert as_path.objective_value == as_link.objective_value == pl.repeater_count
            solved += 1
        info["solved"], info["both_infeasible"] = solved, infeasible


# 4 -------------------------------------------------------------------------

BRUTE_CAP = 20


def formulation_models(max_models):
    """Link and path models of seeded instances with |N| <= 6 and at most BRUTE_CAP free columns."""
    models, over = [], 0
    corpus = [(load(name), Bounds(n, l), ChainRequirements(k=k, d=d))
              for name in ("line3.json", "diamond.json")
              for n, l in ((0, 150.0), (1, 150.0), (2, 250.0))
              for k, d in ((1, 1), (2, 1), (2, 2))]
    seed = 0
    while len(models) < max_models:
        if corpus:
            net, b, req = corpus.pop()
        else:
            net, b, req = unit_instance(seed, 3, 6)
            seed += 1
        assert len(net.node_ids) <= 6
        try:
            links = build_candidate_links(net, build_pair_set(net, seed))
        except InfeasibleError:
            continue
        built = [build_link_based(links, b, req)]
        try:
            built.append(build_path_based(enumerate_paths(links, b), b, req))
        except InfeasibleError:
            pass
        for art in built:
            if art.model.n_vars - len(art.model.fixed) <= BRUTE_CAP:
                models.append(art.model)
            else:
                over += 1
    return models, over


def test_criterion_4_solver_correctness():
    with criterion(4, "solve() matches brute_force()") as info:
        rng = np.random.default_rng(404)
        mismatches = 0
        for _ in range(250):
            m = random_ilp(rng, int(rng.integers(1, 15)), int(rng.integers(1, 11)))
            ref, got = brute_force(m), solve(m)
            if got.status != ref.status or (ref.status == OPTIMAL_STATUS and abs(got.objective - ref.objective) > 1e-9):
                mismatches += 1
        models, over = formulation_models(150)
        statuses = []
        for m in models:
            ref, got = brute_force(m, cap=BRUTE_CAP), solve(m)
            statuses.append(ref.status)
            if got.status != ref.status or (ref.status == OPTIMAL_STATUS and got.objective != ref.objective):
                mismatches += 1
        assert mismatches == 0, f"{mismatches} mismatches"
        # the family must exercise both outcomes
        assert OPTIMAL_STATUS in statuses and len(set(statuses)) == 2
        info.update(random_ilps=250, formulation_models=len(models), over_budget=over, mismatches=mismatches)


# 5 -------------------------------------------------------------------------


def test_criterion_5_plan_audit():
    with criterion(5, "plan audit holds on the corpus") as info:
        cases = []
        toy = load_requirements(DATA / "toy_requirements.json")
        cases.append((load("line3.json"), toy, PlanOptions()))
        for k, d in ((1, 1), (2, 1), (2, 2)):
            cases.append((load("diamond.json"), ChainRequirements(k=k, d=d), PlanOptions()))
        for k, d in ((1, 1), (1, 2), (1, 3), (1, 6), (2, 6), (3, 6)):
            cases.append((load("demo4.json"), ChainRequirements(k=k, d=d), PlanOptions(bounds=DEMO_BOUNDS)))
        regional = load_requirements(DATA / "regional_requirements.json")
        for f in ("link", "path", "generalized"):
            cases.append((load("regional.json"), regional, PlanOptions(formulation=f)))
        solved = 0
        violations = []
        for net, req, opts in cases:
            p = plan(net, req, opts)
            solved += 1
            violations += audit(p)
        # plus seeded random instances until 100 of them have plans in both formulations
        seed = random_solved = 0
        while random_solved < 100:
            net, b, req = unit_instance(1000 + seed)
            seed += 1
            try:
                plans = [plan(net, req, PlanOptions(bounds=b, seed=seed, formulation=f, diagnose=False))
                         for f in ("link", "path")]
            except PlanFailure:
                continue
            random_solved += 1
            solved += len(plans)
            for p in plans:
                violations += audit(p)
        assert not violations, violations[:5]
        info["solved_plans"], info["violations"] = solved, len(violations)


# 6 -------------------------------------------------------------------------


DEMO_CASES = [(1, 6), (2, 6), (3, 6), (1, 1), (1, 2), (1, 3)]


def test_criterion_6_demo_graph():
    with criterion(6, "demo graph: K repeaters at D=6, 6/D at K=1") as info:
        net = load("demo4.json")
        links, cat, adm = demo_admissible_repeaters(net)
        assert set(net.end_nodes) == {"c00", "c01", "c10", "c11"} and len(adm) == 6
        # premise: no end-end or repeater-repeater candidate link is admissible,
        # so every admissible path uses exactly one repeater
        ends = set(net.end_nodes)
        assert all(link.length_km > 0.9 for (u, v), link in links.links.items() if (u in ends) == (v in ends))
        assert all(len(p.repeaters) == 1 for ps in cat.per_pair.values() for p in ps)
        counts = {}
        for k, d in DEMO_CASES:
            expected = k if d == 6 else 6 // d
            assert min_repeaters_by_flow(adm, net.repeater_nodes, k, d) == expected
            p = plan(net, ChainRequirements(k=k, d=d), PlanOptions(bounds=DEMO_BOUNDS, canonical=True))
            assert p.repeater_count == expected, (k, d, p.repeater_count)
            assert audit(p) == []
            counts[f"K{k}D{d}"] = p.repeater_count
        info.update(counts)


# 7 -------------------------------------------------------------------------

SWEEP_GRID = {"d": [4, 6, 8], "k": [6, 3, 1], "lmax": [0.9, 1.2, 1.414]}
# direction of mean connectivity as the swept value increases
CONNECTIVITY_DIRECTION = {"d": -1, "k": +1, "lmax": +1}


@pytest.mark.slow
def test_criterion_7_sweep_trends():
    with criterion(7, "sweep trends on 50 feasible n=25 instances", budget_s=900.0) as info:
        res = multi_sweep(SweepConfig(), SWEEP_GRID, n_instances=50, seed=0)
        problems = []
        for vary, rows in res.items():
            assert len({r.instance_id for r in rows}) == 50
            # repeaters never increase as the parameter loosens: D up, K down, L_max up
            trends = instance_trends(rows, "nonincreasing")
            if not all(trends.values()):
                problems.append(f"{vary} repeaters not monotone on {[i for i, ok in trends.items() if not ok]}")
            means = {s["param_value"]: s["connectivity_mean"] for s in summarize(rows)}
            lo, hi = min(means), max(means)
            if (means[hi] - means[lo]) * CONNECTIVITY_DIRECTION[vary] <= 0:
                want = "fall" if CONNECTIVITY_DIRECTION[vary] < 0 else "rise"
                problems.append(f"{vary} connectivity should {want}: {means[lo]:.2f}->{means[hi]:.2f}")
            info[f"conn_{vary}"] = f"{means[lo]:.2f}->{means[hi]:.2f}"
        assert not problems, "; ".join(problems)


# 8 -------------------------------------------------------------------------


def test_criterion_8_scaling():
    with criterion(8, "n=25 solve under 60 s, 100-node LP export under 5 s") as info:
        net = draw_instance(SweepConfig(), seed=8, instance_id=0).network
        cfg = SweepConfig()
        t0 = time.perf_counter()
        p = plan(net, cfg.requirements(), cfg.options())
        solve_s = time.perf_counter() - t0
        assert solve_s < 60, f"build+solve took {solve_s:.1f} s"
        info["solve_s"], info["repeaters"] = round(solve_s, 2), p.repeater_count

        big = random_network(100, 0.9, 8)
        R, C = len(big.repeater_nodes), len(big.end_nodes)
        req = ChainRequirements(k=1, d=4)
        _, _, art = prepare_model(big, req, PlanOptions(bounds=Bounds(6, 0.9, 0.9)))
        t0 = time.perf_counter()
        text = export_lp_text(art.model)
        export_s = time.perf_counter() - t0
        assert export_s < 5, f"export took {export_s:.2f} s"
        declared = text[text.index("\nBinary\n") + 8:text.index("\nEnd")].count("\n") + 1
        # the radius-0.9 graph is connected, so every candidate link exists
        assert declared == art.model.n_vars == R + req.k * (C * (C - 1) // 2) * (R * R + R + 1)
        info["export_s"], info["vars"] = round(export_s, 2), declared
