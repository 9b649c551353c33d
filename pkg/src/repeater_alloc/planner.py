"""End-to-end repeater allocation: bounds, candidate links, ILP, path extraction, audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .connectivity import vertex_connectivity_graph
from .errors import (
    AuditError,
    CorruptAssignmentError,
    InfeasibleError,
    ModelError,
    RequirementError,
    SolverLimitError,
)
from .formulations import (
    FormulationArtifacts,
    Path,
    build_generalized,
    build_link_based,
    build_path_based,
    enumerate_paths,
    length_ok,
)
from .ilp import Assignment, evaluate
from .network import (
    CandidateLink,
    FiberNetwork,
    build_candidate_links,
    build_pair_set,
)
from .requirements import Bounds, ChainRequirements, derive_bounds, derive_pair_bounds
from .solver import INFEASIBLE_STATUS, LIMIT_STATUS, SolveOptions, SolveResult, solve, solve_external

FORMULATIONS = ("link", "path", "generalized")


def _out_links(art: FormulationArtifacts, q):
    out: dict[str, list[tuple[str, int]]] = {}
    for (u, v), j in art.link_pos[q].items():
        out.setdefault(u, []).append((v, j))
    return out


def extract_paths(assignment: Assignment, art: FormulationArtifacts) -> dict[tuple, Path]:
    """Follow the unique selected outgoing link from s until t, for every (q, k).

    Selected links that the walk never reaches (disjoint cycles) are ignored.
    """
    x = assignment.x
    paths = {}
    for q in art.pairs:
        s, t = q
        out = _out_links(art, q)
        for k in range(1, art.k_of[q] + 1):
            base = art.x_block[(q, k)]
            nodes = [s]
            u = s
            while u != t:
                nxt = [v for v, j in out.get(u, []) if x[base + j] == 1]
                if len(nxt) != 1:
                    raise CorruptAssignmentError(
                        f"pair {q} k={k}: node {u} has {len(nxt)} selected outgoing links"
                    )
                u = nxt[0]
                if u in nodes:
                    raise CorruptAssignmentError(f"pair {q} k={k}: walk revisits {u}")
                nodes.append(u)
            paths[(q, k)] = Path(q, tuple(nodes))
    return paths


def remove_loops(assignment: Assignment, art: FormulationArtifacts, paths: dict) -> Assignment:
    """Zero every link variable of (q, k) that is not on the extracted (q, k) path."""
    x = assignment.x.copy()
    for (q, k), p in paths.items():
        base = art.x_block[(q, k)]
        n = len(art.link_pos[q])
        keep = np.zeros(n, dtype=bool)
        for link in p.links:
            keep[art.link_pos[q][link]] = True
        block = x[base:base + n]
        block[~keep] = 0
    return assignment.replace(x)


def chosen_paths(assignment: Assignment, art: FormulationArtifacts) -> dict[tuple, Path]:
    """Paths with x_p = 1 in a path-based solution, numbered k = 1.. in catalog order."""
    paths = {}
    for q in art.pairs:
        k = 0
        for p in art.catalog.per_pair[q]:
            if assignment.x[art.path_index[p]] == 1:
                k += 1
                paths[(q, k)] = p
    return paths


def link_to_path_assignment(
    assignment: Assignment, link_art: FormulationArtifacts, path_art: FormulationArtifacts
) -> Assignment:
    """Path-based solution with x_p = 1 exactly for the extracted paths; same y."""
    x = np.zeros(path_art.model.n_vars, dtype=np.int8)
    for p in extract_paths(assignment, link_art).values():
        if p not in path_art.path_index:
            raise ModelError(f"extracted path {p.nodes} missing from the path catalog")
        x[path_art.path_index[p]] = 1
    for u, i in link_art.y_index.items():
        x[path_art.y_index[u]] = assignment.x[i]
    return Assignment(path_art.model, x)


def path_to_link_assignment(
    assignment: Assignment, path_art: FormulationArtifacts, link_art: FormulationArtifacts
) -> Assignment:
    """Link-based solution whose (q, k) block marks the links of the k-th chosen path."""
    x = np.zeros(link_art.model.n_vars, dtype=np.int8)
    for (q, k), p in chosen_paths(assignment, path_art).items():
        if k > link_art.k_of[q]:
            raise ModelError(f"pair {q} has more than K chosen paths")
        for u, v in p.links:
            x[link_art.x_index(q, k, u, v)] = 1
    for u, i in path_art.y_index.items():
        x[link_art.y_index[u]] = assignment.x[i]
    return Assignment(link_art.model, x)


@dataclass
class PlanOptions:
    formulation: str = "link"
    seed: int = 0
    canonical: bool = False
    bounds: Bounds | None = None  # bypasses the toy model
    alpha: float | None = None
    strict: bool = False
    prune: bool = True
    end_node_transit: bool = True
    solver: SolveOptions = field(default_factory=SolveOptions)
    external_command: list[str] | None = None
    # re-solve an infeasible ILP with unlimited capacity to name the cause
    diagnose: bool = True

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")


@dataclass
class DeploymentPlan:
    repeater_nodes: list[str]
    elementary_links: list[CandidateLink]
    paths: dict[tuple, Path]
    end_nodes: list[str]
    bounds: dict
    k_of: dict
    d_of: dict
    provenance: dict
    assignment: Assignment | None = field(default=None, repr=False)
    artifacts: FormulationArtifacts | None = field(default=None, repr=False)

    @property
    def repeater_count(self) -> int:
        return len(self.repeater_nodes)

    @property
    def connectivity(self) -> int:
        return plan_connectivity(self)

    def metrics(self) -> dict:
        return {"repeater_count": self.repeater_count, "connectivity": self.connectivity}

    def to_dict(self) -> dict:
        return {
            "repeaters": list(self.repeater_nodes),
            "elementary_links": [
                {"u": l.u, "v": l.v, "length_km": l.length_km, "fibers": [list(f) for f in l.fiber_route]}
                for l in self.elementary_links
            ],
            "paths": [
                {"s": q[0], "t": q[1], "k": k, "links": [list(l) for l in p.links]}
                for (q, k), p in sorted(self.paths.items(), key=lambda kv: (self._qpos(kv[0][0]), kv[0][1]))
            ],
            "metrics": self.metrics(),
            "provenance": self.provenance,
        }

    def _qpos(self, q):
        return list(self.k_of).index(q)


def plan_connectivity(plan: DeploymentPlan) -> int:
    vertices = list(plan.end_nodes) + list(plan.repeater_nodes)
    edges = {tuple(sorted((l.u, l.v))) for l in plan.elementary_links}
    return vertex_connectivity_graph(vertices, edges)


def _resolve_bounds(req: ChainRequirements, opts: PlanOptions, pairs):
    try:
        if req.heterogeneous:
            return derive_pair_bounds(req, pairs, default=opts.bounds)
        b = opts.bounds if opts.bounds is not None else derive_bounds(req)
        return {q: b for q in pairs}
    except RequirementError as exc:
        raise InfeasibleError("bounds", str(exc)) from exc


def _run_solver(art: FormulationArtifacts, opts: PlanOptions) -> SolveResult:
    if opts.external_command:
        return solve_external(art.model, opts.external_command)
    return solve(art.model, opts.solver)


def _diagnose(links, pb, req, opts):
    """Distinguish too few disjoint admissible paths from binding capacity."""
    loose = replace(req, d=10**6, per_node={})
    if opts.formulation == "path":
        art = build_path_based(enumerate_paths(links, pb, prune=opts.prune), pb, loose)
    else:
        art = build_generalized(links, pb, loose, alpha=0.0)
    if solve(art.model, opts.solver).status == INFEASIBLE_STATUS:
        return "insufficient disjoint admissible paths"
    return "repeater capacity too small for the required paths"


def capacity_precheck(links, pb, req: ChainRequirements) -> None:
    """Counting argument that rules out instances before any ILP is built.

    Each pair may route at most one path over its direct link (and only if that
    link is short enough); every other path needs a distinct repeater of its
    own pair and consumes one unit of that repeater's capacity.
    """
    reps = links.repeaters
    need = 0
    for q in links.pairs:
        s, t = q
        direct = (s, t) in links.links and length_ok(links.length(s, t), pb[q].l_max)
        m = req.k_for(q) - (1 if direct else 0)
        if m > len(reps):
            raise InfeasibleError(
                "capacity",
                f"pair {q} needs {m} repeater-disjoint paths but only {len(reps)} sites exist",
                {"pair": list(q)},
            )
        need += m
    have = sum(req.d_for(u) for u in reps)
    if need > have:
        raise InfeasibleError(
            "capacity",
            f"paths need at least {need} repeater slots, total capacity is {have}",
            {"needed": need, "capacity": have},
        )


def build_formulation(links, pb, req: ChainRequirements, opts: PlanOptions) -> FormulationArtifacts:
    if opts.formulation == "path":
        catalog = enumerate_paths(links, pb, prune=opts.prune)
        return build_path_based(catalog, pb, req, strict=opts.strict)
    if opts.formulation == "generalized" or req.heterogeneous:
        alpha = opts.alpha if opts.formulation == "generalized" else 0.0
        return build_generalized(links, pb, req, alpha=alpha, strict=opts.strict)
    return build_link_based(links, pb, req, strict=opts.strict)


def prepare_model(net: FiberNetwork, req: ChainRequirements, options: PlanOptions | None = None):
    """Steps up to the ILP: pair set, bounds, candidate links and the model.

    Returns ``(links, pair_bounds, artifacts)`` without solving.
    """
    opts = options or PlanOptions()
    pairs = build_pair_set(net, opts.seed, canonical=opts.canonical)
    pb = _resolve_bounds(req, opts, pairs)
    links = build_candidate_links(net, pairs, end_node_transit=opts.end_node_transit)
    return links, pb, build_formulation(links, pb, req, opts)


def plan(net: FiberNetwork, req: ChainRequirements, options: PlanOptions | None = None) -> DeploymentPlan:
    """Run the whole method and return an audited plan.

    Raises :class:`InfeasibleError` naming the first stage that fails, or
    :class:`SolverLimitError` when the solver stops before proving optimality.
    """
    opts = options or PlanOptions()
    pairs = build_pair_set(net, opts.seed, canonical=opts.canonical)
    pb = _resolve_bounds(req, opts, pairs)
    links = build_candidate_links(net, pairs, end_node_transit=opts.end_node_transit)
    capacity_precheck(links, pb, req)
    art = build_formulation(links, pb, req, opts)
    result = _run_solver(art, opts)
    if result.status == INFEASIBLE_STATUS:
        reason = "ILP infeasible"
        if opts.diagnose and not opts.external_command:
            reason = _diagnose(links, pb, req, opts)
        raise InfeasibleError("ilp", reason, {"nodes": result.nodes})
    if result.status == LIMIT_STATUS:
        raise SolverLimitError(
            "solver-limit",
            "solver stopped before proving optimality",
            {"dual_bound": result.dual_bound, "incumbent": result.objective, "nodes": result.nodes},
        )

    assignment = result.assignment
    if art.kind == "path":
        paths = chosen_paths(assignment, art)
        cleaned = assignment
    else:
        paths = extract_paths(assignment, art)
        cleaned = remove_loops(assignment, art, paths)

    repeaters = sorted(u for u, i in art.y_index.items() if cleaned.x[i] == 1)
    used = sorted({l for p in paths.values() for l in p.links})
    provenance = {
        "seed": opts.seed,
        "canonical": opts.canonical,
        "pairs": [list(q) for q in pairs],
        "formulation": art.kind,
        "alpha": art.alpha,
        "bounds": {f"{q[0]}>{q[1]}": {"n_max": b.n_max, "l_max": b.l_max} for q, b in pb.items()},
        "k": {f"{q[0]}>{q[1]}": k for q, k in art.k_of.items()},
        "d": dict(art.d_of),
        "objective": result.objective,
        "solver_nodes": result.nodes,
        "solve_seconds": result.wall_time,
    }
    out = DeploymentPlan(
        repeater_nodes=repeaters,
        elementary_links=[links.links[k] for k in used],
        paths=paths,
        end_nodes=net.end_nodes,
        bounds=pb,
        k_of=dict(art.k_of),
        d_of=dict(art.d_of),
        provenance=provenance,
        assignment=cleaned,
        artifacts=art,
    )
    violations = audit(out)
    if violations:
        raise AuditError(violations)
    return out


def audit(plan: DeploymentPlan) -> list[str]:
    """Check every plan invariant; returns the list of violations (empty when sound)."""
    bad = []
    links = {(l.u, l.v): l for l in plan.elementary_links}
    reps = set(plan.repeater_nodes)
    usage: dict[str, int] = {}
    on_path = set()
    for q, K in plan.k_of.items():
        s, t = q
        b = plan.bounds[q]
        got = [plan.paths.get((q, k)) for k in range(1, K + 1)]
        extra = [key for key in plan.paths if key[0] == q and not 1 <= key[1] <= K]
        if any(p is None for p in got) or extra:
            bad.append(f"pair {q}: expected exactly {K} paths")
            continue
        seen_reps, seen_links = set(), set()
        for k, p in enumerate(got, 1):
            tag = f"pair {q} k={k}"
            if p.nodes[0] != s or p.nodes[-1] != t:
                bad.append(f"{tag}: path does not run from s to t")
            if len(set(p.nodes)) != len(p.nodes):
                bad.append(f"{tag}: path has a loop")
            if len(p) > b.n_max + 1:
                bad.append(f"{tag}: {len(p)} links exceed N_max+1={b.n_max + 1}")
            for u in p.repeaters:
                if u in plan.end_nodes:
                    bad.append(f"{tag}: end node {u} used as repeater")
                if u not in reps:
                    bad.append(f"{tag}: repeater {u} not deployed")
                if u in seen_reps:
                    bad.append(f"{tag}: repeater {u} shared with another path of the pair")
                seen_reps.add(u)
                usage[u] = usage.get(u, 0) + 1
            for l in p.links:
                if l in seen_links:
                    bad.append(f"{tag}: link {l} shared with another path of the pair")
                seen_links.add(l)
                on_path.add(l)
                if l not in links:
                    bad.append(f"{tag}: link {l} not among the plan's elementary links")
                elif not length_ok(links[l].length_km, b.l_max):
                    bad.append(f"{tag}: link {l} length {links[l].length_km} exceeds L_max={b.l_max}")
    for u, n in usage.items():
        if n > plan.d_of.get(u, 0):
            bad.append(f"repeater {u}: used by {n} paths, capacity {plan.d_of.get(u)}")
    for l in links:
        if l not in on_path:
            bad.append(f"elementary link {l} is on no path")
    bad.extend(_robustness_violations(plan))
    if plan.assignment is not None and plan.artifacts is not None:
        rep = evaluate(plan.artifacts.model, plan.assignment, tol=1e-6)
        bad.extend(f"cleaned assignment: {v}" for v in rep.violations[:10])
        if plan.artifacts.kind != "path":
            again = remove_loops(plan.assignment, plan.artifacts, plan.paths)
            if not np.array_equal(again.x, plan.assignment.x):
                bad.append("loop removal is not idempotent")
    return bad


def _robustness_violations(plan: DeploymentPlan) -> list[str]:
    """Any single repeater or link failure leaves each pair at least K - 1 intact paths."""
    bad = []
    by_pair: dict = {}
    for (q, _), p in plan.paths.items():
        by_pair.setdefault(q, []).append(p)
    failures = [("repeater", u) for u in plan.repeater_nodes]
    failures += [("link", tuple(sorted((l.u, l.v)))) for l in plan.elementary_links]
    for kind, item in failures:
        for q, ps in by_pair.items():
            if kind == "repeater":
                alive = sum(1 for p in ps if item not in p.repeaters)
            else:
                alive = sum(1 for p in ps if item not in {tuple(sorted(l)) for l in p.links})
            if alive < plan.k_of[q] - 1:
                bad.append(f"failure of {kind} {item} leaves pair {q} only {alive} paths")
    return bad


def plan_from_dict(doc: dict, net: FiberNetwork) -> DeploymentPlan:
    """Rebuild a plan from its JSON form, re-deriving links from the network."""
    prov = doc.get("provenance", {})
    pairs = [tuple(q) for q in prov.get("pairs", [])]
    if not pairs:
        pairs = sorted({(p["s"], p["t"]) for p in doc["paths"]})

    def key(q):
        return f"{q[0]}>{q[1]}"

    bounds = {q: Bounds(prov["bounds"][key(q)]["n_max"], prov["bounds"][key(q)]["l_max"]) for q in pairs}
    k_of = {q: int(prov["k"][key(q)]) for q in pairs}
    d_of = {u: int(d) for u, d in prov.get("d", {}).items()}
    elinks = [
        CandidateLink(l["u"], l["v"], float(l["length_km"]), tuple(tuple(f) for f in l["fibers"]))
        for l in doc["elementary_links"]
    ]
    paths = {}
    for p in doc["paths"]:
        q = (p["s"], p["t"])
        nodes = [p["links"][0][0]] + [l[1] for l in p["links"]] if p["links"] else [p["s"]]
        paths[(q, int(p["k"]))] = Path(q, tuple(nodes))
    return DeploymentPlan(
        repeater_nodes=sorted(doc["repeaters"]),
        elementary_links=elinks,
        paths=paths,
        end_nodes=net.end_nodes,
        bounds=bounds,
        k_of=k_of,
        d_of=d_of,
        provenance=prov,
    )


def audit_document(doc: dict, net: FiberNetwork) -> list[str]:
    """Audit a serialized plan against the network it claims to be built on."""
    bad = []
    try:
        p = plan_from_dict(doc, net)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        return [f"malformed plan document: {exc!r}"]
    ids = set(net.node_ids)
    for u in p.repeater_nodes:
        if u not in ids or net.node(u).kind != "repeater":
            bad.append(f"repeater {u} is not a potential repeater location")
    for l in p.elementary_links:
        route = l.fiber_route
        if not route or route[0][0] != l.u or route[-1][1] != l.v:
            bad.append(f"link {l.u}>{l.v}: fiber route does not join its endpoints")
            continue
        total = 0.0
        for a, b in route:
            if a not in ids or b not in net.neighbors(a):
                bad.append(f"link {l.u}>{l.v}: fiber {a}-{b} absent from the network")
                break
            total += net.fiber_length(a, b)
        else:
            if not math.isclose(total, l.length_km, rel_tol=1e-9, abs_tol=1e-9):
                bad.append(f"link {l.u}>{l.v}: length {l.length_km} != fiber sum {total}")
        nodes = [route[0][0]] + [b for _, b in route]
        if len(set(nodes)) != len(nodes):
            bad.append(f"link {l.u}>{l.v}: fiber route repeats a node")
    got = doc.get("metrics", {})
    if got.get("repeater_count") not in (None, p.repeater_count):
        bad.append("metrics.repeater_count does not match the repeater list")
    return bad + audit(p)
