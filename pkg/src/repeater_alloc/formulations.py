"""Path-based, link-based and generalized link-based ILP builders.

Length limits become variable fixings (x = 0 for links or paths that are too
long) unless ``strict=True``, which writes the literal ``L * x <= L_max`` rows
instead. Either way the declared variable set is the full one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import perm

import numpy as np

from .errors import InfeasibleError, ModelError
from .ilp import EQ, LE, IlpModel
from .network import CandidateLinkSet
from .requirements import Bounds, ChainRequirements

PATH_CAP = 1_000_000
_LEN_RTOL = 1e-12


def length_ok(length: float, l_max: float) -> bool:
    return length <= l_max * (1 + _LEN_RTOL)


def _pair_bounds(bounds, pairs) -> dict:
    if isinstance(bounds, Bounds):
        return {q: bounds for q in pairs}
    return {q: bounds[q] for q in pairs}


@dataclass(frozen=True)
class Path:
    """Loop-free chain of elementary links from s to t, stored as its node sequence."""

    q: tuple[str, str]
    nodes: tuple[str, ...]

    @property
    def links(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.nodes[:-1], self.nodes[1:]))

    @property
    def repeaters(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    def __len__(self):
        return len(self.nodes) - 1


@dataclass
class PathCatalog:
    links: CandidateLinkSet
    per_pair: dict[tuple[str, str], list[Path]]
    pruned: bool

    @property
    def pairs(self):
        return self.links.pairs

    def __len__(self):
        return sum(len(v) for v in self.per_pair.values())


def expected_path_count(n_repeaters: int) -> int:
    """Number of loop-free s-t paths over a complete candidate set."""
    return sum(perm(n_repeaters, r) for r in range(n_repeaters + 1))


def enumerate_paths(
    links: CandidateLinkSet, bounds, prune: bool = True, cap: int = PATH_CAP
) -> PathCatalog:
    """All loop-free s-t paths over E_q, depth-first with ascending node ids.

    With ``prune`` only paths with at most N_max + 1 links, each no longer
    than L_max, are kept.
    """
    pb = _pair_bounds(bounds, links.pairs)
    per_pair = {}
    total = 0
    for q in links.pairs:
        s, t = q
        b = pb[q]
        out: dict[str, list[str]] = {}
        for u, v in links.per_pair[q]:
            if prune and not length_ok(links.length(u, v), b.l_max):
                continue
            out.setdefault(u, []).append(v)
        max_hops = b.n_max + 1 if prune else None
        found = []
        stack = [(s, (s,))]
        while stack:
            u, nodes = stack.pop()
            if u == t:
                found.append(Path(q, nodes))
                total += 1
                if total > cap:
                    raise ModelError(f"path catalog exceeds {cap} paths (pair {q}, {len(found)} so far)")
                continue
            if max_hops is not None and len(nodes) - 1 >= max_hops:
                continue
            # reversed push so the smallest id is expanded first
            for v in reversed(out.get(u, [])):
                if v not in nodes:
                    stack.append((v, nodes + (v,)))
        per_pair[q] = found
    return PathCatalog(links, per_pair, prune)


@dataclass
class FormulationArtifacts:
    kind: str
    model: IlpModel
    links: CandidateLinkSet
    bounds: dict  # pair -> Bounds
    k_of: dict  # pair -> K^q
    d_of: dict  # repeater -> D_u
    y_index: dict[str, int]
    alpha: float = 0.0
    # path-based
    catalog: PathCatalog | None = None
    path_index: dict = field(default_factory=dict)
    # link-based: variables of (q, k) occupy a contiguous block ordered like E_q
    x_block: dict = field(default_factory=dict)
    link_pos: dict = field(default_factory=dict)

    @property
    def pairs(self):
        return self.links.pairs

    def x_index(self, q, k: int, u: str, v: str) -> int:
        return self.x_block[(q, k)] + self.link_pos[q][(u, v)]

    def x_name(self, q, k, u, v) -> str:
        return self.model.variables[self.x_index(q, k, u, v)]


def _name_q(q):
    return f"{q[0]}>{q[1]}"


def build_path_based(
    catalog: PathCatalog, bounds, req: ChainRequirements, *, strict: bool = False
) -> FormulationArtifacts:
    links = catalog.links
    pairs = list(links.pairs)
    pb = _pair_bounds(bounds, pairs)
    K, D = req.k, req.d
    for q in pairs:
        if not any(_path_admissible(links, p, pb[q]) for p in catalog.per_pair[q]):
            raise InfeasibleError("paths", f"no admissible path for pair {q}", {"pair": list(q)})

    model = IlpModel("path_based")
    y_index = {u: model.add_var(f"y[{u}]") for u in links.repeaters}
    path_index = {}
    for q in pairs:
        for j, p in enumerate(catalog.per_pair[q]):
            path_index[p] = model.add_var(f"x[{_name_q(q)},p{j}:{'-'.join(p.nodes)}]")

    uses: dict[str, list[int]] = {u: [] for u in links.repeaters}
    for q in pairs:
        b = pb[q]
        per_u: dict[str, list[int]] = {}
        for p in catalog.per_pair[q]:
            i = path_index[p]
            lengths = [links.length(u, v) for u, v in p.links]
            if strict:
                for (u, v), L in zip(p.links, lengths):
                    model.add_row(f"pbf_max_length[{_name_q(q)},{i},{u}>{v}]", [i], [L], LE, b.l_max)
                model.add_row(f"pbf_max_repeaters[{i}]", [i], [len(p)], LE, b.n_max + 1)
            elif not (all(length_ok(L, b.l_max) for L in lengths) and len(p) <= b.n_max + 1):
                model.fix(i, 0)
            for u in p.repeaters:
                per_u.setdefault(u, []).append(i)
                uses[u].append(i)
        idx = [path_index[p] for p in catalog.per_pair[q]]
        model.add_row(f"pbf_K[{_name_q(q)}]", idx, np.ones(len(idx)), EQ, K)
        for u in links.repeaters:
            terms = per_u.get(u, [])
            if len(terms) > 1:
                model.add_row(f"pbf_disjoint[{_name_q(q)},{u}]", terms, np.ones(len(terms)), LE, 1)
    for u in links.repeaters:
        terms = uses[u]
        if terms:
            model.add_row(
                f"pbf_capacity[{u}]",
                terms + [y_index[u]],
                [1.0] * len(terms) + [-float(D)],
                LE,
                0,
            )
    model.set_objective({i: 1.0 for i in y_index.values()})
    return FormulationArtifacts(
        "path",
        model,
        links,
        pb,
        {q: K for q in pairs},
        {u: D for u in links.repeaters},
        y_index,
        catalog=catalog,
        path_index=path_index,
    )


def _path_admissible(links, p: Path, b: Bounds) -> bool:
    return len(p) <= b.n_max + 1 and all(length_ok(links.length(u, v), b.l_max) for u, v in p.links)


def length_upper_bound(pair_bounds: dict, k_of: dict) -> float:
    """Largest possible total selected link length: sum_q K^q (N^q_max + 1) L^q_max."""
    return sum(k_of[q] * (b.n_max + 1) * b.l_max for q, b in pair_bounds.items())


def default_alpha(pair_bounds: dict, k_of: dict) -> float:
    return 1.0 / (1.0 + length_upper_bound(pair_bounds, k_of))


def _build_link_model(
    links: CandidateLinkSet, pb: dict, k_of: dict, d_of: dict, alpha: float, strict: bool, kind: str
) -> FormulationArtifacts:
    pairs = list(links.pairs)
    reps = list(links.repeaters)
    model = IlpModel(kind)
    y_index = {u: model.add_var(f"y[{u}]") for u in reps}
    x_block, link_pos = {}, {}
    obj = {i: 1.0 for i in y_index.values()}

    # per-pair incidence, reused for every k
    incid = {}
    for q in pairs:
        keys = links.per_pair[q]
        link_pos[q] = {key: j for j, key in enumerate(keys)}
        out_pos: dict[str, list[int]] = {}
        in_pos: dict[str, list[int]] = {}
        for j, (u, v) in enumerate(keys):
            out_pos.setdefault(u, []).append(j)
            in_pos.setdefault(v, []).append(j)
        lengths = np.array([links.length(u, v) for u, v in keys])
        bad = np.flatnonzero(lengths > pb[q].l_max * (1 + _LEN_RTOL))
        incid[q] = (keys, out_pos, in_pos, lengths, bad)

    for q in pairs:
        keys, _, _, lengths, bad = incid[q]
        qn = _name_q(q)
        for k in range(1, k_of[q] + 1):
            start = model.n_vars
            x_block[(q, k)] = start
            for u, v in keys:
                model.add_var(f"x[{qn},{k},{u}>{v}]")
            if not strict:
                for j in bad:
                    model.fix(start + int(j), 0)
            if alpha:
                for j, L in enumerate(lengths):
                    obj[start + j] = alpha * float(L)

    cap_terms: dict[str, list[np.ndarray]] = {u: [] for u in reps}
    for q in pairs:
        s, t = q
        keys, out_pos, in_pos, lengths, _ = incid[q]
        b = pb[q]
        qn = _name_q(q)
        nodes = [s, *reps, t]
        out_arr = {u: np.array(out_pos.get(u, []), dtype=np.int64) for u in nodes}
        in_arr = {u: np.array(in_pos.get(u, []), dtype=np.int64) for u in nodes}
        for k in range(1, k_of[q] + 1):
            base = x_block[(q, k)]
            for u in nodes:
                o, i = out_arr[u], in_arr[u]
                rhs = 1 if u == s else (-1 if u == t else 0)
                idx = np.concatenate([o, i]) + base
                coef = np.concatenate([np.ones(o.size), -np.ones(i.size)])
                model.add_row(f"lbf_flowcon[q={qn},k={k},u={u}]", idx, coef, EQ, rhs)
            if strict:
                for j, (u, v) in enumerate(keys):
                    model.add_row(f"lbf_max_length[q={qn},k={k},{u}>{v}]", [base + j], [lengths[j]], LE, b.l_max)
            idx = base + np.arange(len(keys))
            model.add_row(f"lbf_max_repeaters[q={qn},k={k}]", idx, np.ones(len(keys)), LE, b.n_max + 1)
        for u in reps:
            o = out_arr[u]
            if o.size == 0:
                continue
            idx = np.concatenate([o + x_block[(q, k)] for k in range(1, k_of[q] + 1)])
            model.add_row(f"lbf_disjoint[q={qn},u={u}]", idx, np.ones(idx.size), LE, 1)
            cap_terms[u].append(idx)
        if (s, t) in link_pos[q]:
            j = link_pos[q][(s, t)]
            idx = np.array([x_block[(q, k)] + j for k in range(1, k_of[q] + 1)])
            model.add_row(f"lbf_max_one_direct[q={qn}]", idx, np.ones(idx.size), LE, 1)
    for u in reps:
        parts = cap_terms[u]
        idx = np.concatenate(parts + [np.array([y_index[u]])])
        coef = np.concatenate([np.ones(idx.size - 1), [-float(d_of[u])]])
        model.add_row(f"lbf_capacity[u={u}]", idx, coef, LE, 0)
    model.set_objective(obj)
    return FormulationArtifacts(
        kind, model, links, pb, dict(k_of), dict(d_of), y_index, alpha=alpha,
        x_block=x_block, link_pos=link_pos,
    )


def build_link_based(
    links: CandidateLinkSet, bounds, req: ChainRequirements, *, strict: bool = False
) -> FormulationArtifacts:
    pb = _pair_bounds(bounds, links.pairs)
    k_of = {q: req.k for q in links.pairs}
    d_of = {u: req.d for u in links.repeaters}
    return _build_link_model(links, pb, k_of, d_of, 0.0, strict, "link")


def build_generalized(
    links: CandidateLinkSet,
    bounds,
    req: ChainRequirements,
    alpha: float | None = None,
    *,
    strict: bool = False,
) -> FormulationArtifacts:
    """Per-pair K/N_max/L_max, per-node D and a length-weighted secondary objective.

    ``bounds`` is a Bounds or a pair -> Bounds mapping. Without ``alpha`` the
    weight is 1 / (1 + total-length upper bound), which keeps the secondary
    term below one repeater.
    """
    pb = _pair_bounds(bounds, links.pairs)
    k_of = {q: req.k_for(q) for q in links.pairs}
    d_of = {u: req.d_for(u) for u in links.repeaters}
    if alpha is None:
        alpha = default_alpha(pb, k_of)
    elif alpha < 0 or alpha * length_upper_bound(pb, k_of) >= 1:
        raise ModelError(
            f"alpha={alpha} lets the length term reach one repeater "
            f"(length bound {length_upper_bound(pb, k_of)})"
        )
    return _build_link_model(links, pb, k_of, d_of, float(alpha), strict, "generalized")


def expected_link_var_count(n_repeaters: int, n_pairs: int, k: int) -> int:
    return n_repeaters + k * n_pairs * (n_repeaters**2 + n_repeaters + 1)


def expected_path_var_count(n_repeaters: int, n_pairs: int) -> int:
    return n_repeaters + n_pairs * expected_path_count(n_repeaters)
