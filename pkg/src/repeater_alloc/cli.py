"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 the instance has no valid plan
(a JSON report of the failing stage goes to stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis
from .errors import AuditError, NetworkError, PlanFailure, RequirementError
from .ilp import export_lp_text
from .network import NETWORK_SCHEMA, load_network
from .planner import PlanOptions, audit_document, plan, prepare_model
from .randomnet import AttemptsExhausted, generate_feasible, random_network
from .requirements import REQUIREMENTS_SCHEMA, Bounds, derive_bounds, load_requirements

PLAN_FORMAT = """plan output:
  {"repeaters": [id, ...],
   "elementary_links": [{"u", "v", "length_km", "fibers": [[a, b], ...]}, ...],
   "paths": [{"s", "t", "k", "links": [[u, v], ...]}, ...],
   "metrics": {"repeater_count", "connectivity"},
   "provenance": {...}}"""


def _schemas_epilog() -> str:
    return (
        "network JSON schema:\n" + json.dumps(NETWORK_SCHEMA, indent=1)
        + "\n\nrequirements JSON schema:\n" + json.dumps(REQUIREMENTS_SCHEMA, indent=1)
        + "\n\n" + PLAN_FORMAT
        + "\n\nexit codes: 0 success, 1 usage or I/O error, 2 no valid plan (JSON report on stderr)"
    )


class _UsageError(Exception):
    pass


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise _UsageError(f"{path}: invalid JSON: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from exc


def _bounds_override(args):
    if args.lmax_km is None and args.nmax is None:
        return None
    if args.lmax_km is None or args.nmax is None:
        raise _UsageError("--lmax-km and --nmax must be given together")
    return Bounds(args.nmax, args.lmax_km, args.lmax_km)


def _plan_options(args) -> PlanOptions:
    return PlanOptions(
        formulation=args.formulation,
        seed=args.seed,
        canonical=args.canonical,
        bounds=_bounds_override(args),
        alpha=args.alpha,
    )


def cmd_bounds(args) -> int:
    req = load_requirements(_read_json(args.requirements))
    b = derive_bounds(req)
    if args.json:
        print(json.dumps({"n_max": b.n_max, "l_max_km": b.l_max, "l_max_continuous_km": b.l_max_continuous}))
    else:
        print(f"N_max={b.n_max}")
        print(f"L_max={b.l_max:g}")
    return 0


def cmd_plan(args) -> int:
    net = load_network(_read_json(args.network))
    req = load_requirements(_read_json(args.requirements))
    opts = _plan_options(args)
    if args.export_lp:
        _, _, art = prepare_model(net, req, opts)
        _write(args.export_lp, export_lp_text(art.model))
    result = plan(net, req, opts)
    _write(args.out, json.dumps(result.to_dict(), indent=2) + "\n")
    return 0


def cmd_export(args) -> int:
    net = load_network(_read_json(args.network))
    req = load_requirements(_read_json(args.requirements))
    _, _, art = prepare_model(net, req, _plan_options(args))
    _write(args.out, export_lp_text(art.model))
    print(f"variables={art.model.n_vars} constraints={len(art.model.constraints)}", file=sys.stderr)
    return 0


def _unit_config(args) -> analysis.SweepConfig:
    return analysis.SweepConfig(
        n=args.nodes, radius=args.radius, l_max=args.lmax, n_max=args.nmax, k=args.k, d=args.d,
        max_attempts=args.max_attempts,
    )


def cmd_gen(args) -> int:
    if args.ensure_feasible:
        cfg = _unit_config(args)
        try:
            draw = generate_feasible(
                args.nodes, args.radius, args.seed, cfg.requirements(), cfg.options(), args.max_attempts
            )
        except AttemptsExhausted as exc:
            print(json.dumps({"stage": "generate", "message": str(exc), "details": {}}), file=sys.stderr)
            return 2
        net = draw.network
        print(f"attempts={draw.attempts}", file=sys.stderr)
    else:
        net = random_network(args.nodes, args.radius, args.seed)
    _write(args.out, json.dumps(net.to_dict(), indent=2) + "\n")
    return 0


def cmd_sweep(args) -> int:
    base = replace(_unit_config(args), n=args.nodes)
    rows = analysis.sweep(base, args.vary, args.values, args.instances, args.seed, workers=args.workers)
    _write(args.out, analysis.rows_to_csv(rows, analysis.SWEEP_HEADER))
    if args.summary:
        _write(args.summary, analysis.rows_to_csv(analysis.summarize(rows)))
    return 0


def cmd_timing(args) -> int:
    cfg = replace(analysis.TIMING_CONFIG, time_limit=args.time_limit)
    rows = analysis.timing_harness(args.sizes, args.count, cfg, args.seed)
    _write(args.out, analysis.rows_to_csv(analysis.timing_summary(rows), analysis.TIMING_HEADER))
    return 0


def cmd_audit(args) -> int:
    net = load_network(_read_json(args.network))
    violations = audit_document(_read_json(args.plan), net)
    if violations:
        print(json.dumps({"stage": "audit", "message": "plan violates invariants",
                          "details": {"violations": violations}}), file=sys.stderr)
        return 2
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(
        prog="repeater-alloc",
        description="Quantum repeater allocation on fiber networks.",
        epilog=_schemas_epilog(),
        formatter_class=fmt,
    )
    sub = p.add_subparsers(dest="command", required=True)

    def model_flags(sp):
        sp.add_argument("--network", required=True, help="network JSON file")
        sp.add_argument("--requirements", required=True, help="requirements JSON file")
        sp.add_argument("--formulation", choices=["link", "path", "generalized"], default="link")
        sp.add_argument("--lmax-km", type=float, help="override L_max (with --nmax)")
        sp.add_argument("--nmax", type=int, help="override N_max (with --lmax-km)")
        sp.add_argument("--seed", type=int, default=0, help="pair orientation seed")
        sp.add_argument("--canonical", action="store_true", help="orient pairs by node id")
        sp.add_argument("--alpha", type=float, help="length weight for the generalized formulation")

    def unit_flags(sp):
        sp.add_argument("--nodes", type=int, default=25)
        sp.add_argument("--radius", type=float, default=0.9)
        sp.add_argument("--lmax", type=float, default=0.9, help="L_max in unit-square lengths")
        sp.add_argument("--nmax", type=int, default=6)
        sp.add_argument("--k", type=int, default=6)
        sp.add_argument("--d", type=int, default=4)
        sp.add_argument("--max-attempts", type=int, default=5000)

    sp = sub.add_parser("plan", help="solve one instance", epilog=PLAN_FORMAT, formatter_class=fmt)
    model_flags(sp)
    sp.add_argument("--export-lp", help="also write the ILP in LP format")
    sp.add_argument("--out", help="plan JSON destination (default stdout)")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("export", help="write the ILP in LP format without solving")
    model_flags(sp)
    sp.add_argument("--out", help="LP destination (default stdout)")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("gen", help="random geometric network with hull end nodes")
    unit_flags(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ensure-feasible", action="store_true", help="resample until a plan exists")
    sp.add_argument("--out", help="network JSON destination (default stdout)")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("sweep", help="one-parameter sweep over random instances")
    unit_flags(sp)
    sp.add_argument("--vary", choices=list(analysis.VARY), required=True)
    sp.add_argument("--values", type=_float_list, required=True, help="comma-separated, e.g. 4,6,8")
    sp.add_argument("--instances", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", help="per-instance CSV (default stdout)")
    sp.add_argument("--summary", help="per-value mean/stderr CSV")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("timing", help="solve time against network size")
    sp.add_argument("--sizes", type=lambda t: [int(v) for v in _float_list(t)], required=True)
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--time-limit", type=float, default=60.0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_timing)

    sp = sub.add_parser("audit", help="check a plan JSON against its network")
    sp.add_argument("--plan", required=True)
    sp.add_argument("--network", required=True)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("bounds", help="print N_max and L_max from the chain model")
    sp.add_argument("--requirements", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except PlanFailure as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 2
    except AuditError as exc:
        print(json.dumps({"stage": "audit", "message": "plan violates invariants",
                          "details": {"violations": exc.violations}}), file=sys.stderr)
        return 2
    except (_UsageError, NetworkError, RequirementError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
