"""Command-line front end.

Subcommands mirror the library surface: constants tables, root solving,
surface grids, verification suites, shape checks, extremal reports, and
martingale demos.  All numeric JSON output is printed at 17 significant
digits so identical seeds and flags reproduce byte-identical output; infinite
values are emitted as the explicit marker string "inf".  Exit codes: 0 on
success, 1 when a verification or check fails, 2 on usage errors (including
parameter conflicts such as a norm level at or beyond the integrability
threshold, which is reported together with the threshold value).

The environment variable ``BMO_SEED`` provides the default seed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .concavity import CheckConfig, check_alpha_shape
from .extremals import build_phi_star, sharpness_report
from .geometry import OmegaPoint, in_omega, segment_goodness
from .induction_engine import (
    InductionError,
    bellman_fold,
    random_alpha_tree,
    random_simple_function,
    verify_jn,
    verify_osc,
)
from .jn_bellman import (
    ThresholdError,
    bellman_eval,
    dyadic_constants,
    eps0_alpha,
    solve_delta,
)
from .martingales import (
    MartingaleStructureError,
    binary_martingale_from_function,
    martingale_from_json,
    martingale_goodness,
    square_example,
)
from .osc_bellman import OscRegions, osc_eval, osc_lower_bound
from .tree_core import TreeStructureError, bmo_norms, load_tree, validate_alpha

__all__ = ["main", "RunConfig"]


@dataclass(frozen=True)
class RunConfig:
    """Echo of the run: subcommand, parameters, seed, and output format."""

    subcommand: str
    parameters: dict
    out: str


# -- deterministic JSON/table emission ----------------------------------------


def _fmt_float(x: float) -> str:
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        return '"nan"'
    return format(x, ".17g")


def _to_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {_to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _flatten(obj, prefix=""):
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows.extend(_flatten(v, f"{prefix}{k}." if prefix else f"{k}."))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}{i}."))
    else:
        key = prefix[:-1] if prefix.endswith(".") else prefix
        if isinstance(obj, float):
            rows.append((key, format(obj, ".17g")))
        else:
            rows.append((key, str(obj)))
    return rows


def _emit(payload: dict, out: str) -> None:
    if out == "table":
        rows = _flatten(payload)
        width = max((len(k) for k, _ in rows), default=0)
        for k, v in rows:
            print(f"{k.ljust(width)}  {v}")
    else:
        print(_to_json(payload))


def _default_seed(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get("BMO_SEED", "0"))


def _parse_point(text: str) -> OmegaPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x1,x2', got {text!r}")
    return OmegaPoint(float(parts[0]), float(parts[1]))


# -- subcommand handlers -------------------------------------------------------


def _cmd_tree_validate(args) -> int:
    try:
        tree, phi = load_tree(args.file)
        alpha_max = validate_alpha(tree)
        payload = {
            "command": "tree validate",
            "file": args.file,
            "valid": True,
            "alpha_declared": tree.alpha,
            "alpha_max": alpha_max,
            "nodes": tree.n_nodes,
            "depth": tree.depth,
            "has_values": phi is not None,
        }
        _emit(payload, args.out)
        return 0
    except TreeStructureError as exc:
        payload = {
            "command": "tree validate",
            "file": args.file,
            "valid": False,
            "error": str(exc),
            "node": exc.node,
        }
        _emit(payload, args.out)
        return 1


def _cmd_tree_norms(args) -> int:
    tree, phi = load_tree(args.file)
    if phi is None:
        print("error: tree file carries no values", file=sys.stderr)
        return 2
    norms = bmo_norms(phi)
    worst = max(norms.reports, key=lambda r: r.delta2)
    payload = {
        "command": "tree norms",
        "file": args.file,
        "norm2": norms.norm2,
        "norm1": norms.norm1,
        "nodes": len(norms.reports),
        "worst_node": {
            "node": worst.node,
            "mean": worst.mean,
            "mean_sq": worst.mean_sq,
            "delta1": worst.delta1,
            "delta2": worst.delta2,
        },
    }
    _emit(payload, args.out)
    return 0


def _cmd_segment(args) -> int:
    result = segment_goodness(args.p, args.r, args.eps)
    payload = {
        "command": "segment",
        "p": [args.p.x1, args.p.x2],
        "r": [args.r.x1, args.r.x2],
        "eps": args.eps,
        "total_length": result.total_length,
        "outside_length": result.outside_length,
        "alpha_max": result.alpha_max,
    }
    _emit(payload, args.out)
    return 0


def _cmd_jn_constants(args) -> int:
    consts = dyadic_constants(args.n)
    grid = [consts.eps0 * k / 50.0 for k in range(50)]
    payload = {
        "command": "jn constants",
        "n": args.n,
        "alpha": consts.alpha,
        "eps0": consts.eps0,
        "C_grid": [{"eps": e, "C": consts.C(e)} for e in grid],
    }
    _emit(payload, args.out)
    return 0


def _cmd_jn_delta(args) -> int:
    params = solve_delta(args.alpha, args.eps)
    payload = {
        "command": "jn delta",
        "alpha": params.alpha,
        "eps": params.eps,
        "delta": params.delta,
        "mu": params.mu,
        "K": params.constant,
        "bracket_hi": min(1.0, (1 + args.alpha) * args.eps / (2 * math.sqrt(args.alpha))),
    }
    _emit(payload, args.out)
    return 0


def _surface_csv(eval_fn, eps: float, grid: int, x1_max: float) -> None:
    xs = np.linspace(-x1_max, x1_max, grid)
    ys = np.linspace(0.0, x1_max * x1_max + eps * eps, grid)
    print("x1,x2,value")
    for x1 in xs:
        for x2 in ys:
            if in_omega(OmegaPoint(x1, x2), eps):
                print(f"{x1:.17g},{x2:.17g},{eval_fn(OmegaPoint(x1, x2)):.17g}")
            else:
                print(f"{x1:.17g},{x2:.17g},")


def _cmd_jn_surface(args) -> int:
    params = solve_delta(args.alpha, args.eps)
    x1_max = args.x1_max if args.x1_max is not None else max(1.0, 2.0 * args.eps)
    _surface_csv(lambda x: bellman_eval(x, params), args.eps, args.grid, x1_max)
    return 0


def _cmd_osc_surface(args) -> int:
    regions = OscRegions(args.alpha, args.eps)
    x1_max = (
        args.x1_max
        if args.x1_max is not None
        else args.eps / math.sqrt(args.alpha) + args.eps
    )
    _surface_csv(lambda x: osc_eval(x, regions), args.eps, args.grid, x1_max)
    return 0


def _cmd_osc_bound(args) -> int:
    payload = {
        "command": "osc bound",
        "alpha": args.alpha,
        "eps": args.eps,
        "delta2": args.delta2,
        "bound": osc_lower_bound(args.delta2, args.alpha, args.eps),
    }
    _emit(payload, args.out)
    return 0


def _cmd_verify(args) -> int:
    seed = _default_seed(args.seed)
    rng = np.random.default_rng(seed)
    if args.kind == "jn":
        if not (0.0 < args.eps < eps0_alpha(args.alpha)):
            print(
                f"error: eps={args.eps} must lie below the threshold "
                f"eps0({args.alpha})={eps0_alpha(args.alpha):.17g}",
                file=sys.stderr,
            )
            return 2
        params = solve_delta(args.alpha, args.eps)
        F = lambda x: bellman_eval(x, params, tol=1e-9)
        mode = "concave"
    else:
        regions = OscRegions(args.alpha, args.eps)
        F = lambda x: osc_eval(x, regions, tol=1e-9)
        mode = "convex"

    failures = 0
    worst_margin = math.inf
    chain_violations = 0
    for _ in range(args.trials):
        depth = int(rng.integers(1, args.depth + 1))
        tree = random_alpha_tree(rng, args.alpha, depth)
        phi = random_simple_function(rng, tree, args.eps)
        if args.kind == "jn":
            rep = verify_jn(phi, args.alpha, args.eps)
        else:
            rep = verify_osc(phi, args.alpha, args.eps)
        if not rep.holds:
            failures += 1
        worst_margin = min(worst_margin, rep.worst_margin)
        try:
            bellman_fold(phi, F, mode, args.eps)
        except InductionError:
            chain_violations += 1
    payload = {
        "command": f"verify {args.kind}",
        "alpha": args.alpha,
        "eps": args.eps,
        "trials": args.trials,
        "max_depth": args.depth,
        "seed": seed,
        "failures": failures,
        "chain_violations": chain_violations,
        "worst_margin": worst_margin,
    }
    _emit(payload, args.out)
    return 0 if failures == 0 and chain_violations == 0 else 1


def _cmd_check_shape(args) -> int:
    seed = _default_seed(args.seed)
    cfg = CheckConfig(alpha=args.alpha, eps=args.eps, samples=args.samples, seed=seed)
    if args.which == "jn":
        params = solve_delta(args.alpha, args.eps)
        report = check_alpha_shape(lambda x: bellman_eval(x, params, tol=1e-9), "concave", cfg)
    else:
        regions = OscRegions(args.alpha, args.eps)
        report = check_alpha_shape(lambda x: osc_eval(x, regions), "convex", cfg)
    payload = {
        "command": "check shape",
        "which": args.which,
        "alpha": args.alpha,
        "eps": args.eps,
        "mode": report.mode,
        "samples": report.samples,
        "seed": report.seed,
        "violations": report.violations,
        "worst_violation": report.worst_violation,
    }
    _emit(payload, args.out)
    return 0 if report.violations == 0 else 1


def _cmd_extremal_star(args) -> int:
    star = build_phi_star(args.n, args.depth)
    norms = bmo_norms(star.phi)
    m1, m2 = star.phi.node_moments()
    levels = []
    for k, node in enumerate(star.chain):
        levels.append(
            {
                "k": k,
                "mean": float(m1[node]),
                "mean_closed": star.closed_mean(k),
                "mean_sq": float(m2[node]),
                "mean_sq_closed": star.closed_mean_sq(k),
            }
        )
    payload = {
        "command": "extremal phi-star",
        "n": args.n,
        "depth": args.depth,
        "norm2": norms.norm2,
        "levels": levels,
    }
    _emit(payload, args.out)
    return 0


def _cmd_extremal_sharpness(args) -> int:
    depths = sorted({max(1, args.max_depth // 8), max(1, args.max_depth // 4), max(1, args.max_depth // 2), args.max_depth})
    report = sharpness_report(args.n, args.eps, a=args.a, depths=tuple(depths))
    payload = {
        "command": "extremal sharpness",
        "n": report.n,
        "eps": report.eps,
        "a": report.a,
        "converges": report.converges,
        "ratio": report.ratio,
        "depths": report.depths,
        "values": report.values,
        "limit": report.limit if report.limit is not None else math.inf,
        "gaps": report.gaps,
        "growth_rate": report.growth_rate,
    }
    _emit(payload, args.out)
    return 0


def _cmd_martingale_demo(args) -> int:
    demo = square_example(args.strategy)
    payload = {
        "command": "martingale demo",
        "strategy": demo.strategy,
        "overall_alpha": demo.overall_alpha,
        "chord_overall": demo.report.chord_overall,
        "splits": [
            {"path": g.path or "root", "alpha_max": g.alpha_max, "chord_alpha_max": g.chord_alpha_max}
            for g in demo.report.nodes
        ],
    }
    _emit(payload, args.out)
    return 0


def _cmd_martingale_goodness(args) -> int:
    import json as _json

    with open(args.file, "r", encoding="utf-8") as fh:
        m = martingale_from_json(_json.load(fh))
    report = martingale_goodness(m)
    payload = {
        "command": "martingale goodness",
        "file": args.file,
        "eps": m.eps,
        "overall": report.overall,
        "chord_overall": report.chord_overall,
        "splits": [
            {"path": g.path or "root", "alpha_max": g.alpha_max, "chord_alpha_max": g.chord_alpha_max}
            for g in report.nodes
        ],
    }
    _emit(payload, args.out)
    return 0


def _cmd_martingale_from_function(args) -> int:
    # exploratory: how good are generated martingales for random functions?
    seed = _default_seed(args.seed)
    rng = np.random.default_rng(seed)
    eps = args.eps if args.eps is not None else 0.9 * eps0_alpha(args.alpha)
    tree = random_alpha_tree(rng, args.alpha, args.depth)
    phi = random_simple_function(rng, tree, eps)
    m = binary_martingale_from_function(phi, eps)
    report = martingale_goodness(m)
    payload = {
        "command": "martingale from-function",
        "alpha": args.alpha,
        "eps": eps,
        "depth": args.depth,
        "seed": seed,
        "overall": report.overall,
        "chord_overall": report.chord_overall,
        "splits": len(report.nodes),
    }
    _emit(payload, args.out)
    return 0


# -- parser --------------------------------------------------------------------


def _add_out(parser, choices=("json", "table")):
    parser.add_argument("--out", choices=list(choices), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmo",
        description="BMO on measure trees: sharp constants, strip functions, "
        "verification suites, extremals, and martingale geometry.",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    tree = sub.add_parser("tree", help="tree file utilities").add_subparsers(
        dest="cmd", required=True
    )
    v = tree.add_parser("validate", help="validate a tree JSON file")
    v.add_argument("file")
    _add_out(v)
    v.set_defaults(handler=_cmd_tree_validate)
    nrm = tree.add_parser("norms", help="oscillation norms of the stored function")
    nrm.add_argument("file")
    _add_out(nrm)
    nrm.set_defaults(handler=_cmd_tree_norms)

    seg = sub.add_parser("segment", help="chord goodness in the strip")
    seg.add_argument("--p", type=_parse_point, required=True, metavar="x1,x2")
    seg.add_argument("--r", type=_parse_point, required=True, metavar="x1,x2")
    seg.add_argument("--eps", type=float, required=True)
    _add_out(seg)
    seg.set_defaults(handler=_cmd_segment)

    jn = sub.add_parser("jn", help="exponential-bound machinery").add_subparsers(
        dest="cmd", required=True
    )
    c = jn.add_parser("constants", help="threshold and constant for dimension n")
    c.add_argument("--n", type=int, required=True)
    _add_out(c)
    c.set_defaults(handler=_cmd_jn_constants)
    d = jn.add_parser("delta", help="solve the root equation")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--eps", type=float, required=True)
    _add_out(d)
    d.set_defaults(handler=_cmd_jn_delta)
    s = jn.add_parser("surface", help="CSV grid of the strip function")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--grid", type=int, default=100)
    s.add_argument("--x1-max", dest="x1_max", type=float, default=None)
    s.add_argument("--out", choices=["csv"], default="csv")
    s.set_defaults(handler=_cmd_jn_surface)

    osc = sub.add_parser("osc", help="oscillation-comparison machinery").add_subparsers(
        dest="cmd", required=True
    )
    s = osc.add_parser("surface", help="CSV grid of the comparison function")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--grid", type=int, default=100)
    s.add_argument("--x1-max", dest="x1_max", type=float, default=None)
    s.add_argument("--out", choices=["csv"], default="csv")
    s.set_defaults(handler=_cmd_osc_surface)
    b = osc.add_parser("bound", help="guaranteed 1-oscillation lower bound")
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--delta2", type=float, required=True)
    _add_out(b)
    b.set_defaults(handler=_cmd_osc_bound)

    ver = sub.add_parser("verify", help="randomized verification suites")
    vsub = ver.add_subparsers(dest="kind", required=True)
    for kind in ("jn", "osc"):
        p = vsub.add_parser(kind)
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--depth", type=int, default=5)
        p.add_argument("--seed", type=int, default=None)
        _add_out(p)
        p.set_defaults(handler=_cmd_verify, kind=kind)

    chk = sub.add_parser("check", help="sampled shape checks").add_subparsers(
        dest="cmd", required=True
    )
    sh = chk.add_parser("shape")
    sh.add_argument("--which", choices=["jn", "osc"], required=True)
    sh.add_argument("--alpha", type=float, required=True)
    sh.add_argument("--eps", type=float, required=True)
    sh.add_argument("--samples", type=int, default=100_000)
    sh.add_argument("--seed", type=int, default=None)
    _add_out(sh)
    sh.set_defaults(handler=_cmd_check_shape)

    ext = sub.add_parser("extremal", help="staircase extremal reports").add_subparsers(
        dest="cmd", required=True
    )
    ps = ext.add_parser("phi-star")
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--depth", type=int, required=True)
    _add_out(ps)
    ps.set_defaults(handler=_cmd_extremal_star)
    shp = ext.add_parser("sharpness")
    shp.add_argument("--n", type=int, required=True)
    shp.add_argument("--eps", type=float, required=True)
    shp.add_argument("--a", type=float, default=0.0)
    shp.add_argument("--max-depth", dest="max_depth", type=int, default=200)
    _add_out(shp)
    shp.set_defaults(handler=_cmd_extremal_sharpness)

    mar = sub.add_parser("martingale", help="binary martingale tools").add_subparsers(
        dest="cmd", required=True
    )
    demo = mar.add_parser("demo")
    demo.add_argument("--strategy", choices=["quarters", "halves"], required=True)
    _add_out(demo)
    demo.set_defaults(handler=_cmd_martingale_demo)
    g = mar.add_parser("goodness")
    g.add_argument("file")
    _add_out(g)
    g.set_defaults(handler=_cmd_martingale_goodness)
    ff = mar.add_parser("from-function")
    ff.add_argument("--alpha", type=float, required=True)
    ff.add_argument("--depth", type=int, default=4)
    ff.add_argument("--eps", type=float, default=None)
    ff.add_argument("--seed", type=int, default=None)
    _add_out(ff)
    ff.set_defaults(handler=_cmd_martingale_from_function)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TreeStructureError, MartingaleStructureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
