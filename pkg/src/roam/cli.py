"""Command line entry point: roam <command> ..."""
from __future__ import annotations

import argparse
import json
import sys

from . import generators as gen
from .errors import RoamError
from .experiments import RUNNERS, run_experiment
from .instance import InvalidInstance, load_instance, save_instance
from .oracle import run_checks
from .robust import best_case_revenue, min_consistency_radius, worst_case_revenue
from .solve import pareto_sweep, solve_ro


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _labels(inst, S):
    """Internal product indices back to the labels used in the input file."""
    return sorted(inst.labels[i] for i in S) if inst.labels else sorted(S)


def _internal(inst, items):
    if not inst.labels:
        return frozenset(items)
    pos = {lab: i for i, lab in enumerate(inst.labels)}
    try:
        return frozenset(pos[i] for i in items)
    except KeyError as exc:
        raise InvalidInstance(f"unknown product {exc.args[0]}") from None


def cmd_solve(args):
    inst = load_instance(args.instance)
    method = args.method.replace("-", "_")
    rep = solve_ro(inst, method)
    out = rep.to_dict()
    out["assortment"] = _labels(inst, rep.assortment)
    out["optima"] = [_labels(inst, S) for S in rep.optima]
    for row, (S, _, _) in zip(out["table"], rep.table):
        row["assortment"] = _labels(inst, S)
    return out


def cmd_eval(args):
    inst = load_instance(args.instance)
    S = _internal(inst, _ints(args.assortment))
    res = best_case_revenue(inst, S) if args.best else worst_case_revenue(inst, S)
    return {"assortment": _labels(inst, S | {0}), "kind": "best" if args.best else "worst", "value": res.value}


def cmd_pareto(args):
    inst = load_instance(args.instance)
    pts = pareto_sweep(inst, args.grid)
    return [{"theta": p.theta, "assortment": _labels(inst, p.assortment), "worst": p.worst_case,
             "best": p.best_case, "change": list(p.improvement)} for p in pts]


def cmd_gen(args):
    params = {"n": args.n}
    if args.m is not None:
        params["m"] = args.m
    if args.k is not None:
        params["k"] = args.k
    if args.sbar is not None:
        params["sbar"] = _ints(args.sbar)
    if args.family is not None:
        params["family"] = args.family
    inst = gen.generate(args.kind, args.seed, **params)
    save_instance(inst, args.output)
    return {"written": args.output, "n": inst.n, "M": inst.M}


def cmd_experiment(args):
    rows = run_experiment(args.name, args.reps, args.seed, args.output, args.workers)
    return {"written": args.output, "rows": len(rows)}


def cmd_oracle(args):
    inst = load_instance(args.instance)
    return json.loads(run_checks(inst, args.check).to_json())


def cmd_min_eta(args):
    inst = load_instance(args.instance)
    return {"norm": inst.norm, "min_eta": min_consistency_radius(inst)}


def build_parser():
    p = argparse.ArgumentParser(prog="roam", description="Robust assortment decisions from past sales data.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="robust assortment")
    s.add_argument("--instance", required=True)
    s.add_argument("--method", default="auto", choices=["auto", "brute", "nested-milp", "two-flow", "closed-form"])
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("eval", help="worst (or best) case revenue of one assortment")
    s.add_argument("--instance", required=True)
    s.add_argument("--assortment", required=True, help="comma separated products, e.g. 0,2,4")
    s.add_argument("--best", action="store_true")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("pareto", help="best case under a worst-case floor, over a grid")
    s.add_argument("--instance", required=True)
    s.add_argument("--grid", type=int, default=101)
    s.set_defaults(func=cmd_pareto)

    s = sub.add_parser("gen", help="write a generated instance")
    s.add_argument("--kind", required=True, choices=list(gen.KINDS))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--sbar")
    s.add_argument("--family", choices=list(gen.FIG6_FAMILIES))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("experiment", help="run a Monte Carlo experiment to CSV")
    s.add_argument("--name", required=True, choices=sorted(RUNNERS))
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("oracle", help="compare fast paths with brute force")
    s.add_argument("--instance", required=True)
    s.add_argument("--check", default="all", choices=["all", "L", "rho", "wc", "ro"])
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("min-eta", help="smallest radius with a consistent model")
    s.add_argument("--instance", required=True)
    s.set_defaults(func=cmd_min_eta)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except (RoamError, ValueError, OSError) as exc:
        print(f"roam: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(out, indent=2))
    if args.command == "oracle" and not out["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
