"""Command-line driver: ``generate``, ``solve``, ``bench`` and ``verify``.

Exit codes: 0 certified or success, 2 iteration cap reached without a
certificate, 1 error or failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench
from .dsm import StepRule, run_dsm
from .errors import ProxCenterError
from .instances import FAMILIES, spec_to_dict
from .pcm import run_pcm
from .problem import load_problem, save_problem
from .prox import MultiplierSpace
from .runs import write_trace
from .verify import verify_problem

EXIT_OK, EXIT_ERROR, EXIT_CAP = 0, 1, 2


def _family_spec(args):
    fam = args.family
    if fam == "random":
        return FAMILIES[fam](args.m, args.M, args.n1, args.seed, args.radius)
    if fam == "kkt":
        return FAMILIES[fam](args.m, args.M, args.n1, args.seed, args.radius)
    if fam == "network":
        return FAMILIES[fam](args.m, args.M, args.n1, args.n2, args.seed, args.radius)
    return FAMILIES[fam](args.M, args.horizon, args.seed)


def cmd_generate(args) -> int:
    inst = _family_spec(args).generate()
    extra = {"spec": spec_to_dict(inst.spec)}
    if inst.known_optimum is not None:
        ko = inst.known_optimum
        extra["known_optimum"] = {"value": ko.value, "x": [x.tolist() for x in ko.x],
                                  "multiplier": ko.multiplier.tolist()}
    save_problem(inst.problem, args.out, extra)
    print(f"wrote {args.out}: {inst.problem.n_agents} agents, dims {inst.problem.dims}, "
          f"{inst.problem.n_eq} eq + {inst.problem.n_ineq} ineq coupling rows")
    return EXIT_OK


def parse_q(text, p) -> MultiplierSpace:
    """``free`` (orthant on inequality rows), ``orthant`` (inequality-only) or ``ball:R``."""
    if text == "free":
        return MultiplierSpace.for_problem(p)
    if text == "orthant":
        if p.n_eq:
            raise ProxCenterError("--q orthant needs a problem without equality coupling")
        return MultiplierSpace.for_problem(p)
    if text.startswith("ball:"):
        return MultiplierSpace.for_problem(p, eq_radius=float(text.split(":", 1)[1]))
    raise ProxCenterError(f"unknown multiplier set {text!r}; use free, orthant or ball:R")


def _lambda_ref(doc):
    ko = doc.get("known_optimum")
    return None if ko is None else np.asarray(ko["multiplier"], float)


def cmd_solve(args) -> int:
    p, doc = load_problem(args.instance)
    q = parse_q(args.q, p)
    lam_ref = _lambda_ref(doc)
    if args.method == "pcm":
        run = run_pcm(p, q, eps=args.eps, max_iter=args.max_iter, variant=args.variant,
                      lambda_ref=lam_ref, adaptive_radius=args.adaptive_radius, exact_dual=args.exact_dual)
    else:
        rule = StepRule(args.step_rule)
        run = run_dsm(p, q, rule=rule, max_iter=args.max_iter or 5000, eps=args.eps, lambda_ref=lam_ref)
    if args.trace:
        write_trace(run.trace, args.trace)
    cert = run.certificate
    summary = {"method": run.method, "status": run.status, "iterations": run.iterations,
               "k_bound": run.k_bound, "smoothing": run.smoothing, "objective": cert.objective,
               "gap_surrogate": cert.gap_surrogate, "eq_violation": cert.eq_violation,
               "ineq_violation": cert.ineq_violation, "violation_target": cert.violation_target,
               "restarts": run.restarts}
    if "known_optimum" in doc:
        summary["known_optimum"] = doc["known_optimum"]["value"]
    print(json.dumps(summary, indent=1))
    return EXIT_OK if run.status in ("certified", "fixed") else EXIT_CAP


def cmd_bench(args) -> int:
    grid = bench.parse_grid(args.grid)
    rows = bench.run_benchmark(grid, output_path=args.out, seed=args.seed, jobs=args.jobs, n1=args.n1)
    sys.stdout.write(bench.format_table(rows))
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"cell {r.key} failed: {r.error}", file=sys.stderr)
    return EXIT_ERROR if failed else EXIT_OK


def cmd_verify(args) -> int:
    p, doc = load_problem(args.instance)
    results = verify_problem(p, seed=args.seed, eps=args.eps, lambda_star=_lambda_ref(doc))
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="proxcenter", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded instance file")
    g.add_argument("--family", choices=sorted(FAMILIES), default="random")
    g.add_argument("--m", type=int, default=10, help="variables per agent")
    g.add_argument("--M", type=int, default=2, help="agents (subsystems for mpc)")
    g.add_argument("--n1", type=int, default=5, help="equality coupling rows")
    g.add_argument("--n2", type=int, default=3, help="inequality coupling rows (network)")
    g.add_argument("--horizon", type=int, default=5, help="prediction horizon (mpc)")
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method", choices=("pcm", "dsm"), default="pcm")
    s.add_argument("--eps", type=float, default=1e-2)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--q", default="free", help="free | orthant | ball:R")
    s.add_argument("--variant", choices=("argmax", "xbar"), default="argmax")
    s.add_argument("--step-rule", choices=("constant", "diminishing"), default="diminishing")
    s.add_argument("--adaptive-radius", action="store_true")
    s.add_argument("--exact-dual", action="store_true")
    s.add_argument("--trace", default=None, help="write a JSON-lines trace here")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run the PCM vs DSM benchmark grid")
    b.add_argument("--grid", default="acceptance",
                   help=f"preset ({', '.join(bench.GRIDS)}) or m:M:eps,... cells")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--n1", type=int, default=bench.DEFAULT_N1)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", default=None, help="CSV table path")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run the invariant suite on an instance file")
    v.add_argument("instance")
    v.add_argument("--eps", type=float, default=0.1)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProxCenterError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
