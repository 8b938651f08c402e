"""Command-line front end: gen / solve / export-model / bench / profile."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bench as B
from .errors import BsfError, GenerationTimeout, InfeasibleDensity, MissingCell
from .instances import InstanceSpec, format_solution, generate, read_instance, write_instance

EXIT_OK, EXIT_INFEASIBLE, EXIT_TIMEOUT = 0, 2, 3
EXIT_USAGE = 2  # same as argparse
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("BSF_LOG", "quiet").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(name)s: %(message)s")


def _fail(msg, code):
    print(f"bsf: error: {msg}", file=sys.stderr)
    return code


def cmd_gen(args):
    try:
        g, k = generate(InstanceSpec(args.n, args.p, args.k, args.seed, args.wmin, args.wmax))
    except (InfeasibleDensity, GenerationTimeout, ValueError) as ex:
        return _fail(str(ex), EXIT_INFEASIBLE)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_instance(g, k, args.out, comment=f"n={args.n} p={args.p} k={args.k} seed={args.seed}")
    return EXIT_OK


def _append_csv(records, path):
    text = B.format_records(records)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.exists() and p.stat().st_size > 0:
        text = text.split("\n", 1)[1]
        with p.open("a", encoding="utf-8") as fh:
            fh.write(text)
    else:
        p.write_text(text, encoding="utf-8")


def cmd_solve(args):
    try:
        g, k = read_instance(args.input)
        k = args.k or k
        rec, forest = B.run_method(g, k, args.method, args.time_limit, args.seed, name=Path(args.input).stem)
    except BsfError as ex:
        return _fail(f"{type(ex).__name__}: {ex}", EXIT_INFEASIBLE)
    _append_csv([rec], args.csv)
    if args.out and forest is not None:
        Path(args.out).write_text(format_solution(forest, int(rec.value)), encoding="utf-8")
    if forest is None and rec.status in (B.TIME_LIMIT,):
        return EXIT_TIMEOUT
    if forest is None:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_export(args):
    from .heuristics import heuristic_bnb, seed_columns
    from .models import build_cycle_minmax, build_flow_maxmin, build_flow_minmax, build_rmp, export_mps, write_lp_text

    try:
        g, k = read_instance(args.input)
        k = args.k or k
        if args.model == "flow":
            ub = args.ub if args.ub is not None else heuristic_bnb(g, k).ub
            spec = build_flow_minmax(g, k, ub).spec
        elif args.model == "flow-maxmin":
            spec = build_flow_maxmin(g, k, args.ub, mode=args.mode).spec
        elif args.model == "cyc":
            spec = build_cycle_minmax(g, k).spec
        else:
            h = heuristic_bnb(g, k)
            seed_columns(g, k, h.ub, h.pool, rng_seed=args.seed)
            spec = build_rmp(g, h.pool, k, ub=h.ub).lp
    except BsfError as ex:
        return _fail(f"{type(ex).__name__}: {ex}", EXIT_INFEASIBLE)
    if str(args.out).endswith(".lp"):
        write_lp_text(spec, args.out)
    else:
        export_mps(spec, args.out)
    return EXIT_OK


def cmd_bench(args):
    files = sorted(Path(args.dir).glob("*.txt")) + sorted(Path(args.dir).glob("*.bsf"))
    if not files:
        return _fail(f"no instance files (*.txt, *.bsf) in {args.dir}", EXIT_USAGE)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in B.METHODS:
            return _fail(f"unknown method {m!r}; choose from {', '.join(B.METHODS)}", EXIT_USAGE)
    instances = []
    for f in files:
        try:
            g, k = read_instance(f)
        except BsfError as ex:
            return _fail(f"{f}: {ex}", EXIT_INFEASIBLE)
        instances.append((f.stem, g, k))
    records = B.bench(instances, methods, args.time_limit, args.seed, args.workers)
    if args.csv:
        B.write_records(records, args.csv)
    else:
        sys.stdout.write(B.format_records(records))
    return EXIT_OK


def cmd_profile(args):
    records = B.read_records(args.csv)
    methods = args.methods.split(",") if args.methods else None
    try:
        curves = B.performance_profile(records, methods)
    except MissingCell as ex:
        return _fail(str(ex), EXIT_INFEASIBLE)
    text = B.format_profile_csv(curves)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    sys.stdout.write(B.profile_plot(curves))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="bsf", description="Balanced spanning forests: generate, solve, benchmark.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random connected instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True, help="edge density in (0, 1]")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wmin", type=int, default=1)
    p.add_argument("--wmax", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve one instance with one method")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=B.METHODS, default="bp")
    p.add_argument("--k", type=int, default=None, help="override k from the file")
    p.add_argument("--time-limit", type=float, default=B.DEFAULT_TIME_LIMIT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None, help="append the record here (default: stdout)")
    p.add_argument("--out", default=None, help="write the forest here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export-model", help="write a model as MPS (or .lp text)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", choices=("flow", "flow-maxmin", "cyc", "partition"), required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--ub", type=int, default=None)
    p.add_argument("--mode", choices=("bigM", "theta", "theta-literal"), default="bigM")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bench", help="run methods over every instance in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--methods", default="flow,cyc,bp")
    p.add_argument("--time-limit", type=float, default=B.DEFAULT_TIME_LIMIT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="performance profile from a bench CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--methods", default=None)
    p.add_argument("--out", default=None, help="breakpoints CSV (default: stdout)")
    p.set_defaults(func=cmd_profile)
    return ap


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as ex:
        return _fail(str(ex), EXIT_INFEASIBLE)


if __name__ == "__main__":
    sys.exit(main())
