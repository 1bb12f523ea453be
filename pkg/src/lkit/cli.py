"""Command-line interface.

Subcommands: list-sets, compute, batch, bench, plot. Exit codes: 0 success,
2 partial failure (some sets or rows errored), 1 fatal.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from lkit import runner
from lkit.problems import make_problem
from lkit.registry import FEATURE_SETS, calculate_feature_set, list_feature_sets
from lkit.vizdata import (
    barrier_tree_plot_data,
    cell_mapping_plot_data,
    function_grid,
    info_content_plot_data,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lkit",
                                     description="landscape feature toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("list-sets", help="list available feature sets")
    ls.add_argument("--no-eval", action="store_true",
                    help="exclude sets that need extra function evaluations")
    ls.add_argument("--no-cellmapping", action="store_true",
                    help="exclude sets that need a cell grid")
    ls.add_argument("--format", choices=("table", "json"), default="table")

    for name, helptext in (("compute", "compute features for one instance"),
                           ("batch", "compute features for a CSV of instances"),
                           ("bench", "microbenchmark the feature sets"),
                           ("plot", "export plot data as JSON")):
        p = sub.add_parser(name, help=helptext)
        if name != "batch":
            p.add_argument("--problem", help="built-in problem name")
            p.add_argument("--expression", help="objective expression over x/x1..xd")
        if name == "compute":
            p.add_argument("--design", help="initial-design CSV file (x1..xd,y)")
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--n", type=int, default=800, help="sample size")
        p.add_argument("--sample", choices=("uniform", "lhs"), default="uniform")
        p.add_argument("--blocks", help="blocks per dimension, e.g. 8,5 or 4")
        p.add_argument("--lower", help="lower bound(s), scalar or comma list")
        p.add_argument("--upper", help="upper bound(s), scalar or comma list")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output file (default stdout)")
        if name in ("compute", "batch"):
            p.add_argument("--sets", default="all", help="'all' or comma list of set ids")
            p.add_argument("--control", action="append", default=[],
                           help="control override key=value (repeatable)")
            p.add_argument("--reps", type=int, default=1)
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "batch":
            p.add_argument("--instances", required=True,
                           help="CSV of instances: problem,seed,dim header or dim only")
        if name == "bench":
            p.add_argument("--reps", type=int, default=5)
            p.add_argument("--sets", default="all")
        if name == "plot":
            p.add_argument("--kind", required=True,
                           choices=("cellmapping", "barriertree2d", "barriertree3d",
                                    "infocontent", "function"))
            p.add_argument("--approach", choices=("min", "mean", "near"), default="min")
            p.add_argument("--resolution", type=int, default=50)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-sets":
            return cmd_list_sets(args)
        if args.command == "compute":
            return cmd_compute(args)
        if args.command == "batch":
            return cmd_batch(args)
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "plot":
            return cmd_plot(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _parse_bounds(text, dim):
    if text is None:
        return None
    parts = [float(p) for p in str(text).split(",")]
    if len(parts) == 1:
        return np.full(dim, parts[0])
    if len(parts) != dim:
        raise ValueError(f"expected 1 or {dim} bound values, got {len(parts)}")
    return np.array(parts)


def _parse_blocks(text, dim):
    if text is None:
        return None
    parts = [int(p) for p in str(text).split(",")]
    if len(parts) == 1:
        return [parts[0]] * dim
    if len(parts) != dim:
        raise ValueError(f"expected 1 or {dim} block counts, got {len(parts)}")
    return parts


def _write_output(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_list_sets(args) -> int:
    sets = list_feature_sets(include_eval=not args.no_eval,
                             include_cellmapping=not args.no_cellmapping)
    if args.format == "json":
        print(json.dumps(sets, indent=2))
        return 0
    header = f"{'set':<12} {'size':>4}  {'function':>8}  {'blocks':>6}  {'stochastic':>10}"
    print(header)
    print("-" * len(header))
    for info in sets:
        print(f"{info['id']:<12} {info['size']:>4}  "
              f"{'yes' if info['requires_function'] else 'no':>8}  "
              f"{'yes' if info['requires_blocks'] else 'no':>6}  "
              f"{'yes' if info['stochastic'] else 'no':>10}")
    print(f"{len(sets)} feature sets")
    return 0


def _problem_spec_from_args(args):
    sources = [s for s in (getattr(args, "problem", None),
                           getattr(args, "expression", None),
                           getattr(args, "design", None)) if s]
    if len(sources) != 1:
        raise ValueError("exactly one of --problem, --expression or --design is required")
    if getattr(args, "design", None):
        with open(args.design, encoding="utf-8") as fh:
            X, y = runner.read_design_csv(fh.read())
        return {"design": (X, y), "name": args.design, "dim": X.shape[1]}
    name = args.problem if getattr(args, "problem", None) else args.expression
    return {"name": name, "dim": args.dim}


def cmd_compute(args) -> int:
    spec = _problem_spec_from_args(args)
    dim = spec["dim"]
    control = runner.parse_control_args(args.control)
    blocks = _parse_blocks(args.blocks, dim)
    lower = _parse_bounds(args.lower, dim)
    upper = _parse_bounds(args.upper, dim)
    design = spec.get("design")

    def one_rep(rep: int):
        seed = runner.row_seed(args.seed, rep)
        return runner.compute_instance_row(
            problem_name=spec["name"], dim=dim, instance_seed=args.seed,
            replication=rep, sample_seed=seed, sets=args.sets, control=control,
            n=args.n, sample_method=args.sample, blocks=blocks,
            lower=lower, upper=upper, feature_seed=seed, design=design)

    with ThreadPoolExecutor(max_workers=runner.max_workers()) as pool:
        rows = list(pool.map(one_rep, range(args.reps)))

    had_errors = False
    for _, _, errors in rows:
        for set_id, message in errors.items():
            had_errors = True
            print(f"warning: {set_id}: {message}", file=sys.stderr)

    text = runner.rows_to_csv(rows) if args.format == "csv" else runner.rows_to_json(rows)
    _write_output(text, args.out)
    return 2 if had_errors else 0


def _read_instances(path: str):
    """Instance CSV: header (problem,seed,dim) or (dim) for the named suite."""
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader)]
        instances, bad = [], []
        if header == ["dim"]:
            for line_no, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    instances.append({"problem": "gallagher101", "seed": 0,
                                      "dim": int(row[0])})
                except (ValueError, IndexError):
                    bad.append((line_no, "missing dim"))
        elif header == ["problem", "seed", "dim"]:
            for line_no, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    instances.append({"problem": row[0].strip(),
                                      "seed": int(row[1]), "dim": int(row[2])})
                except (ValueError, IndexError):
                    bad.append((line_no, "expected problem,seed,dim"))
        else:
            raise ValueError("instance CSV header must be 'problem,seed,dim' or 'dim'")
    return instances, bad


def cmd_batch(args) -> int:
    instances, bad = _read_instances(args.instances)
    for line_no, message in bad:
        print(f"warning: skipped row {line_no}: {message}", file=sys.stderr)
    control = runner.parse_control_args(args.control)

    jobs = []
    for idx, inst in enumerate(instances):
        for rep in range(args.reps):
            jobs.append((idx, inst, rep))

    def one(job):
        idx, inst, rep = job
        seed = runner.row_seed(args.seed, idx * args.reps + rep)
        blocks = _parse_blocks(args.blocks, inst["dim"])
        lower = _parse_bounds(args.lower, inst["dim"])
        upper = _parse_bounds(args.upper, inst["dim"])
        try:
            return runner.compute_instance_row(
                problem_name=inst["problem"], dim=inst["dim"],
                instance_seed=inst["seed"], replication=rep, sample_seed=seed,
                sets=args.sets, control=control, n=args.n,
                sample_method=args.sample, blocks=blocks, lower=lower,
                upper=upper, feature_seed=seed)
        except Exception as exc:
            return None, None, {"row": f"{inst}: {exc}"}

    with ThreadPoolExecutor(max_workers=runner.max_workers()) as pool:
        results = list(pool.map(one, jobs))

    rows = [r for r in results if r[0] is not None]
    failed = [r for r in results if r[0] is None]
    partial = bool(bad or failed)
    for _, _, errors in failed:
        print(f"warning: row failed: {errors['row']}", file=sys.stderr)
    for _, _, errors in rows:
        if errors:
            partial = True
            for set_id, message in errors.items():
                print(f"warning: {set_id}: {message}", file=sys.stderr)

    text = runner.rows_to_csv(rows) if args.format == "csv" else runner.rows_to_json(rows)
    _write_output(text, args.out)
    return 2 if partial else 0


def cmd_bench(args) -> int:
    spec = _problem_spec_from_args(args)
    problem = make_problem(spec["name"], spec["dim"], seed=args.seed)
    fo = runner.build_feature_object(problem=problem, n=args.n,
                                     sample_method=args.sample,
                                     sample_seed=runner.row_seed(args.seed, 0),
                                     blocks=_parse_blocks(args.blocks or "4", spec["dim"]),
                                     lower=_parse_bounds(args.lower, spec["dim"]),
                                     upper=_parse_bounds(args.upper, spec["dim"]))
    set_ids = list(FEATURE_SETS) if args.sets == "all" else args.sets.split(",")
    report = {"problem": spec["name"], "dim": spec["dim"], "n": args.n,
              "reps": args.reps, "sets": {}}
    for set_id in set_ids:
        times = []
        for rep in range(args.reps):
            t0 = time.perf_counter()
            calculate_feature_set(fo, set_id, seed=runner.row_seed(args.seed, rep))
            times.append(time.perf_counter() - t0)
        times.sort()
        report["sets"][set_id] = {
            "median_s": float(np.median(times)),
            "q25_s": float(np.quantile(times, 0.25)),
            "q75_s": float(np.quantile(times, 0.75)),
        }
    _write_output(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_plot(args) -> int:
    spec = _problem_spec_from_args(args)
    problem = make_problem(spec["name"], spec["dim"], seed=args.seed)
    if args.kind == "function":
        data = function_grid(problem, args.resolution,
                             lower=_parse_bounds(args.lower, spec["dim"]),
                             upper=_parse_bounds(args.upper, spec["dim"]))
    else:
        fo = runner.build_feature_object(
            problem=problem, n=args.n, sample_method=args.sample,
            sample_seed=runner.row_seed(args.seed, 0),
            blocks=_parse_blocks(args.blocks or "4", spec["dim"]),
            lower=_parse_bounds(args.lower, spec["dim"]),
            upper=_parse_bounds(args.upper, spec["dim"]))
        if args.kind == "cellmapping":
            data = cell_mapping_plot_data(fo, args.approach)
        elif args.kind == "barriertree2d":
            data = barrier_tree_plot_data(fo, args.approach, "2d")
        elif args.kind == "barriertree3d":
            data = barrier_tree_plot_data(fo, args.approach, "3d")
        else:
            data = info_content_plot_data(fo, seed=args.seed)
    _write_output(json.dumps(data) + "\n", args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
