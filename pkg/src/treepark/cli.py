"""Command line entry point: ``treepark <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import analytic, harness, oracle, parking, trees
from .errors import DegenerateInput, DomainError, InvalidArgument, NumericalFailure, ValidationError
from .laws import arrival_family, parse_law

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

DEFAULT_GRID = [round(0.05 * k, 2) for k in range(1, 20)]


def _json_value(v):
    if isinstance(v, float) and math.isinf(v):
        return None
    if isinstance(v, (np.floating,)):
        return _json_value(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _emit(text: str, out: str | None):
    if out:
        harness.write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _emit_records(records, args):
    if args.format == "json":
        payload = [{k: _json_value(v) for k, v in r.as_dict().items()} for r in records]
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _emit(harness.records_to_csv(records), args.out)


def _table_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([harness._fmt(row[c]) if not isinstance(row[c], float) else format(row[c], ".12g")
                         for c in columns])
    return buf.getvalue()


def _dump(tree: trees.RootedTree, path):
    if path:
        harness.write_atomic(path, tree.to_edge_list())


# ---------------------------------------------------------------- commands


def cmd_simulate_cayley(args):
    if args.dump_tree:
        _dump(trees.sample_cayley_tree(args.n, np.random.default_rng(args.seed)), args.dump_tree)
    records = [harness.estimate_parking_prob_cayley(args.n, a, args.trials, args.seed,
                                                    arrivals=args.arrivals, jobs=args.jobs,
                                                    record_timing=args.timing)
               for a in args.alpha]
    _emit_records(records, args)


def cmd_simulate_gw(args):
    offspring = parse_law(args.offspring)
    if args.dump_tree:
        _dump(trees.sample_gw_tree(offspring, args.max_vertices, np.random.default_rng(args.seed)),
              args.dump_tree)
    records = [harness.estimate_mean_root_visits_gw(offspring, arrival_family(args.arrival, a),
                                                    args.trials, args.seed,
                                                    max_vertices=args.max_vertices, jobs=args.jobs,
                                                    record_timing=args.timing)
               for a in args.alpha]
    _emit_records(records, args)


def cmd_simulate_spine(args):
    offspring = parse_law(args.offspring)
    if args.dump_tree:
        _dump(trees.sample_spine_tree(offspring, args.L, np.random.default_rng(args.seed),
                                      bush_depth=args.bush_depth), args.dump_tree)
    records = [harness.estimate_parking_prob_spine(a, args.L, args.trials, args.seed,
                                                   offspring=offspring, arrivals=args.arrival,
                                                   bush_depth=args.bush_depth, jobs=args.jobs,
                                                   record_timing=args.timing)
               for a in args.alpha]
    _emit_records(records, args)


def cmd_simulate_binary(args):
    records = []
    for a in args.alpha:
        records += harness.estimate_binary_root_visits(args.depth, a, args.trials, args.seed,
                                                       jobs=args.jobs, record_timing=args.timing)
    _emit_records(records, args)


def cmd_rde(args):
    fp = oracle.rde_fixed_point(parse_law(args.arrival), parse_law(args.offspring),
                                K=args.K, tol=args.tol, max_iter=args.max_iter)
    lo, hi = fp.pmf.mean_bounds()
    payload = {"p0": float(fp.pmf.probs[0]), "mean_lo": lo, "mean_hi": _json_value(hi),
               "tail_mass": fp.pmf.tail_mass, "iterations": fp.iterations,
               "converged": fp.converged}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)


def cmd_analytic_table(args):
    grid = args.alpha or DEFAULT_GRID
    if args.jones:
        rows = analytic.jones_table_rows(grid, args.beta)
        cols = ("alpha", "beta", "alpha_c", "mean_X", "conditioned_threshold")
    else:
        rows = analytic.table_rows(grid)
        cols = ("alpha", "p", "s_prime", "mean_X", "parking_prob")
    if args.format == "json":
        _emit(json.dumps([{c: _json_value(r[c]) for c in cols} for r in rows], indent=2) + "\n", args.out)
    else:
        _emit(_table_csv(rows, cols), args.out)


def cmd_sweep(args):
    overrides = {"seed": args.seed, "trials": args.trials, "jobs": args.jobs,
                 "output_path": args.out}
    cfg = harness.ExperimentConfig.from_json(args.config, overrides)
    records = harness.run_sweep(cfg)
    if not cfg.output_path:
        sys.stdout.write(harness.records_to_csv(records))


def cmd_path_count(args):
    pairs = [(args.n, args.m)] if args.m else [(n, m) for n in range(1, args.n + 1)
                                                for m in range(1, n + 1)]
    rows = []
    for n, m in pairs:
        good, total = parking.count_path_parking_functions(n, m)
        expected = parking.konheim_weiss(n, m)
        rows.append({"n": n, "m": m, "parking_functions": good, "sequences": total,
                     "formula": expected, "match": int(good == expected)})
    cols = ("n", "m", "parking_functions", "sequences", "formula", "match")
    if args.format == "json":
        _emit(json.dumps(rows, indent=2) + "\n", args.out)
    else:
        _emit(_table_csv(rows, cols), args.out)
    if not all(r["match"] for r in rows):
        raise NumericalFailure("enumeration disagrees with the closed form")


# ---------------------------------------------------------------- parser


def _common(p, seed_required=True):
    p.add_argument("--alpha", type=float, nargs="+", required=True, help="arrival densities")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--timing", action="store_true", help="fill wall_millis (breaks byte-identical reruns)")
    _output(p)


def _output(p):
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treepark", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-cayley", help="parking probability on uniform rooted trees")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--arrivals", choices=("multinomial", "poisson", "twopoint"), default="multinomial")
    p.add_argument("--dump-tree", metavar="PATH")
    p.set_defaults(func=cmd_simulate_cayley)

    p = sub.add_parser("simulate-gw", help="mean root visits on Galton-Watson trees")
    _common(p)
    p.add_argument("--offspring", default="poisson:1")
    p.add_argument("--arrival", choices=("poisson", "twopoint"), default="poisson")
    p.add_argument("--max-vertices", type=int, default=trees.DEFAULT_MAX_VERTICES)
    p.add_argument("--dump-tree", metavar="PATH")
    p.set_defaults(func=cmd_simulate_gw)

    p = sub.add_parser("simulate-spine", help="parking probability along the spine")
    _common(p)
    p.add_argument("--L", type=int, required=True, help="spine length")
    p.add_argument("--offspring", default="poisson:1")
    p.add_argument("--arrival", choices=("poisson", "twopoint"), default="poisson")
    p.add_argument("--bush-depth", type=int, default=harness.DEFAULT_BUSH_DEPTH)
    p.add_argument("--dump-tree", metavar="PATH")
    p.set_defaults(func=cmd_simulate_spine)

    p = sub.add_parser("simulate-binary", help="root visits on complete binary trees")
    _common(p)
    p.add_argument("--depth", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_simulate_binary)

    p = sub.add_parser("rde", help="distributional fixed point of the root-visit recursion")
    p.add_argument("--arrival", required=True, help="e.g. poisson:0.3, twopoint:0.3, file:pmf.csv")
    p.add_argument("--offspring", default="poisson:1")
    p.add_argument("--K", type=int, default=oracle.DEFAULT_K)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rde)

    p = sub.add_parser("analytic-table", help="closed-form values over an alpha grid")
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--jones", action="store_true", help="binary offspring with paired arrivals")
    p.add_argument("--beta", type=float, default=0.25)
    _output(p)
    p.set_defaults(func=cmd_analytic_table)

    p = sub.add_parser("sweep", help="run a JSON-configured sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("path-count", help="parking functions on a path versus the closed form")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, help="single m (default: every 1 <= m <= k <= n)")
    _output(p)
    p.set_defaults(func=cmd_path_count)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (ValidationError, InvalidArgument, DomainError, DegenerateInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
