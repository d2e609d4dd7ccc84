"""Command-line front end: explore, compare and verify subcommands."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analytics import measure
from .errors import CapacityError, ConfigError, DomainError, ModelParseError, TreeDbError
from .gcl import load_model_file
from .model import Model, SyntheticSpec, generate_synthetic
from .reachability import ReachabilityConfig, explore
from .stores import STORE_KINDS, make_store

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAPACITY = 2


def _default_table_bits() -> int:
    env = os.environ.get("TREEDB_TABLE_BITS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"TREEDB_TABLE_BITS must be an integer, got {env!r}")
    return 20


def _add_common(p: argparse.ArgumentParser, multi_store: bool) -> None:
    src = p.add_argument_group("model source (exactly one)")
    src.add_argument("--model", metavar="PATH", help="guarded-command model file")
    src.add_argument(
        "--synthetic", metavar="KIND:PARAMS",
        help="synthetic set, e.g. identical:n=1000,k=8 or cross:m=64,k=16",
    )
    if multi_store:
        p.add_argument(
            "--stores", default="tree,collapse,hashtable",
            help="comma-separated store kinds to compare (default: %(default)s)",
        )
    else:
        p.add_argument("--store", default="tree", choices=STORE_KINDS)
    p.add_argument("--workers", type=int, default=1, metavar="N")
    p.add_argument("--order", default="stack", choices=("stack", "queue"))
    p.add_argument(
        "--table-bits", type=int, default=None, metavar="B",
        help="node table capacity 2^B (default: $TREEDB_TABLE_BITS or 20; "
        "the reference experiments used 28)",
    )
    p.add_argument("--ref-bits", type=int, default=32, metavar="BITS")
    p.add_argument("--payload", default=None, choices=("vector", "ref", "reftree"))
    p.add_argument("--report", metavar="PATH.json", help="write a JSON report")
    p.add_argument("--csv", metavar="PATH.csv", help="write the delimited table")
    p.add_argument(
        "--figures", action="store_true",
        help="render PNG figures alongside the report",
    )
    p.add_argument("--seed", type=int, default=0, metavar="U64")


def _build_model(args) -> Model:
    if bool(args.model) == bool(args.synthetic):
        raise ConfigError("give exactly one of --model or --synthetic")
    if args.model:
        return load_model_file(args.model)
    return generate_synthetic(SyntheticSpec.parse(args.synthetic))


def _run_one(model: Model, store_kind: str, args, workers: int):
    config = ReachabilityConfig(
        workers=workers,
        order=args.order,
        store=store_kind,
        payload=args.payload if store_kind != "collapse" else "vector",
        table_bits=args.table_bits,
        ref_bits=args.ref_bits,
        seed=args.seed,
    )
    store = make_store(
        store_kind, model, table_bits=args.table_bits, ref_bits=args.ref_bits
    )
    report = explore(model, config, store=store)
    return report, measure(store)


def cmd_explore(args) -> int:
    from . import report as rep

    model = _build_model(args)
    report, stats = _run_one(model, args.store, args, args.workers)
    print(
        f"{model.name}: states={report.states} transitions={report.transitions} "
        f"deadlocks={report.deadlocks} time={report.wall_time:.3f}s"
    )
    print(
        f"store={stats.store} entries={stats.entries_total} "
        f"ratio={stats.ratio:.4f} bytes/state={stats.per_state_bytes:.2f}"
    )
    if report.aborted:
        print(f"aborted: {report.abort_reason} (counts are partial)", file=sys.stderr)

    data = rep.explore_report_dict(report, stats)
    report_path = args.report
    if args.figures and not report_path:
        report_path = "treedb-report.json"
    if report_path:
        path = rep.write_json(data, report_path)
        print(f"report: {path}")
        if args.figures:
            for fig in rep.render_explore_figures(data, path.with_suffix("")):
                print(f"figure: {fig}")
    return EXIT_CAPACITY if report.aborted else EXIT_OK


def cmd_compare(args) -> int:
    from . import report as rep

    model = _build_model(args)
    kinds = [s.strip() for s in args.stores.split(",") if s.strip()]
    if len(kinds) < 2:
        raise ConfigError("--stores needs at least two store kinds")
    runs = []
    aborted = False
    for kind in kinds:
        workers = 1 if kind in ("collapse", "tree-basic") else args.workers
        report, stats = _run_one(model, kind, args, workers)
        aborted = aborted or report.aborted
        runs.append(
            {
                "exploration": {
                    "states": report.states,
                    "transitions": report.transitions,
                    "deadlocks": report.deadlocks,
                    "wall_time": report.wall_time,
                    "workers": report.workers,
                    "aborted": report.aborted,
                },
                "compression": stats.to_dict(),
            }
        )

    header = f"{'store':<16}{'states':>10}{'entries':>10}{'w/state':>10}{'ratio':>9}{'B/state':>9}"
    print(header)
    print("-" * len(header))
    for run in runs:
        c = run["compression"]
        print(
            f"{c['store']:<16}{c['n']:>10}{c['entries_total']:>10}"
            f"{c['per_state_words']:>10.3f}{c['ratio']:>9.4f}{c['per_state_bytes']:>9.2f}"
        )

    data = rep.compare_report_dict(model.name, runs)
    report_path = args.report
    if args.figures and not report_path and not args.csv:
        report_path = "treedb-compare.json"
    stem = None
    if report_path:
        path = rep.write_json(data, report_path)
        stem = path.with_suffix("")
        print(f"report: {path}")
    if args.csv:
        path = rep.write_compare_csv(runs, args.csv)
        stem = stem or path.with_suffix("")
        print(f"csv: {path}")
    if args.figures and stem is not None:
        for fig in rep.render_compare_figures(data, stem):
            print(f"figure: {fig}")
    return EXIT_CAPACITY if aborted else EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_criteria

    wanted = None
    if args.criteria:
        wanted = {int(c) for c in args.criteria.split(",")}
    results = run_criteria(
        wanted, table_bits=args.table_bits, include_scaling=args.scaling
    )
    failed = 0
    for res in results:
        print(res.format_line())
        if res.gating and res.passed is False:
            failed += 1
    print(f"{sum(1 for r in results if r.passed)}/{len(results)} criteria passed")
    return EXIT_USAGE if failed else EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="treedb",
        description="Tree-compressed state storage: exploration, comparison, verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_explore = sub.add_parser("explore", help="run reachability and report compression")
    _add_common(p_explore, multi_store=False)
    p_explore.set_defaults(func=cmd_explore)

    p_compare = sub.add_parser("compare", help="run one model against several stores")
    _add_common(p_compare, multi_store=True)
    p_compare.set_defaults(func=cmd_compare)

    p_verify = sub.add_parser("verify", help="run the acceptance criteria")
    p_verify.add_argument("--criteria", metavar="1,2,...", help="subset to run")
    p_verify.add_argument("--table-bits", type=int, default=None, metavar="B")
    p_verify.add_argument(
        "--scaling", action="store_true",
        help="include the environment-dependent scaling smoke test",
    )
    p_verify.set_defaults(func=cmd_verify)

    try:
        args = parser.parse_args(argv)
        if getattr(args, "table_bits", None) is None:
            args.table_bits = _default_table_bits()
        return args.func(args)
    except (ConfigError, ModelParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TreeDbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
