"""Command-line entry point.

Subcommands: run (evaluate a pipeline file on a CSV), search (automated
pipeline discovery), list-primitives, serve (HTTP API). Exit codes: 0 ok,
1 usage error, 2 data error, 3 pipeline error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import errors
from .dataset import generate_dataset
from .engine import execute_steps
from .evaluation import (
    METRIC_NAMES,
    Holdout,
    KFold,
    combine_reports,
    evaluate_pipeline,
)
from .pipeline import load_pipeline
from .registry import registry_list
from .search import default_space, export_best, parse_space, search

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PIPELINE = 3

_DATA_ERRORS = (
    errors.EmptyInput,
    errors.BadTargetIndex,
    errors.BadTimestampColumn,
    errors.NonNumericCell,
    errors.RaggedRows,
    errors.MissingGroundTruth,
    errors.NoLabels,
)
_PIPELINE_ERRORS = (
    errors.MalformedJson,
    errors.MalformedPipeline,
    errors.UnknownSchemaVersion,
    errors.UnknownPrimitive,
    errors.UnknownHyperparam,
    errors.HyperparamOutOfRange,
    errors.ForwardReference,
    errors.InvalidPipeline,
    errors.StepFailed,
    errors.FailedCandidate,
    errors.EmptySlot,
)
_USAGE_ERRORS = (errors.BudgetZero, errors.BadScheme)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is exit 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _parse_scheme(text: str):
    kind, _, arg = text.partition(":")
    try:
        if kind == "kfold":
            return KFold(int(arg) if arg else 5)
        if kind == "holdout":
            return Holdout(float(arg) if arg else 0.8)
    except ValueError:
        pass
    raise _UsageError(
        f"--scheme must look like kfold:<k> or holdout:<fraction>, got {text!r}")


def _load_dataset(args):
    try:
        with open(args.data, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise errors.EmptyInput(f"cannot read {args.data}: {exc}") from None
    return generate_dataset(
        text,
        target_index=args.target_index,
        timestamp_column=args.timestamp_column,
        name=os.path.basename(args.data),
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="tods", description="Time-series outlier detection pipelines.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add_data_flags(p):
        p.add_argument("--data", required=True, help="CSV file with a header row")
        p.add_argument("--target-index", type=int, default=None,
                       help="0-based column index of the 0/1 label column")
        p.add_argument("--timestamp-column", type=int, default=None,
                       help="0-based timestamp column (default: column named 'timestamp')")
        p.add_argument("--metric", choices=METRIC_NAMES, default="f1")
        p.add_argument("--scheme", default="kfold:5",
                       help="kfold:<k> or holdout:<train fraction> (default kfold:5)")
        p.add_argument("--seed", type=int, default=42)

    run = sub.add_parser("run", help="evaluate a pipeline file on a dataset")
    add_data_flags(run)
    run.add_argument("--pipeline", required=True, help="pipeline JSON file")
    run.add_argument("--report", choices=("text", "json"), default="text")

    sea = sub.add_parser("search", help="search for the best pipeline on a dataset")
    add_data_flags(sea)
    sea.add_argument("--space", default=None, help="search-space JSON (default: built-in)")
    sea.add_argument("--budget", type=int, default=20, help="max candidate evaluations")
    sea.add_argument("--out", default="best_pipeline.json",
                     help="where to write the winning pipeline")
    sea.add_argument("--report", choices=("text", "json"), default="text")

    lst = sub.add_parser("list-primitives", help="show the primitive registry")
    lst.add_argument("--report", choices=("text", "json"), default="text")

    srv = sub.add_parser("serve", help="start the HTTP API")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--workers", type=int, default=None,
                     help="job worker threads (default: hardware parallelism)")
    srv.add_argument("--cors-origin", default=None)
    srv.add_argument("--ui-dir", default=None, help="serve this directory at /")
    srv.add_argument("--persist", default=None,
                     help="directory for job/dataset snapshots on shutdown")
    return parser


def _cmd_run(args) -> int:
    ds = _load_dataset(args)
    try:
        pipeline = load_pipeline(args.pipeline)
    except OSError as exc:
        raise errors.MalformedPipeline(f"cannot read {args.pipeline}: {exc}") from None
    scheme = _parse_scheme(args.scheme)
    reports, aggregate = evaluate_pipeline(
        ds, pipeline, primary_metric=args.metric, scheme=scheme, seed=args.seed)
    pooled = combine_reports(reports, primary_metric=args.metric)
    _, trace = execute_steps(pipeline, ds)

    if args.report == "json":
        doc = {
            "steps": trace.to_json(),
            **pooled.to_json(),
            "aggregate": aggregate,
            "metric": args.metric,
            "folds": [r.to_json()["scores"] for r in reports],
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"pipeline {pipeline.id}")
        print(f"scheme {args.scheme}  metric {args.metric}")
        for i, r in enumerate(reports):
            print(f"fold {i}: precision={r.precision:.4f} recall={r.recall:.4f} "
                  f"f1={r.f1:.4f} f1_pa={r.f1_pa:.4f}")
        print(f"pooled counts: tp={pooled.tp} fp={pooled.fp} fn={pooled.fn} tn={pooled.tn}")
        print(f"aggregate {args.metric}: {aggregate:.4f}")
    return EXIT_OK


def _cmd_search(args) -> int:
    ds = _load_dataset(args)
    if args.space is None:
        space = default_space()
    else:
        try:
            with open(args.space, encoding="utf-8") as fh:
                space = parse_space(fh.read())
        except OSError as exc:
            raise errors.MalformedJson(f"cannot read {args.space}: {exc}") from None
    scheme = _parse_scheme(args.scheme)
    result = search(
        ds, space, strategy="random", budget=args.budget, seed=args.seed,
        scheme=scheme, primary_metric=args.metric)
    best_json = export_best(result.best)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(best_json)

    if args.report == "json":
        doc = {
            "space_size": result.space_size,
            "evaluated": result.evaluated,
            "best": result.best.to_json(),
            "leaderboard": [r.to_json() for r in result.leaderboard],
            "out": args.out,
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"evaluated {result.evaluated} of {result.space_size} candidates "
              f"(metric {args.metric})")
        for r in result.leaderboard:
            names = " -> ".join(s.primitive_id.rsplit(".", 1)[-1] for s in r.pipeline.steps)
            tail = f"FAILED: {r.error}" if r.status == "failed" else f"{r.aggregate:.4f}"
            print(f"  #{r.ordinal:<3d} {names}: {tail}")
        print(f"best written to {args.out}")
    return EXIT_OK


def _cmd_list_primitives(args) -> int:
    descriptors = registry_list()
    if args.report == "json":
        print(json.dumps([d.to_json() for d in descriptors], indent=2, sort_keys=True))
        return EXIT_OK
    for d in descriptors:
        hps = ", ".join(f"{n}={s.default!r}" for n, s in d.hyperparams.items()) or "-"
        print(f"{d.id:<50s} {d.family.value:<22s} {hps}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        workers=args.workers,
        cors_origin=args.cors_origin,
        ui_dir=args.ui_dir,
        persist_dir=args.persist,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    level = _LOG_LEVELS.get(os.environ.get("TSODS_LOG", "warn"), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.error("a subcommand is required")
        handler = {
            "run": _cmd_run,
            "search": _cmd_search,
            "list-primitives": _cmd_list_primitives,
            "serve": _cmd_serve,
        }[args.command]
        return handler(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"data error ({exc.name}): {exc}", file=sys.stderr)
        return EXIT_DATA
    except _PIPELINE_ERRORS as exc:
        print(f"pipeline error ({exc.name}): {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
