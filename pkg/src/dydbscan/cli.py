"""Command-line harness.

    dydbscan run      --input data.csv | --ops stream.txt  [--algorithm dynamic]
    dydbscan compare  --input data.csv --algorithm dynamic,fixed-core --ordering by-cluster
    dydbscan bench    --sizes 1000,10000,100000

Exit codes: 0 success, 2 usage or input error, 1 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import forest
from .core import Config, DynamicDBSCAN
from .errors import InputError, InvariantError, UsageError
from .evalkit import generate_blobs, standardize
from .stream import (
    ALGORITHMS,
    BatchRow,
    arrival_order,
    events_from_matrix,
    load_csv,
    make_algorithm,
    parse_ops,
    run_events,
)

log = logging.getLogger("dydbscan")

ROW_FIELDS = [
    "algorithm",
    "batch_index",
    "live_points",
    "elapsed_ms",
    "ari",
    "nmi",
    "cluster_count",
    "noise_count",
]
BENCH_FIELDS = ["n", "mean_update_us", "p99_update_us", "mean_query_us"]


class CLIError(Exception):
    """Reported to the user with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def write_rows(rows: list[BatchRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, f)) for f in ROW_FIELDS])


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", type=Path, help="CSV with header; optional label column")
    src.add_argument("--ops", type=Path, help="op stream: 'A <id> <v...>' / 'D <id>' lines")
    p.add_argument("--label-column", default="label")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--t", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=1000)
    p.add_argument("--ordering", choices=["random", "by-cluster"], default="random")
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--backend", choices=["auto", "ext", "python"], default="auto")
    p.add_argument("--debug", action="store_true", help="validate invariants after each batch")
    p.add_argument("--output", type=Path, help="CSV destination (default: stdout)")
    p.add_argument("--summary", type=Path, help="JSON summary destination (default: stderr)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dydbscan", description="Dynamic DBSCAN workload harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="replay a workload through one algorithm")
    _add_common(run)
    run.add_argument("--algorithm", default="dynamic")

    cmp_ = sub.add_parser("compare", help="replay one workload through several algorithms")
    _add_common(cmp_)
    cmp_.add_argument("--algorithm", default="dynamic,static-hash,fixed-core")

    bench = sub.add_parser("bench", help="per-update and per-query timing on blob streams")
    bench.add_argument("--sizes", default="1000,10000,100000")
    bench.add_argument("--k", type=int, default=10)
    bench.add_argument("--t", type=int, default=10)
    bench.add_argument("--eps", type=float, default=0.75)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--dim", type=int, default=10)
    bench.add_argument("--clusters", type=int, default=10)
    bench.add_argument("--queries", type=int, default=10000)
    bench.add_argument("--no-standardize", action="store_true")
    bench.add_argument("--backend", choices=["auto", "ext", "python"], default="auto")
    bench.add_argument("--output", type=Path)
    bench.add_argument("--summary", type=Path)
    return parser


# ---------------------------------------------------------------- workload


def load_workload(args) -> tuple[list, dict | None, dict]:
    """Events, ground truth (or None) and a description for the summary."""
    if args.ops is not None:
        with open(args.ops, encoding="utf-8") as fh:
            events = parse_ops(fh)
        return events, None, {"source": str(args.ops), "format": "ops"}
    if args.input is None:
        raise CLIError("one of --input or --ops is required")
    X, y = load_csv(args.input, args.label_column)
    if len(X) >= 2 and not args.no_standardize:
        X = standardize(X)
    order = arrival_order(y, len(X), args.ordering, args.seed)
    events = events_from_matrix(X, order)
    truth = None if y is None else {i: int(v) for i, v in enumerate(y)}
    desc = {
        "source": str(args.input),
        "format": "csv",
        "ordering": args.ordering,
        "standardized": not args.no_standardize,
    }
    return events, truth, desc


def _algorithms(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise CLIError("no algorithm given")
    for n in names:
        if n not in ALGORITHMS:
            raise CLIError(f"unknown algorithm {n!r}; choose from {', '.join(ALGORITHMS)}")
    return names


def _emit(args, rows_writer, summary: dict) -> None:
    if args.output is not None:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            rows_writer(fh)
    else:
        rows_writer(sys.stdout)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.summary is not None:
        args.summary.write_text(text + "\n", encoding="utf-8")
    else:
        print(text, file=sys.stderr)


def _summary_row(row: BatchRow | None) -> dict | None:
    if row is None:
        return None
    return {
        "batches": row.batch_index + 1,
        "live_points": row.live_points,
        "ari": row.ari,
        "nmi": row.nmi,
        "cluster_count": row.cluster_count,
        "noise_count": row.noise_count,
    }


def cmd_replay(args) -> int:
    names = _algorithms(args.algorithm)
    if args.command == "run" and len(names) != 1:
        raise CLIError("run takes a single algorithm; use compare for several")
    cfg = Config(args.k, args.t, args.eps, args.seed)
    events, truth, desc = load_workload(args)
    backend = None if args.backend == "auto" else args.backend
    rows: list[BatchRow] = []
    summary = {
        "config": {"k": cfg.k, "t": cfg.t, "epsilon": cfg.epsilon, "seed": cfg.seed,
                   "batch_size": args.batch_size},
        "input": desc,
        "events": len(events),
        "algorithms": {},
    }
    for name in names:
        algo = make_algorithm(name, cfg, backend=backend, debug=args.debug)
        t0 = time.perf_counter()
        report = run_events(events, algo, args.batch_size, truth)
        log.info("%s: %d batches in %.2fs", name, len(report.rows), time.perf_counter() - t0)
        rows.extend(report.rows)
        summary["algorithms"][name] = {
            "final": _summary_row(report.final),
            "total_ms": round(sum(r.elapsed_ms for r in report.rows), 3),
        }
    _emit(args, lambda fh: write_rows(rows, fh), summary)
    return 0


# ---------------------------------------------------------------- bench


def bench_size(n: int, cfg: Config, *, d: int = 10, clusters: int = 10, queries: int = 10000,
               standardized: bool = True, backend: str | None = None, repeat: int = 3) -> dict:
    """Time n blob insertions one by one, then a batch of get_cluster queries.

    The query batch is replayed ``repeat`` times and the fastest pass is kept,
    as timeit does, so scheduler noise does not inflate the mean.
    """
    ds = generate_blobs(n, min(clusters, n), d, 10.0, 0.5, seed=cfg.seed)
    X = standardize(ds.points) if standardized and n >= 2 else ds.points
    X = X[np.random.default_rng([cfg.seed, 2]).permutation(n)]
    db = DynamicDBSCAN.from_config(cfg, backend=backend)
    times = np.empty(n, dtype=np.int64)
    clock = time.perf_counter_ns
    add = db.add_point
    for i in range(n):
        t0 = clock()
        add(X[i])
        times[i] = clock() - t0
    ids = db.ids()
    picks = np.random.default_rng([cfg.seed, 3]).integers(0, len(ids), size=queries)
    sample = [ids[j] for j in picks]
    get = db.get_cluster
    best = None
    for _ in range(max(repeat, 1)):
        t0 = clock()
        for pid in sample:
            get(pid)
        elapsed = clock() - t0
        best = elapsed if best is None else min(best, elapsed)
    q_ns = best / max(len(sample), 1)
    return {
        "n": n,
        "mean_update_us": float(times.mean()) / 1e3,
        "p99_update_us": float(np.percentile(times, 99)) / 1e3,
        "mean_query_us": q_ns / 1e3,
    }


def cmd_bench(args) -> int:
    try:
        sizes = sorted({int(s) for s in args.sizes.split(",") if s.strip()})
    except ValueError:
        raise CLIError(f"--sizes must be a comma-separated list of integers, got {args.sizes!r}")
    if not sizes or sizes[0] < 1:
        raise CLIError("--sizes needs positive integers")
    cfg = Config(args.k, args.t, args.eps, args.seed)
    backend = None if args.backend == "auto" else args.backend
    results = []
    for n in sizes:
        res = bench_size(n, cfg, d=args.dim, clusters=args.clusters, queries=args.queries,
                         standardized=not args.no_standardize, backend=backend)
        log.info("n=%d mean update %.1fus", n, res["mean_update_us"])
        results.append(res)

    def writer(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_FIELDS)
        for r in results:
            w.writerow([r["n"]] + [f"{r[f]:.3f}" for f in BENCH_FIELDS[1:]])

    used = backend or forest.BACKEND
    summary = {
        "config": {"k": cfg.k, "t": cfg.t, "epsilon": cfg.epsilon, "seed": cfg.seed},
        "backend": used,
        "rows": results,
    }
    if len(results) > 1:
        summary["update_ratio"] = results[-1]["mean_update_us"] / results[0]["mean_update_us"]
        summary["query_ratio"] = results[-1]["mean_query_us"] / results[0]["mean_query_us"]
    _emit(args, writer, summary)
    return 0


# ---------------------------------------------------------------- entry


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        if args.command == "bench":
            return cmd_bench(args)
        return cmd_replay(args)
    except (CLIError, InputError, UsageError) as exc:
        print(f"dydbscan: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"dydbscan: error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"dydbscan: internal invariant violated: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
