"""Benchmark harness: replay a trace (or a synthetic Zipf stream) through one
sketch and report update/query throughput, memory and accuracy.

    bench --algo hit --epsilon 2^-6 --window 2^13 --zipf 1.0 --universe 65536 \\
          --count 200000 --oracle --interval-pct 1,5,10 --out report.json

Exit status: 0 on success, 1 if oracle mode saw an estimate outside
``[f, f + W*eps]``, 2 for bad flags, configs or unreadable traces.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import make_sketch
from .core import ConfigError, SketchError, parse_epsilon, validate_config

TIMING_FIELDS = ("updates_per_sec", "queries_per_sec", "update_seconds", "query_seconds")


class TraceUnreadable(SketchError):
    pass


class BoundViolation(SketchError):
    pass


@dataclass
class TraceSource:
    path: str | None = None        # None or "-" reads standard input
    column: int | None = None      # 1-based CSV column; None = one token per line
    delimiter: str = ","
    skipped: int = 0
    records: int = 0

    def describe(self) -> dict:
        return {"source": self.path or "-", "column": self.column,
                "records": self.records, "skipped": self.skipped}


def parse_trace(src: TraceSource):
    """Yield item ids in file order.  Blank or short lines are skipped and
    tallied in ``src.skipped``."""
    try:
        handle = sys.stdin if src.path in (None, "-") else open(src.path, newline="")
    except OSError as exc:
        raise TraceUnreadable(f"cannot open trace {src.path!r}: {exc}") from exc
    try:
        if src.column is None:
            for line in handle:
                token = line.strip()
                if not token:
                    src.skipped += 1
                    continue
                src.records += 1
                yield token
        else:
            for row in csv.reader(handle, delimiter=src.delimiter):
                if len(row) < src.column or not row[src.column - 1].strip():
                    src.skipped += 1
                    continue
                src.records += 1
                yield row[src.column - 1].strip()
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise TraceUnreadable(f"error while reading {src.path!r}: {exc}") from exc
    finally:
        if handle is not sys.stdin:
            handle.close()


def zipf_stream(alpha: float, universe: int, count: int, seed: int) -> list[int]:
    """``count`` ids from a Zipf(alpha) law truncated to ``universe`` ranks
    (rank 1 -> id 0).  numpy's own zipf needs alpha > 1 and is unbounded."""
    if universe < 1 or count < 0:
        raise ConfigError("universe must be positive and count non-negative")
    weights = np.arange(1, universe + 1, dtype=float) ** -float(alpha)
    weights /= weights.sum()
    rng = np.random.default_rng(seed)
    return rng.choice(universe, size=count, p=weights).tolist()


def parse_size(text) -> int:
    """``8192`` or ``2^13``."""
    text = str(text).strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        value = int(base) ** int(exp)
    else:
        value = int(text)
    if value <= 0:
        raise ConfigError(f"size must be positive, got {text}")
    return value


@dataclass
class Workload:
    interval_pcts: list = field(default_factory=lambda: [1.0])
    queries: int = 1000
    seed: int = 0


def _sample_queries(rng, window: int, length: int, n: int, codes: np.ndarray):
    """Random intervals of ``length`` inside the window, each asking about the
    item at a random recency (so mostly items that actually occur)."""
    i = rng.integers(0, window - length + 1, size=n)
    probe = rng.integers(1, window + 1, size=n)
    return i, i + length, codes[len(codes) - probe]


def run_bench(window: int, epsilon, algo: str, items, wl: Workload,
              levels: int = 1, block_mode: str = "standard", oracle: bool = False,
              trace_info: dict | None = None, batch: int = 4096) -> dict:
    eps = parse_epsilon(epsilon)
    cfg = validate_config(window, eps, levels, block_mode)
    sketch = make_sketch(algo, window, eps, levels, block_mode)
    items = list(items)

    # dense codes for the oracle and for picking query items
    names: dict = {}
    codes = np.fromiter((names.setdefault(x, len(names)) for x in items),
                        dtype=np.int64, count=len(items))
    lookup = list(names)

    warm = min(window, len(items))
    sketch.extend(items[:warm])
    start = time.perf_counter()
    for k in range(warm, len(items), batch):
        sketch.extend(items[k:k + batch])
    update_seconds = time.perf_counter() - start
    timed = len(items) - warm
    if timed == 0:
        # stream no longer than a window: report the warm-up instead
        start = time.perf_counter()
        update_seconds = 0.0
    updates_per_sec = timed / update_seconds if update_seconds > 0 else None

    rng = np.random.default_rng(wl.seed)
    sweep = []
    all_errors = []
    violations = 0
    query_seconds = 0.0
    query_count = 0
    budget = window * eps
    if len(items) >= window:
        recent = codes[len(codes) - window:]
        for pct in wl.interval_pcts:
            length = min(window, max(1, round(window * pct / 100)))
            lo, hi, probe = _sample_queries(rng, window, length, wl.queries, recent)
            probe_names = [lookup[c] for c in probe]
            lo_list, hi_list = lo.tolist(), hi.tolist()
            start = time.perf_counter()
            estimates = [sketch.interval_query(x, i, j)
                         for x, i, j in zip(probe_names, lo_list, hi_list)]
            spent = time.perf_counter() - start
            query_seconds += spent
            query_count += len(estimates)
            row = {"interval_pct": pct, "length": length, "queries": len(estimates),
                   "queries_per_sec": len(estimates) / spent if spent > 0 else None}
            if oracle:
                errors = []
                bad = 0
                for est, c, i, j in zip(estimates, probe.tolist(), lo_list, hi_list):
                    exact = int(np.count_nonzero(recent[window - j:window - i] == c))
                    err = est - exact
                    errors.append(err)
                    if err < 0 or err > budget:
                        bad += 1
                violations += bad
                all_errors.extend(errors)
                row.update(_error_stats(errors), violations=bad)
            sweep.append(row)

    stats = _error_stats(all_errors) if oracle and all_errors else {"rmse": None, "max_err": None}
    config = {"window": window, "epsilon": str(eps), "k": levels, "block_mode": block_mode,
              "block_size": cfg.block_size, "blocks": cfg.blocks,
              "queries_per_point": wl.queries, "interval_pct": list(wl.interval_pcts),
              "seed": wl.seed, "oracle": oracle, "violations": violations if oracle else None}
    trace = dict(trace_info or {})
    trace["items"] = len(items)
    trace["distinct"] = len(names)
    return {
        "config": config,
        "algo": algo if algo != "acc" else f"acc{levels}",
        "trace": trace,
        "updates_per_sec": updates_per_sec,
        "queries_per_sec": query_count / query_seconds if query_seconds > 0 else None,
        "entries": sketch.live_entries(),
        "bytes_model": sketch.bytes_model(),
        "rmse": stats["rmse"],
        "max_err": stats["max_err"],
        "sweep": sweep,
    }


def _error_stats(errors) -> dict:
    if not errors:
        return {"rmse": None, "max_err": None, "mean_err": None}
    arr = np.asarray(errors, dtype=float)
    return {"rmse": float(math.sqrt(np.mean(arr ** 2))), "max_err": int(arr.max()),
            "mean_err": float(arr.mean())}


def determinism_digest(report: dict) -> str:
    """Hash of the report with wall-clock fields removed."""
    def strip(node):
        if isinstance(node, dict):
            return {k: strip(v) for k, v in node.items() if k not in TIMING_FIELDS}
        if isinstance(node, list):
            return [strip(v) for v in node]
        return node
    blob = json.dumps(strip(report), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def summary(report: dict) -> str:
    cfg = report["config"]
    lines = [f"{report['algo']}  W={cfg['window']} eps={cfg['epsilon']} "
             f"s={cfg['block_size']} items={report['trace']['items']}"]
    ups = report["updates_per_sec"]
    qps = report["queries_per_sec"]
    lines.append(f"  updates/s {ups:,.0f}" if ups else "  updates/s n/a")
    lines.append(f"  queries/s {qps:,.0f}" if qps else "  queries/s n/a")
    lines.append(f"  entries {report['entries']}  bytes~{report['bytes_model']}")
    if report["rmse"] is not None:
        lines.append(f"  rmse {report['rmse']:.2f}  max_err {report['max_err']}  "
                     f"violations {cfg['violations']}")
    for row in report["sweep"]:
        q = row["queries_per_sec"]
        lines.append(f"  {row['interval_pct']:>5}%  len={row['length']:<6} "
                     + (f"{q:,.0f} q/s" if q else "n/a"))
    return "\n".join(lines)


def _pct_list(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        value = float(part)
        if not 0 < value <= 100:
            raise argparse.ArgumentTypeError(f"interval percent {part} outside (0, 100]")
        out.append(int(value) if value.is_integer() else value)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__.split("\n\n")[0])
    p.add_argument("--algo", choices=("raw", "acc", "hit"), required=True)
    p.add_argument("--epsilon", required=True, help="e.g. 2^-6 or 1/64")
    p.add_argument("--window", required=True, help="e.g. 2^13 or 8192")
    p.add_argument("--k", type=int, default=1, help="ACC levels")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="token file, one id per line ('-' = stdin)")
    src.add_argument("--zipf", type=float, metavar="ALPHA")
    p.add_argument("--csv-column", type=int, help="take ids from this 1-based CSV column")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--universe", type=int, default=1 << 16)
    p.add_argument("--count", type=int, default=200_000)
    p.add_argument("--oracle", action="store_true", help="check every query exactly")
    p.add_argument("--interval-pct", type=_pct_list, default=[1])
    p.add_argument("--queries", type=int, default=1000, help="queries per interval size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block-mode", choices=("standard", "reduced"), default="standard")
    p.add_argument("--out", required=True, help="report path ('-' = stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        window = parse_size(args.window)
        eps = parse_epsilon(args.epsilon)
        if args.trace is not None:
            src = TraceSource(args.trace, args.csv_column, args.delimiter)
            items = list(parse_trace(src))
            info = src.describe()
        else:
            items = zipf_stream(args.zipf, args.universe, args.count, args.seed)
            info = {"source": "zipf", "alpha": args.zipf, "universe": args.universe,
                    "count": args.count}
        wl = Workload(args.interval_pct, args.queries, args.seed)
        report = run_bench(window, eps, args.algo, items, wl, args.k, args.block_mode,
                           args.oracle, info)
    except (ConfigError, TraceUnreadable, ValueError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out == "-":
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(summary(report))
    if args.oracle and report["config"]["violations"]:
        print(f"bench: {report['config']['violations']} estimates outside [f, f + W*eps]",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
