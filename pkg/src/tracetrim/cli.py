"""Command-line entry point: trace one load, run the optimizer, print reports.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from pathlib import Path

from .errors import TracetrimError
from .harness import AppState, SimHarness
from .operators import Operator
from .search import METRICS_COLUMNS, SearchConfig, optimize
from .trace import trace_to_json_bytes

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

_OPERATOR_NAMES = {"delete": Operator.DELETE, "loop": Operator.LOOP_REWRITE}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="tracetrim",
        description="Trace-guided mutate-and-test optimizer for web page load time.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("app_dir", help="app directory containing app.json")
        p.add_argument("--harness", choices=["sim", "live"], default="sim")
        p.add_argument("--endpoint", default="127.0.0.1:9222",
                       help="live browser debug endpoint (host:port)")
        p.add_argument("--out", default="run", help="output directory")
        p.add_argument("--samples", type=int, default=5,
                       help="oracle warm-up samples")
        p.add_argument("--discard", type=int, default=2,
                       help="warm-up samples to discard")
        p.add_argument("--threshold-mult", type=float, default=3.0)
        p.add_argument("--threshold-floor", type=int, default=None,
                       help="pixel threshold floor (default 0 sim, 25 live)")
        p.add_argument("--timeout-mult", type=float, default=2.0,
                       help="evaluation timeout as a multiple of oracle load time")

    trace_cmd = sub.add_parser("trace", help="evaluate once and print load metrics")
    add_common(trace_cmd)

    opt_cmd = sub.add_parser("optimize", help="run the greedy mutate-and-test search")
    add_common(opt_cmd)
    opt_cmd.add_argument("--operators", default="delete,loop",
                         help="comma list of: delete, loop")
    opt_cmd.add_argument("--max-iterations", type=int, default=10_000)
    opt_cmd.add_argument("--post-samples", type=int, default=1000,
                         help="post-analysis samples per app state")
    opt_cmd.add_argument("--no-persist", action="store_true",
                         help="skip per-evaluation trace/screenshot files")
    opt_cmd.add_argument("--file-order", choices=["lex", "manifest"], default="lex",
                         help="candidate file iteration order")

    report_cmd = sub.add_parser("report", help="summarize a completed run")
    report_cmd.add_argument("run_dir", help="directory written by optimize")
    return parser


def _make_harness(args):
    if args.harness == "live":
        from .liveharness import LiveHarness  # imported lazily; needs no browser here

        return LiveHarness(endpoint=args.endpoint)
    return SimHarness()


def _threshold_floor(args) -> int:
    if args.threshold_floor is not None:
        return args.threshold_floor
    return 25 if args.harness == "live" else 0


def _parse_operators(raw: str) -> tuple[Operator, ...]:
    ops = []
    for token in raw.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token not in _OPERATOR_NAMES:
            raise ValueError(f"unknown operator {token!r} (use delete, loop)")
        ops.append(_OPERATOR_NAMES[token])
    if not ops:
        raise ValueError("no operators selected")
    return tuple(ops)


def cmd_trace(args) -> int:
    app = AppState.load(Path(args.app_dir))
    harness = _make_harness(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for _ in range(max(1, args.samples)):
        results.append(harness.evaluate(app, timeout_ms=30_000.0))
    kept = results[args.discard :] if args.samples > args.discard else results
    metrics = [r.metrics() for r in kept]
    load_ms = statistics.median(m.load_time_ms for m in metrics)
    events = statistics.median_low(m.event_count for m in metrics)
    depth = statistics.median_low(m.max_depth for m in metrics)
    last = results[-1]
    (out_dir / "trace.json").write_bytes(trace_to_json_bytes(last.events))
    (out_dir / "screenshot.png").write_bytes(last.screenshot.to_png())
    print(f"load time: {load_ms:.3f} ms")
    print(f"events:    {events}")
    print(f"depth:     {depth}")
    print(f"loaded:    {'yes' if last.loaded else 'no'}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    app = AppState.load(Path(args.app_dir))
    harness = _make_harness(args)
    cfg = SearchConfig(
        operators=_parse_operators(args.operators),
        max_iterations=args.max_iterations,
        oracle_samples=args.samples,
        warmup_discard=args.discard,
        threshold_multiplier=args.threshold_mult,
        threshold_floor=_threshold_floor(args),
        post_samples=args.post_samples,
        timeout_mult=args.timeout_mult,
        persist_evaluations=not args.no_persist,
        file_order=args.file_order,
    )
    run_dir = Path(args.out)
    run_dir.mkdir(parents=True, exist_ok=True)
    report, patch = optimize(app, harness, cfg, run_dir)
    print(f"attempts: {report.attempts}  kept: {report.kept}  "
          f"reverted: {report.reverted}  inapplicable: {report.inapplicable}")
    _print_deltas(report.to_dict())
    print(f"artifacts: {run_dir}/patch.diff, report.json, metrics.csv")
    if patch.is_empty:
        print("no improvements found (empty patch)")
    return EXIT_OK


def _print_deltas(report: dict) -> None:
    deltas = report["deltas_pct"]
    original = report["original"]["mean"]
    final = report["final"]["mean"]
    print(f"load time: {deltas['time']:+.1f}%  "
          f"({original['load_time_ms']:.3f} ms -> {final['load_time_ms']:.3f} ms)")
    print(f"events:    {deltas['events']:+.1f}%  "
          f"({original['event_count']:.0f} -> {final['event_count']:.0f})")
    print(f"depth:     {deltas['depth']:+.1f}%  "
          f"({original['max_depth']:.0f} -> {final['max_depth']:.0f})")
    lines_total = report["lines_total"]
    pct = 100.0 * report["lines_deleted"] / lines_total if lines_total else 0.0
    print(f"lines deleted: {report['lines_deleted']}/{lines_total} ({pct:.0f}%)")
    print(f"neutral deletions: {report['neutral_rate_pct']:.1f}%")


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    report_path = run_dir / "report.json"
    metrics_path = run_dir / "metrics.csv"
    for path in (report_path, metrics_path):
        if not path.is_file():
            print(f"no {path.name} under {run_dir}", file=sys.stderr)
            return EXIT_RUNTIME
    try:
        with metrics_path.open(newline="", encoding="utf-8") as handle:
            header = next(csv.reader(handle), None)
        if header != METRICS_COLUMNS:
            print(f"corrupt metrics.csv: unexpected header {header}", file=sys.stderr)
            return EXIT_RUNTIME
        report = json.loads(report_path.read_text(encoding="utf-8"))
        _print_deltas(report)
    except (json.JSONDecodeError, KeyError, TypeError, csv.Error) as exc:
        print(f"corrupt run artifacts: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "trace":
            return cmd_trace(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        return cmd_report(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TracetrimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
