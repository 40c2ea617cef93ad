"""Greedy keep-if-correct search over mutation candidates.

One candidate is applied at a time to a working copy; the page is evaluated
and judged against the oracle screenshot. A passing mutation is kept (and
candidates re-enumerated from a fresh trace), a failing one is reverted
byte-exactly. Correctness alone decides keep/revert; performance metrics are
logged for post-analysis but never steer the search.
"""

from __future__ import annotations

import csv
import difflib
import hashlib
import json
import shutil
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .correctness import judge
from .harness import AppState, HarnessResult, OracleProfile, warmup_oracle
from .jsparse import parse_source
from .operators import (
    MutationCandidate,
    Operator,
    apply_candidate,
    enumerate_deletions,
    enumerate_loop_sites,
)
from .trace import (
    build_call_tree,
    compute_metrics,
    extract_targets,
    trace_to_json_bytes,
)

REPORT_SCHEMA = "tracetrim-report@1"
METRICS_COLUMNS = [
    "iteration",
    "candidateId",
    "operator",
    "outcome",
    "loadTimeMs",
    "eventCount",
    "maxDepth",
    "pixelDiff",
    "wallClockMs",
]


@dataclass(frozen=True, slots=True)
class SearchConfig:
    operators: tuple[Operator, ...] = (Operator.DELETE, Operator.LOOP_REWRITE)
    max_iterations: int = 10_000
    oracle_samples: int = 5
    warmup_discard: int = 2
    threshold_multiplier: float = 3.0
    threshold_floor: int = 0
    post_samples: int = 1000
    timeout_mult: float = 2.0
    fuzz: int = 0
    persist_evaluations: bool = True
    file_order: str = "lex"  # or "manifest": candidate files in manifest order

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.post_samples < 1:
            raise ValueError("post_samples must be >= 1")
        if not self.operators:
            raise ValueError("at least one operator required")
        if self.file_order not in ("lex", "manifest"):
            raise ValueError("file_order must be 'lex' or 'manifest'")


@dataclass(frozen=True, slots=True)
class MetricStats:
    mean: float
    variance: float


@dataclass(frozen=True, slots=True)
class MetricsSummary:
    load_time_ms: MetricStats
    event_count: MetricStats
    max_depth: MetricStats
    samples: int


@dataclass(frozen=True, slots=True)
class PatchHunk:
    file_name: str
    text: str


@dataclass(slots=True)
class Patch:
    hunks: list[PatchHunk]
    kept_ids: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(hunk.text for hunk in self.hunks)

    @property
    def is_empty(self) -> bool:
        return not self.hunks


@dataclass(slots=True)
class OptimizationReport:
    oracle: OracleProfile
    original: MetricsSummary
    final: MetricsSummary
    deltas_pct: dict[str, float]
    attempts: int
    kept: int
    reverted: int
    inapplicable: int
    neutral_rate_pct: float
    neutral_rate_by_operator: dict[str, float]
    lines_deleted: int
    lines_total: int
    per_iteration_wall_clock_s: list[float]
    kept_candidates: list[dict]
    final_verified: bool
    config: dict | None = None

    def to_dict(self) -> dict:
        oracle_metrics = self.oracle.metrics
        return {
            "schema": REPORT_SCHEMA,
            "config": self.config or {},
            "oracle": {
                "load_time_ms": oracle_metrics.load_time_ms,
                "event_count": oracle_metrics.event_count,
                "max_depth": oracle_metrics.max_depth,
                "threshold": self.oracle.threshold,
                "timeout_ms": self.oracle.timeout_ms,
            },
            "original": _summary_dict(self.original),
            "final": _summary_dict(self.final),
            "deltas_pct": self.deltas_pct,
            "attempts": self.attempts,
            "kept": self.kept,
            "reverted": self.reverted,
            "inapplicable": self.inapplicable,
            "neutral_rate_pct": self.neutral_rate_pct,
            "neutral_rate_by_operator": self.neutral_rate_by_operator,
            "lines_deleted": self.lines_deleted,
            "lines_total": self.lines_total,
            "per_iteration_wall_clock_s": self.per_iteration_wall_clock_s,
            "kept_candidates": self.kept_candidates,
            "final_verified": self.final_verified,
        }


def _summary_dict(summary: MetricsSummary) -> dict:
    return {
        "mean": {
            "load_time_ms": summary.load_time_ms.mean,
            "event_count": summary.event_count.mean,
            "max_depth": summary.max_depth.mean,
        },
        "variance": {
            "load_time_ms": summary.load_time_ms.variance,
            "event_count": summary.event_count.variance,
            "max_depth": summary.max_depth.variance,
        },
        "samples": summary.samples,
    }


def _stats(values: list[float]) -> MetricStats:
    mean = statistics.fmean(values)
    variance = statistics.variance(values) if len(values) > 1 else 0.0
    return MetricStats(mean=mean, variance=variance)


def sample_performance(
    harness,
    app: AppState,
    n: int,
    discard: int,
    timeout_ms: float,
    observer=None,
    label: str = "post",
) -> MetricsSummary:
    """Mean and sample variance per metric over n evaluations minus warm-up."""
    if not n > discard >= 0:
        raise ValueError("need n > discard >= 0")
    metrics = []
    for _ in range(n):
        result = harness.evaluate(app, timeout_ms)
        if observer:
            observer(result, label)
        metrics.append(result.metrics())
    kept = metrics[discard:]
    return MetricsSummary(
        load_time_ms=_stats([m.load_time_ms for m in kept]),
        event_count=_stats([float(m.event_count) for m in kept]),
        max_depth=_stats([float(m.max_depth) for m in kept]),
        samples=len(kept),
    )


def emit_patch(pristine_dir: Path | str, final_dir: Path | str) -> Patch:
    """Unified diff (3 context lines) between two corpora sharing a manifest."""
    pristine_dir = Path(pristine_dir)
    final_dir = Path(final_dir)
    app = AppState.load(pristine_dir)
    hunks = []
    for name in sorted(entry.file_name for entry in app.manifest):
        before = (pristine_dir / name).read_text(encoding="utf-8")
        after = (final_dir / name).read_text(encoding="utf-8")
        diff = list(
            difflib.unified_diff(
                before.splitlines(keepends=True),
                after.splitlines(keepends=True),
                fromfile=f"a/{name}",
                tofile=f"b/{name}",
                n=3,
            )
        )
        if diff:
            hunks.append(PatchHunk(file_name=name, text="".join(diff)))
    return Patch(hunks=hunks)


class _RunLog:
    """metrics.csv rows plus optional per-evaluation trace/screenshot files."""

    def __init__(self, run_dir: Path, persist: bool):
        self.run_dir = run_dir
        self.persist = persist
        self.rows: list[list] = []
        self.counter = 0
        (run_dir / "traces").mkdir(parents=True, exist_ok=True)
        (run_dir / "screens").mkdir(parents=True, exist_ok=True)

    def record(
        self,
        result: HarnessResult | None,
        outcome: str,
        candidate: MutationCandidate | None = None,
        pixel_diff_count: int | None = None,
    ):
        index = self.counter
        self.counter += 1
        if result is None:
            metrics_cells = ["", "", "", "", ""]
        else:
            metrics = result.metrics()
            metrics_cells = [
                metrics.load_time_ms,
                metrics.event_count,
                metrics.max_depth,
                pixel_diff_count if pixel_diff_count is not None else "",
                result.wall_clock_ms,
            ]
        self.rows.append(
            [
                index,
                candidate.id if candidate else "",
                candidate.operator.value if candidate else "",
                outcome,
            ]
            + metrics_cells
        )
        if result is not None and self.persist and not outcome.startswith("post"):
            stem = f"{index:04d}_{outcome}"
            (self.run_dir / "traces" / f"{stem}.json").write_bytes(
                trace_to_json_bytes(result.events)
            )
            (self.run_dir / "screens" / f"{stem}.png").write_bytes(
                result.screenshot.to_png()
            )

    def write_csv(self):
        path = self.run_dir / "metrics.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(METRICS_COLUMNS)
            writer.writerows(self.rows)


def _enumerate_queue(
    work_dir: Path,
    script_files: list[str],
    events,
    operators,
    file_order: str = "lex",
) -> list[MutationCandidate]:
    """All candidates: files in the configured order, spans descending within a file."""
    targets = extract_targets(build_call_tree(events), script_files)
    ordered_files = sorted(script_files) if file_order == "lex" else list(script_files)
    queue: list[MutationCandidate] = []
    for file_name in ordered_files:
        text = (work_dir / file_name).read_text(encoding="utf-8")
        ast = parse_source(text)
        file_candidates: list[MutationCandidate] = []
        if Operator.DELETE in operators:
            file_candidates.extend(enumerate_deletions(ast, file_name, targets))
        if Operator.LOOP_REWRITE in operators:
            file_candidates.extend(enumerate_loop_sites(ast, file_name))
        file_candidates.sort(
            key=lambda c: (-c.span[0], -c.span[1], c.operator.value, c.id)
        )
        queue.extend(file_candidates)
    return queue


def _count_deleted_lines(patch: Patch) -> int:
    deleted = 0
    for hunk in patch.hunks:
        for line in hunk.text.splitlines():
            if line.startswith("-") and not line.startswith("---"):
                deleted += 1
    return deleted


def _rate(kept: int, denominator: int) -> float:
    return 100.0 * kept / denominator if denominator else 0.0


def optimize(
    app: AppState, harness, cfg: SearchConfig, run_dir: Path | str
) -> tuple[OptimizationReport, Patch]:
    """Run the full search on a copy of the app; artifacts land in run_dir.

    The input corpus is never modified: it is copied to run_dir/pristine and
    run_dir/work, and the search edits only the working copy. Writes
    patch.diff, report.json, and metrics.csv on completion.
    """
    run_dir = Path(run_dir)
    pristine_dir = run_dir / "pristine"
    work_dir = run_dir / "work"
    app_root = Path(app.root_dir).resolve()
    resolved_run = run_dir.resolve()
    if resolved_run == app_root or app_root in resolved_run.parents:
        raise ValueError("the output directory must not live inside the app directory")
    for target in (pristine_dir, work_dir):
        if target.resolve() == app_root:
            raise ValueError("the output directory would overwrite the app directory")
        if target.exists():
            shutil.rmtree(target)
        shutil.copytree(app.root_dir, target)
    work_app = AppState.load(work_dir)
    pristine_app = AppState.load(pristine_dir)
    script_files = work_app.script_files()

    log = _RunLog(run_dir, persist=cfg.persist_evaluations)
    profile = warmup_oracle(
        harness,
        work_app,
        samples=cfg.oracle_samples,
        discard=cfg.warmup_discard,
        multiplier=cfg.threshold_multiplier,
        floor=cfg.threshold_floor,
        timeout_mult=cfg.timeout_mult,
        observer=log.record,
    )

    trace_result = harness.evaluate(work_app, profile.timeout_ms)
    log.record(trace_result, "trace")
    current_events = trace_result.events

    attempted: set[str] = set()
    attempts = kept = reverted = inapplicable = 0
    op_attempts: dict[str, int] = {op.value: 0 for op in cfg.operators}
    op_kept: dict[str, int] = {op.value: 0 for op in cfg.operators}
    op_inapplicable: dict[str, int] = {op.value: 0 for op in cfg.operators}
    kept_candidates: list[dict] = []
    kept_ids: list[str] = []
    wall_clock_s: list[float] = []

    queue = _enumerate_queue(
        work_dir, script_files, current_events, cfg.operators, cfg.file_order
    )
    index = 0
    while index < len(queue) and attempts < cfg.max_iterations:
        candidate = queue[index]
        index += 1
        if candidate.id in attempted:
            continue
        attempted.add(candidate.id)
        attempts += 1
        op_attempts[candidate.operator.value] += 1

        file_path = work_dir / candidate.file_name
        original_bytes = file_path.read_bytes()
        original_sha = hashlib.sha256(original_bytes).hexdigest()
        mutated = apply_candidate(
            original_bytes.decode("utf-8"), candidate
        )
        if mutated is None:
            inapplicable += 1
            op_inapplicable[candidate.operator.value] += 1
            wall_clock_s.append(0.0)
            log.record(None, "inapplicable", candidate=candidate)
            continue

        file_path.write_text(mutated.new_text, encoding="utf-8")
        result = harness.evaluate(work_app, profile.timeout_ms)
        verdict = judge(
            profile.screenshot,
            result.screenshot,
            profile.threshold,
            result.loaded,
            fuzz=cfg.fuzz,
        )
        wall_clock_s.append(result.wall_clock_ms / 1000.0)
        if verdict.passed:
            kept += 1
            op_kept[candidate.operator.value] += 1
            kept_ids.append(candidate.id)
            kept_candidates.append(
                {
                    "id": candidate.id,
                    "file": candidate.file_name,
                    "operator": candidate.operator.value,
                    "preview": candidate.preview,
                    "removed_text": candidate.removed_text,
                }
            )
            log.record(result, "kept", candidate=candidate,
                       pixel_diff_count=verdict.pixel_diff)
            # Monotone validity: every script file must still parse.
            for name in script_files:
                parse_source((work_dir / name).read_text(encoding="utf-8"))
            # The passing evaluation's trace is the fresh trace of this state.
            current_events = result.events
            queue = _enumerate_queue(
                work_dir, script_files, current_events, cfg.operators,
                cfg.file_order,
            )
            index = 0
        else:
            file_path.write_bytes(original_bytes)
            restored_sha = hashlib.sha256(file_path.read_bytes()).hexdigest()
            if restored_sha != original_sha:
                raise RuntimeError(
                    f"revert of {candidate.file_name} is not byte-exact"
                )
            reverted += 1
            log.record(result, "reverted", candidate=candidate,
                       pixel_diff_count=verdict.pixel_diff)

    # Safety: the final state must still pass against the oracle.
    verify_result = harness.evaluate(work_app, profile.timeout_ms)
    verify_verdict = judge(
        profile.screenshot,
        verify_result.screenshot,
        profile.threshold,
        verify_result.loaded,
        fuzz=cfg.fuzz,
    )
    log.record(verify_result, "verify", pixel_diff_count=verify_verdict.pixel_diff)

    original_summary = sample_performance(
        harness,
        pristine_app,
        cfg.post_samples + cfg.warmup_discard,
        cfg.warmup_discard,
        profile.timeout_ms,
        observer=log.record,
        label="post-original",
    )
    final_summary = sample_performance(
        harness,
        work_app,
        cfg.post_samples + cfg.warmup_discard,
        cfg.warmup_discard,
        profile.timeout_ms,
        observer=log.record,
        label="post-final",
    )

    def delta(original: MetricStats, final: MetricStats) -> float:
        if original.mean == 0:
            return 0.0
        return 100.0 * (original.mean - final.mean) / original.mean

    patch = emit_patch(pristine_dir, work_dir)
    patch.kept_ids = kept_ids
    lines_total = sum(
        len((pristine_dir / name).read_text(encoding="utf-8").splitlines())
        for name in script_files
    )

    config_echo = {
        "operators": [op.value for op in cfg.operators],
        "max_iterations": cfg.max_iterations,
        "oracle_samples": cfg.oracle_samples,
        "warmup_discard": cfg.warmup_discard,
        "threshold_multiplier": cfg.threshold_multiplier,
        "threshold_floor": cfg.threshold_floor,
        "post_samples": cfg.post_samples,
        "timeout_mult": cfg.timeout_mult,
        "fuzz": cfg.fuzz,
        "file_order": cfg.file_order,
    }
    report = OptimizationReport(
        oracle=profile,
        original=original_summary,
        final=final_summary,
        deltas_pct={
            "time": delta(original_summary.load_time_ms, final_summary.load_time_ms),
            "events": delta(original_summary.event_count, final_summary.event_count),
            "depth": delta(original_summary.max_depth, final_summary.max_depth),
        },
        attempts=attempts,
        kept=kept,
        reverted=reverted,
        inapplicable=inapplicable,
        neutral_rate_pct=_rate(
            op_kept.get(Operator.DELETE.value, 0),
            op_attempts.get(Operator.DELETE.value, 0)
            - op_inapplicable.get(Operator.DELETE.value, 0),
        ),
        neutral_rate_by_operator={
            op: _rate(op_kept[op], op_attempts[op] - op_inapplicable[op])
            for op in sorted(op_attempts)
        },
        lines_deleted=_count_deleted_lines(patch),
        lines_total=lines_total,
        per_iteration_wall_clock_s=wall_clock_s,
        kept_candidates=kept_candidates,
        final_verified=verify_verdict.passed,
        config=config_echo,
    )

    (run_dir / "patch.diff").write_text(patch.text, encoding="utf-8")
    (run_dir / "report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    log.write_csv()
    return report, patch
