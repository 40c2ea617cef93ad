"""Evaluate one app state: load the page, capture trace + screenshot + sentinel.

Two backends share this contract: the deterministic sim runtime (no browser
required) and the live remote-debugging adapter. A harness instance runs one
evaluation at a time.
"""

from __future__ import annotations

import enum
import json
import re
import statistics
from dataclasses import dataclass
from pathlib import Path

from . import simrt
from .correctness import Screenshot
from .errors import OracleNeverLoads
from .jsparse import parse_source
from .trace import LoadMetrics, TraceEvent, build_call_tree, compute_metrics

MANIFEST_NAME = "app.json"
TIMEOUT_FLOOR_MS = 1000.0
DEFAULT_BOOTSTRAP_TIMEOUT_MS = 30_000.0

_SCRIPT_SRC_RE = re.compile(r"<script[^>]*\bsrc=[\"']([^\"']+)[\"']", re.IGNORECASE)


class Role(enum.Enum):
    PAGE = "page"
    SCRIPT = "script"


@dataclass(frozen=True, slots=True)
class ManifestEntry:
    file_name: str
    role: Role


@dataclass(frozen=True, slots=True)
class AppState:
    root_dir: Path
    manifest: tuple[ManifestEntry, ...]
    sentinel_text: str

    @classmethod
    def load(cls, root_dir: Path | str) -> "AppState":
        """Read the app manifest (app.json) and validate the file list."""
        root_dir = Path(root_dir)
        manifest_path = root_dir / MANIFEST_NAME
        if not manifest_path.is_file():
            raise FileNotFoundError(f"no {MANIFEST_NAME} under {root_dir}")
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
        page = raw.get("page")
        scripts = raw.get("scripts", [])
        sentinel = raw.get("sentinelText", "")
        if not isinstance(page, str) or not page:
            raise ValueError("manifest must name exactly one page")
        if not isinstance(sentinel, str) or not sentinel:
            raise ValueError("manifest must declare sentinelText")
        entries = [ManifestEntry(file_name=page, role=Role.PAGE)]
        for script in scripts:
            entries.append(ManifestEntry(file_name=script, role=Role.SCRIPT))
        state = cls(root_dir=root_dir, manifest=tuple(entries), sentinel_text=sentinel)
        state.validate()
        return state

    def validate(self):
        pages = [e for e in self.manifest if e.role is Role.PAGE]
        if len(pages) != 1:
            raise ValueError(f"manifest must contain exactly one page, got {len(pages)}")
        for entry in self.manifest:
            if not (self.root_dir / entry.file_name).is_file():
                raise FileNotFoundError(
                    f"manifest file {entry.file_name} missing under {self.root_dir}"
                )

    @property
    def page(self) -> str:
        return next(e.file_name for e in self.manifest if e.role is Role.PAGE)

    def script_files(self) -> list[str]:
        return [e.file_name for e in self.manifest if e.role is Role.SCRIPT]


@dataclass(frozen=True, slots=True)
class HarnessResult:
    events: list[TraceEvent]
    screenshot: Screenshot
    loaded: bool
    timed_out: bool
    wall_clock_ms: float

    def metrics(self) -> LoadMetrics:
        return compute_metrics(build_call_tree(self.events))


@dataclass(frozen=True, slots=True)
class OracleProfile:
    metrics: LoadMetrics
    screenshot: Screenshot
    threshold: int
    timeout_ms: float


def page_script_order(app: AppState) -> list[str]:
    """Script execution order: the page's script tags, restricted to manifest files."""
    page_text = (app.root_dir / app.page).read_text(encoding="utf-8")
    manifest_scripts = set(app.script_files())
    ordered = []
    for src in _SCRIPT_SRC_RE.findall(page_text):
        name = src.split("?", 1)[0].lstrip("./")
        if name not in manifest_scripts:
            raise ValueError(f"page references unknown script {src!r}")
        ordered.append(name)
    return ordered


class SimHarness:
    """Deterministic evaluation backend running the sim runtime."""

    def __init__(self, step_budget: int = simrt.DEFAULT_STEP_BUDGET):
        self.step_budget = step_budget

    def evaluate(self, app: AppState, timeout_ms: float) -> HarnessResult:
        if timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        scripts = []
        for file_name in page_script_order(app):
            text = (app.root_dir / file_name).read_text(encoding="utf-8")
            scripts.append((file_name, parse_source(text)))
        result = simrt.execute_scripts(
            scripts,
            sentinel_text=app.sentinel_text,
            timeout_ms=timeout_ms,
            step_budget=self.step_budget,
        )
        screenshot = Screenshot(
            width=simrt.FRAMEBUFFER_SIZE,
            height=simrt.FRAMEBUFFER_SIZE,
            pixels=result.framebuffer,
        )
        return HarnessResult(
            events=result.events,
            screenshot=screenshot,
            loaded=result.loaded,
            timed_out=result.timed_out,
            wall_clock_ms=result.wall_clock_ms,
        )


def warmup_oracle(
    harness,
    app: AppState,
    samples: int,
    discard: int,
    multiplier: float,
    floor: int,
    timeout_mult: float = 2.0,
    bootstrap_timeout_ms: float = DEFAULT_BOOTSTRAP_TIMEOUT_MS,
    observer=None,
) -> OracleProfile:
    """Profile the unmodified app: warmed-up median metrics plus a threshold.

    Runs ``samples`` evaluations, discards the first ``discard`` (repeated
    tracing runs start slow), takes per-metric medians, then captures two
    more screenshots to calibrate the pixel threshold. The evaluation
    timeout becomes ``timeout_mult`` x the median load time, floored at one
    second. Raises OracleNeverLoads when no sample shows the sentinel.

    ``observer(result, label)`` is called for every evaluation; the search
    loop uses it to log metrics rows.
    """
    from .correctness import calibrate_threshold  # local import avoids a cycle

    if not samples > discard >= 0:
        raise ValueError("need samples > discard >= 0")
    results = []
    for index in range(samples):
        result = harness.evaluate(app, bootstrap_timeout_ms)
        if observer:
            observer(result, "warmup")
        results.append(result)
    if not any(r.loaded for r in results):
        raise OracleNeverLoads(
            f"sentinel {app.sentinel_text!r} never appeared in {samples} samples"
        )
    kept = results[discard:]
    per_metric = [r.metrics() for r in kept]
    metrics = LoadMetrics(
        load_time_ms=statistics.median(m.load_time_ms for m in per_metric),
        event_count=statistics.median_low(m.event_count for m in per_metric),
        max_depth=statistics.median_low(m.max_depth for m in per_metric),
    )
    first_shot = harness.evaluate(app, bootstrap_timeout_ms)
    second_shot = harness.evaluate(app, bootstrap_timeout_ms)
    if observer:
        observer(first_shot, "calibration")
        observer(second_shot, "calibration")
    threshold = calibrate_threshold(
        first_shot.screenshot, second_shot.screenshot, multiplier, floor
    )
    timeout_ms = max(timeout_mult * metrics.load_time_ms, TIMEOUT_FLOOR_MS)
    return OracleProfile(
        metrics=metrics,
        screenshot=second_shot.screenshot,
        threshold=threshold,
        timeout_ms=timeout_ms,
    )
