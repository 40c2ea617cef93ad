"""Trace-guided mutate-and-test optimizer for web page load time.

Parses page-load traces into call trees, targets source statements whose
method names appear in the trace, deletes them (or rewrites higher-order
loops), and keeps each change only while the page still loads visually
identical to the oracle screenshot.
"""

from .correctness import CorrectnessVerdict, Screenshot, calibrate_threshold, judge, pixel_diff
from .errors import (
    DimensionMismatch,
    HarnessUnavailable,
    LocusNotFound,
    OracleNeverLoads,
    OverlapViolation,
    ReparseFailure,
    ScriptSyntaxError,
    SpanDrift,
    TracetrimError,
    UnbalancedEvents,
    UnparseableDocument,
)
from .harness import AppState, HarnessResult, OracleProfile, SimHarness, warmup_oracle
from .operators import (
    MutationCandidate,
    MutatedSource,
    Operator,
    apply_deletion,
    apply_loop_rewrite,
    enumerate_deletions,
    enumerate_loop_sites,
    rewrite_all_sites,
)
from .search import (
    MetricsSummary,
    OptimizationReport,
    Patch,
    SearchConfig,
    emit_patch,
    optimize,
    sample_performance,
)
from .trace import (
    CallSiteTarget,
    CallTree,
    LoadMetrics,
    TraceEvent,
    build_call_tree,
    compute_metrics,
    extract_targets,
    parse_trace,
    tree_to_events,
)

__version__ = "0.1.0"

__all__ = [
    "AppState",
    "CallSiteTarget",
    "CallTree",
    "CorrectnessVerdict",
    "DimensionMismatch",
    "HarnessResult",
    "HarnessUnavailable",
    "LoadMetrics",
    "LocusNotFound",
    "MetricsSummary",
    "MutatedSource",
    "MutationCandidate",
    "Operator",
    "OptimizationReport",
    "OracleNeverLoads",
    "OracleProfile",
    "OverlapViolation",
    "Patch",
    "ReparseFailure",
    "Screenshot",
    "ScriptSyntaxError",
    "SearchConfig",
    "SimHarness",
    "SpanDrift",
    "TraceEvent",
    "TracetrimError",
    "UnbalancedEvents",
    "UnparseableDocument",
    "apply_deletion",
    "apply_loop_rewrite",
    "build_call_tree",
    "calibrate_threshold",
    "compute_metrics",
    "emit_patch",
    "enumerate_deletions",
    "enumerate_loop_sites",
    "extract_targets",
    "judge",
    "optimize",
    "parse_trace",
    "pixel_diff",
    "rewrite_all_sites",
    "sample_performance",
    "tree_to_events",
    "warmup_oracle",
]
