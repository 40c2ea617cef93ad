"""Page-load trace parsing, call-tree construction, and load metrics.

Traces arrive in Trace Event Format (either a bare JSON array of events or
an object with a ``traceEvents`` array). Events nest by interval containment
per thread, which gives the call tree the three load measures are read from:
elapsed time between first and last event, total event count, and the
deepest nesting level.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterator

from .errors import OverlapViolation, UnbalancedEvents, UnparseableDocument


class Phase(enum.Enum):
    BEGIN = "B"
    END = "E"
    COMPLETE = "X"


@dataclass(frozen=True, slots=True)
class TraceEvent:
    name: str
    category: str
    phase: Phase
    timestamp_us: int
    duration_us: int | None  # Complete events only; Begin/End carry none
    pid: int
    tid: int
    source_url: str | None = None

    @property
    def end_us(self) -> int:
        return self.timestamp_us + (self.duration_us or 0)


@dataclass(frozen=True, slots=True)
class LoadMetrics:
    load_time_ms: float
    event_count: int
    max_depth: int


@dataclass(frozen=True, slots=True)
class CallSiteTarget:
    method_name: str
    file_name: str


@dataclass(slots=True)
class CallNode:
    event: TraceEvent
    children: list["CallNode"] = field(default_factory=list)


@dataclass(slots=True)
class CallTree:
    roots: list[CallNode]

    def walk(self) -> Iterator[tuple[CallNode, int]]:
        """Yield (node, depth) in depth-first pre-order; roots have depth 1."""
        stack = [(node, 1) for node in reversed(self.roots)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            for child in reversed(node.children):
                stack.append((child, depth + 1))


@dataclass(slots=True)
class ParsedTrace:
    """Events that survived parsing plus counts of what was skipped."""
    events: list[TraceEvent]
    skipped: int
    skipped_reasons: dict[str, int]


def _extract_source_url(obj: dict) -> str | None:
    args = obj.get("args")
    if not isinstance(args, dict):
        return None
    url = args.get("url")
    if isinstance(url, str) and url:
        return url
    data = args.get("data")
    if isinstance(data, dict):
        for key in ("url", "fileName", "scriptName"):
            value = data.get(key)
            if isinstance(value, str) and value:
                return value
    return None


def _event_from_obj(obj: object) -> TraceEvent | str:
    """Build one event from a raw JSON object, or return a skip reason."""
    if not isinstance(obj, dict):
        return "not-an-object"
    ph = obj.get("ph")
    if not isinstance(ph, str):
        return "missing-phase"
    if ph not in ("B", "E", "X"):
        return "unknown-phase"
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        return "missing-name"
    try:
        ts = int(round(float(obj["ts"])))
        pid = int(obj["pid"])
        tid = int(obj["tid"])
    except (KeyError, TypeError, ValueError):
        return "bad-fields"
    category = obj.get("cat", "")
    if not isinstance(category, str):
        return "bad-fields"
    duration: int | None = None
    if ph == "X":
        try:
            duration = int(round(float(obj.get("dur", 0))))
        except (TypeError, ValueError):
            return "bad-fields"
        if duration < 0:
            return "negative-duration"
    elif "dur" in obj:
        return "duration-on-begin-end"
    return TraceEvent(
        name=name,
        category=category,
        phase=Phase(ph),
        timestamp_us=ts,
        duration_us=duration,
        pid=pid,
        tid=tid,
        source_url=_extract_source_url(obj),
    )


def parse_trace(data: bytes | str, strict: bool = True) -> ParsedTrace:
    """Parse a Trace Event Format document into validated, ts-sorted events.

    Malformed individual events are skipped and counted rather than failing
    the document. Begin/End pairing is validated per (pid, tid) in LIFO
    order: an End with no matching Begin raises UnbalancedEvents when
    ``strict`` (the default) and is dropped otherwise; Begins left open at
    the end of the document are dropped and counted (truncated captures are
    common when an evaluation times out).
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnparseableDocument(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise UnparseableDocument(f"not JSON: {exc}") from exc
    if isinstance(doc, dict) and isinstance(doc.get("traceEvents"), list):
        raw_events = doc["traceEvents"]
    elif isinstance(doc, list):
        raw_events = doc
    else:
        raise UnparseableDocument("document has no event array")

    reasons: dict[str, int] = {}
    events: list[TraceEvent] = []
    for obj in raw_events:
        result = _event_from_obj(obj)
        if isinstance(result, str):
            reasons[result] = reasons.get(result, 0) + 1
        else:
            events.append(result)
    events.sort(key=lambda e: e.timestamp_us)

    # Pairing pass over the sorted stream.
    dropped: set[int] = set()
    stacks: dict[tuple[int, int], list[int]] = {}
    for index, event in enumerate(events):
        if event.phase is Phase.COMPLETE:
            continue
        stack = stacks.setdefault((event.pid, event.tid), [])
        if event.phase is Phase.BEGIN:
            stack.append(index)
        else:
            if not stack or events[stack[-1]].name != event.name:
                if strict:
                    raise UnbalancedEvents(
                        f"End event {event.name!r} at ts={event.timestamp_us} "
                        f"has no matching Begin on thread "
                        f"({event.pid}, {event.tid})"
                    )
                dropped.add(index)
                reasons["unpaired-end"] = reasons.get("unpaired-end", 0) + 1
            else:
                stack.pop()
    for stack in stacks.values():
        for index in stack:
            dropped.add(index)
            reasons["unpaired-begin"] = reasons.get("unpaired-begin", 0) + 1
    if dropped:
        events = [e for i, e in enumerate(events) if i not in dropped]

    return ParsedTrace(
        events=events,
        skipped=sum(reasons.values()),
        skipped_reasons=reasons,
    )


def _as_complete(event: TraceEvent, duration_us: int) -> TraceEvent:
    return TraceEvent(
        name=event.name,
        category=event.category,
        phase=Phase.COMPLETE,
        timestamp_us=event.timestamp_us,
        duration_us=duration_us,
        pid=event.pid,
        tid=event.tid,
        source_url=event.source_url,
    )


def build_call_tree(events: list[TraceEvent]) -> CallTree:
    """Nest events into a call tree by interval containment per thread.

    Begin/End pairs are merged into Complete intervals via a LIFO stack;
    Complete events nest by containment. Events sharing a start timestamp
    nest under the longer-duration one. Partial overlap on a single thread
    raises OverlapViolation.
    """
    ordered = sorted(events, key=lambda e: e.timestamp_us)
    by_thread: dict[tuple[int, int], list[TraceEvent]] = {}
    for event in ordered:
        by_thread.setdefault((event.pid, event.tid), []).append(event)

    all_roots: list[CallNode] = []
    for key in sorted(by_thread):
        thread_events = by_thread[key]
        intervals: list[TraceEvent] = []
        open_begins: list[TraceEvent] = []
        for event in thread_events:
            if event.phase is Phase.BEGIN:
                open_begins.append(event)
            elif event.phase is Phase.END:
                if not open_begins or open_begins[-1].name != event.name:
                    raise UnbalancedEvents(
                        f"End event {event.name!r} does not close the open "
                        f"Begin on thread {key}"
                    )
                begin = open_begins.pop()
                intervals.append(
                    _as_complete(begin, event.timestamp_us - begin.timestamp_us)
                )
            else:
                if event.duration_us is None:
                    event = _as_complete(event, 0)
                intervals.append(event)
        if open_begins:
            raise UnbalancedEvents(
                f"{len(open_begins)} Begin event(s) never closed on thread {key}"
            )

        # Parents sort before children: earlier start first, longer first on ties.
        intervals.sort(key=lambda e: (e.timestamp_us, -(e.duration_us or 0)))
        stack: list[CallNode] = []
        for event in intervals:
            node = CallNode(event=event)
            while stack and stack[-1].event.end_us <= event.timestamp_us:
                stack.pop()
            if stack:
                top = stack[-1]
                if event.end_us > top.event.end_us:
                    raise OverlapViolation(
                        f"{event.name!r} [{event.timestamp_us}, {event.end_us}) "
                        f"partially overlaps {top.event.name!r} "
                        f"[{top.event.timestamp_us}, {top.event.end_us}) "
                        f"on thread {key}"
                    )
                top.children.append(node)
            else:
                all_roots.append(node)
            stack.append(node)

    all_roots.sort(key=lambda n: (n.event.timestamp_us, n.event.pid, n.event.tid))
    return CallTree(roots=all_roots)


def tree_to_events(tree: CallTree) -> list[TraceEvent]:
    """Flatten a call tree back to Complete events (depth-first pre-order)."""
    return [node.event for node, _ in tree.walk()]


def compute_metrics(tree: CallTree, categories: set[str] | None = None) -> LoadMetrics:
    """Compute load time, event count, and max nesting depth for a tree.

    ``categories``, when given, restricts which events count toward
    ``event_count``; load time and depth always consider every event. The
    default counts everything.
    """
    min_ts: int | None = None
    max_end = 0
    count = 0
    deepest = 0
    for node, depth in tree.walk():
        event = node.event
        if min_ts is None or event.timestamp_us < min_ts:
            min_ts = event.timestamp_us
        if event.end_us > max_end:
            max_end = event.end_us
        if categories is None or event.category in categories:
            count += 1
        if depth > deepest:
            deepest = depth
    if min_ts is None:
        return LoadMetrics(load_time_ms=0.0, event_count=0, max_depth=0)
    return LoadMetrics(
        load_time_ms=(max_end - min_ts) / 1000.0,
        event_count=count,
        max_depth=deepest,
    )


def match_manifest(source_url: str | None, manifest: list[str]) -> str | None:
    """Map an event's source URL onto a manifest file name, if any.

    Accepts exact file names as well as full URLs whose path ends in the
    manifest entry (query strings and fragments are ignored).
    """
    if not source_url:
        return None
    if source_url in manifest:
        return source_url
    path = source_url.split("?", 1)[0].split("#", 1)[0]
    if "://" in path:
        rest = path.split("://", 1)[1]
        path = rest.split("/", 1)[1] if "/" in rest else ""
    path = path.lstrip("/")
    for entry in sorted(manifest):
        if path == entry or path.endswith("/" + entry):
            return entry
    return None


def extract_targets(tree: CallTree, manifest: list[str]) -> list[CallSiteTarget]:
    """List the distinct (method name, file) pairs seen in the trace.

    Only events whose source URL maps to a manifest file qualify; the result
    is ordered by file name then method name and is duplicate-free.
    """
    if not manifest:
        raise ValueError("manifest must be nonempty")
    pairs: set[tuple[str, str]] = set()
    for node, _ in tree.walk():
        event = node.event
        if not event.name:
            continue
        file_name = match_manifest(event.source_url, manifest)
        if file_name is not None:
            pairs.add((file_name, event.name))
    return [
        CallSiteTarget(method_name=name, file_name=file_name)
        for file_name, name in sorted(pairs)
    ]


def events_to_tef(events: list[TraceEvent]) -> dict:
    """Serialize events to a Trace Event Format document (object form)."""
    out = []
    for event in events:
        obj: dict = {
            "name": event.name,
            "cat": event.category,
            "ph": event.phase.value,
            "ts": event.timestamp_us,
            "pid": event.pid,
            "tid": event.tid,
        }
        if event.phase is Phase.COMPLETE:
            obj["dur"] = event.duration_us or 0
        if event.source_url is not None:
            obj["args"] = {"url": event.source_url}
        out.append(obj)
    return {"traceEvents": out}


def trace_to_json_bytes(events: list[TraceEvent]) -> bytes:
    """Deterministic JSON bytes for persisting a trace to disk."""
    doc = events_to_tef(events)
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
