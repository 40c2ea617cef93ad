"""Independent brute-force oracles and generators shared by the test suite.

Everything here deliberately avoids the library's own tree-building code so
the checks stay independent of the paths they verify.
"""

from __future__ import annotations

import random

from tracetrim.trace import Phase, TraceEvent

Interval = tuple[int, int]


def brute_force_depth(intervals: list[Interval]) -> int:
    """Max nesting depth by counting proper containers, O(n^2).

    Assumes a laminar family (no partial overlap, no exact duplicates):
    an interval's depth is one plus the number of intervals that properly
    contain it.
    """
    deepest = 0
    for i, (start, end) in enumerate(intervals):
        containers = 0
        for j, (other_start, other_end) in enumerate(intervals):
            if j == i:
                continue
            if other_start <= start and other_end >= end and (
                other_start < start or other_end > end
            ):
                containers += 1
        deepest = max(deepest, containers + 1)
    return deepest


def brute_force_load_ms(intervals: list[Interval]) -> float:
    if not intervals:
        return 0.0
    return (max(e for _, e in intervals) - min(s for s, _ in intervals)) / 1000.0


def fill_laminar(
    rng: random.Random,
    lo: int,
    hi: int,
    depth_left: int,
    out: list[Interval],
) -> None:
    """Generate a random laminar interval family inside [lo, hi).

    Children may share their parent's start (exercising the equal-start tie
    rule) but never duplicate its full extent; siblings are disjoint and may
    touch.
    """
    cursor = lo
    while cursor < hi:
        if rng.random() > 0.72:
            break
        gap = rng.randint(0, 3)
        cursor = min(cursor + gap, hi)
        cap = (hi - cursor) if cursor > lo else (hi - lo - 1)
        if cap < 1:
            break
        length = rng.randint(1, cap)
        out.append((cursor, cursor + length))
        if depth_left > 0 and length > 1 and rng.random() < 0.65:
            fill_laminar(rng, cursor, cursor + length, depth_left - 1, out)
        cursor += length


def random_laminar_events(
    rng: random.Random,
    threads: int = 1,
    span: int = 2000,
) -> tuple[list[TraceEvent], list[Interval]]:
    """Random Complete events forming laminar families, one per thread."""
    events: list[TraceEvent] = []
    intervals: list[Interval] = []
    for tid in range(1, threads + 1):
        thread_intervals: list[Interval] = []
        fill_laminar(rng, 0, span, depth_left=6, out=thread_intervals)
        for index, (start, end) in enumerate(thread_intervals):
            events.append(
                TraceEvent(
                    name=f"ev_{tid}_{index}",
                    category="synthetic",
                    phase=Phase.COMPLETE,
                    timestamp_us=start,
                    duration_us=end - start,
                    pid=1,
                    tid=tid,
                )
            )
        intervals.extend(thread_intervals)
    return events, intervals


def brute_force_depth_multi(events: list[TraceEvent]) -> int:
    """Depth across threads: the max of each thread's brute-force depth."""
    per_thread: dict[tuple[int, int], list[Interval]] = {}
    for event in events:
        per_thread.setdefault((event.pid, event.tid), []).append(
            (event.timestamp_us, event.end_us)
        )
    if not per_thread:
        return 0
    return max(brute_force_depth(iv) for iv in per_thread.values())


# --- unified diff applier (independent of difflib's generator) -----------------


def apply_unified_patch(patch_text: str, sources: dict[str, str]) -> dict[str, str]:
    """Apply a unified diff to in-memory files by exact line matching.

    Supports the subset our patches use: ``a/``-``b/`` prefixed headers and
    plain context hunks. Raises AssertionError on any mismatch, which is the
    point: the round trip must be exact.
    """
    import re

    result = dict(sources)
    lines = patch_text.splitlines(keepends=True)
    i = 0
    name = None
    src_lines: list[str] = []
    out_lines: list[str] = []
    src_pos = 0

    def finalize():
        nonlocal name
        if name is not None:
            out_lines.extend(src_lines[src_pos:])
            result[name] = "".join(out_lines)
            name = None

    while i < len(lines):
        line = lines[i]
        if line.startswith("--- "):
            finalize()
            from_name = line[4:].split("\t")[0].strip()
            assert lines[i + 1].startswith("+++ "), "malformed file header"
            name = from_name[2:] if from_name.startswith("a/") else from_name
            src_lines = result[name].splitlines(keepends=True)
            out_lines = []
            src_pos = 0
            i += 2
        elif line.startswith("@@"):
            match = re.match(r"@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@", line)
            assert match, f"malformed hunk header {line!r}"
            old_start = int(match.group(1))
            old_len = int(match.group(2)) if match.group(2) is not None else 1
            new_len = int(match.group(4)) if match.group(4) is not None else 1
            target = old_start - 1 if old_len > 0 else old_start
            assert target >= src_pos, "overlapping hunks"
            out_lines.extend(src_lines[src_pos:target])
            src_pos = target
            i += 1
            old_left, new_left = old_len, new_len
            while old_left > 0 or new_left > 0:
                hunk_line = lines[i]
                if hunk_line.startswith(" "):
                    assert src_lines[src_pos] == hunk_line[1:], "context mismatch"
                    out_lines.append(src_lines[src_pos])
                    src_pos += 1
                    old_left -= 1
                    new_left -= 1
                elif hunk_line.startswith("-"):
                    assert src_lines[src_pos] == hunk_line[1:], "deletion mismatch"
                    src_pos += 1
                    old_left -= 1
                elif hunk_line.startswith("+"):
                    out_lines.append(hunk_line[1:])
                    new_left -= 1
                else:
                    assert hunk_line.startswith("\\"), f"unexpected line {hunk_line!r}"
                i += 1
        else:
            i += 1
    finalize()
    return result
