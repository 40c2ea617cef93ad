from __future__ import annotations

import json
from pathlib import Path

import pytest

from tracetrim.errors import OracleNeverLoads
from tracetrim.harness import (
    AppState,
    SimHarness,
    page_script_order,
    warmup_oracle,
)
from tracetrim.jsparse import parse_source
from tracetrim.simrt import FRAMEBUFFER_SIZE, execute_scripts
from tracetrim.trace import build_call_tree, compute_metrics

BLANK_FRAME = b"\xff\xff\xff\xff" * (FRAMEBUFFER_SIZE * FRAMEBUFFER_SIZE)
SENTINEL = "app ready"


def run(source: str, timeout_ms: float = 5000.0, **kwargs):
    return execute_scripts(
        [("main.js", parse_source(source))], SENTINEL, timeout_ms, **kwargs
    )


def write_app(root: Path, scripts: dict[str, str], sentinel: str = SENTINEL) -> AppState:
    root.mkdir(parents=True, exist_ok=True)
    names = list(scripts)
    tags = "\n".join(f'<script src="{name}"></script>' for name in names)
    (root / "index.html").write_text(
        f"<!doctype html>\n<html>\n<body>\n<p>bench page</p>\n{tags}\n</body>\n</html>\n"
    )
    for name, text in scripts.items():
        (root / name).write_text(text)
    (root / "app.json").write_text(
        json.dumps({"page": "index.html", "scripts": names, "sentinelText": sentinel})
    )
    return AppState.load(root)


# --- core runtime behavior ------------------------------------------------------


def test_mark_loaded_alone_yields_loaded_blank_page():
    result = run("markLoaded();")
    assert result.loaded
    assert not result.timed_out and not result.crashed
    assert result.framebuffer == BLANK_FRAME
    assert [e.name for e in result.events] == ["markLoaded"]


def test_infinite_loop_times_out_and_never_loads():
    result = run("markLoaded();\nfor (let i = 0; true; i++) {}\n", timeout_ms=50.0)
    assert result.timed_out
    assert not result.loaded  # timeout forces loaded=False
    assert result.wall_clock_ms == pytest.approx(50.0, abs=0.01)


def test_step_budget_flags_timeout():
    result = run("for (let i = 0; i < 100000; i++) {}", step_budget=500)
    assert result.timed_out


def test_two_runs_are_byte_identical():
    source = (
        "function f(n) { paint(n, n, 1, 2, 3); return n + 1; }\n"
        "let total = 0;\n"
        "for (let i = 0; i < 5; i++) { total = total + f(i); }\n"
        "writeText('t', 'total ' + total);\n"
        "markLoaded();\n"
    )
    a = run(source)
    b = run(source)
    assert a.events == b.events
    assert a.framebuffer == b.framebuffer
    assert a.document == b.document
    assert (a.loaded, a.timed_out, a.wall_clock_ms, a.steps) == (
        b.loaded,
        b.timed_out,
        b.wall_clock_ms,
        b.steps,
    )


# --- cost model -------------------------------------------------------------------


def test_invocation_cost_is_base_plus_statements():
    result = run("function f() { let a = 1; let b = 2; }\nf();")
    (event,) = result.events
    assert event.name == "f"
    assert event.timestamp_us == 2  # two top-level statement ticks first
    assert event.duration_us == 12  # 10 base + 2 body statements


def test_nested_call_durations_accumulate():
    result = run(
        "function inner() { let x = 1; }\n"
        "function outer() { inner(); }\n"
        "outer();"
    )
    by_name = {e.name: e for e in result.events}
    inner, outer = by_name["inner"], by_name["outer"]
    assert inner.duration_us == 11  # 10 + 1 statement
    assert outer.duration_us == 10 + 1 + inner.duration_us
    # child interval nests inside the parent
    assert outer.timestamp_us < inner.timestamp_us
    assert inner.timestamp_us + inner.duration_us <= outer.timestamp_us + outer.duration_us


def test_builtin_calls_emit_unattributed_events():
    result = run("function go() { log(1); }\ngo();")
    by_name = {e.name: e for e in result.events}
    assert by_name["go"].source_url == "main.js"
    assert by_name["go"].category == "script"
    assert by_name["log"].source_url is None
    assert by_name["log"].category == "builtin"


def test_source_attribution_is_definition_site():
    scripts = [
        ("lib.js", parse_source("function helper() { return 1; }")),
        ("main.js", parse_source("helper();\nmarkLoaded();")),
    ]
    result = execute_scripts(scripts, SENTINEL, 5000.0)
    helper = next(e for e in result.events if e.name == "helper")
    assert helper.source_url == "lib.js"


def test_defer_runs_fifo_as_new_roots():
    result = run(
        "function taskA() { paint(1, 1, 0, 0, 0); }\n"
        "function taskB() { paint(2, 2, 0, 0, 0); }\n"
        "function boot() { defer(taskA); defer(taskB); }\n"
        "boot();\nmarkLoaded();\n"
    )
    tree = build_call_tree(result.events)
    root_names = [r.event.name for r in tree.roots]
    assert root_names == ["boot", "markLoaded", "taskA", "taskB"]
    # depth resets for deferred tasks: taskA's paint is depth 2, not nested under boot
    metrics = compute_metrics(tree)
    assert metrics.max_depth == 2


def test_crash_after_mark_loaded_still_reports_not_loaded():
    result = run("markLoaded();\nmissingFunction();\n")
    assert result.crashed
    assert not result.loaded
    assert "missingFunction" in result.crash_message


def test_undefined_variable_read_crashes():
    result = run("let x = nope + 1;")
    assert result.crashed


def test_script_order_matters_for_top_level_calls():
    # Calling a later file's function at top level crashes, like real script tags.
    scripts = [
        ("main.js", parse_source("helper();")),
        ("lib.js", parse_source("function helper() {}")),
    ]
    result = execute_scripts(scripts, SENTINEL, 5000.0)
    assert result.crashed


def test_deferred_tasks_see_all_files():
    scripts = [
        ("main.js", parse_source("defer(finish);")),
        ("lib.js", parse_source("function finish() { markLoaded(); }")),
    ]
    result = execute_scripts(scripts, SENTINEL, 5000.0)
    assert result.crashed  # defer argument resolves eagerly; finish not yet defined

    scripts = [
        ("main.js", parse_source("function kick() { finish(); }\ndefer(kick);")),
        ("lib.js", parse_source("function finish() { markLoaded(); }")),
    ]
    result = execute_scripts(scripts, SENTINEL, 5000.0)
    assert result.loaded


# --- language semantics -------------------------------------------------------------


def test_array_operations():
    result = run(
        "let xs = [1, 2, 3];\n"
        "xs.push(4);\n"
        "let ys = xs.map(x => x * 2);\n"
        "let seen = '';\n"
        "ys.forEach(function (v, i) { seen = seen + v + ':' + i + ' '; });\n"
        "writeText('out', seen + xs.length + ' ' + ys[0] + ' ' + xs[9]);\n"
        "markLoaded();\n"
    )
    assert not result.crashed
    assert "2:0 4:1 6:2 8:3 " in result.document
    assert "4 2 undefined" in result.document


def test_string_semantics():
    result = run(
        "let s = 'ab' + 1 + true;\n"
        "writeText('s', s + ' ' + s.length + ' ' + s[0]);\n"
        "markLoaded();\n"
    )
    assert "ab1true 7 a" in result.document


def test_js_style_remainder_and_division():
    result = run(
        "writeText('m', (0 - 7) % 3 + ' ' + 7 % 3 + ' ' + 7 / 2);\nmarkLoaded();\n"
    )
    assert "-1 1 3.5" in result.document
    assert run("let x = 1 / 0;").crashed


def test_equality_and_logic():
    result = run(
        "let checks = '';\n"
        "checks = checks + (1 == true) + (0 == false) + ('1' == 1) + (2 != 2);\n"
        "checks = checks + (false || 'fb') + (0 && 'skip');\n"
        "writeText('c', checks);\nmarkLoaded();\n"
    )
    assert "truetruefalsefalse" in result.document
    assert "fb0" in result.document


def test_function_name_inference_for_traces():
    result = run("let dbl = x => x * 2;\ndbl(4);\n")
    assert [e.name for e in result.events] == ["dbl"]
    result = run("[1, 2].forEach(function (v) { log(v); });")
    names = [e.name for e in result.events]
    assert names.count("(anonymous)") == 2
    assert names.count("log") == 2
    assert names.count("forEach") == 1


def test_closures_capture_environment():
    result = run(
        "function counter() {\n"
        "  let n = 0;\n"
        "  return function () { n = n + 1; return n; };\n"
        "}\n"
        "let tick = counter();\n"
        "tick();\n"
        "let v = tick();\n"
        "writeText('v', 'v=' + v);\nmarkLoaded();\n"
    )
    assert "v=2" in result.document


def test_paint_sets_pixels_and_clips():
    result = run("paint(0, 0, 10, 20, 30);\npaint(500, 500, 1, 1, 1);\nmarkLoaded();")
    assert result.framebuffer[0:4] == bytes([10, 20, 30, 255])
    assert result.framebuffer != BLANK_FRAME
    blank_after_first_pixel = result.framebuffer[4:]
    assert blank_after_first_pixel == BLANK_FRAME[4:]  # out-of-range paint ignored


def test_write_text_renders_deterministic_glyphs():
    a = run("writeText('title', 'Hello');\nmarkLoaded();")
    b = run("writeText('title', 'Hello');\nmarkLoaded();")
    c = run("writeText('title', 'Hellp');\nmarkLoaded();")
    assert a.framebuffer == b.framebuffer
    assert a.framebuffer != c.framebuffer
    assert a.framebuffer != BLANK_FRAME
    assert "Hello" in a.document


def test_sentinel_via_write_text_counts_as_loaded():
    result = run(f"writeText('x', '{SENTINEL}');")
    assert result.loaded


# --- harness wrapper ------------------------------------------------------------------


def test_sim_harness_evaluates_app(tmp_path):
    app = write_app(
        tmp_path,
        {
            "main.js": "function render() { paint(3, 3, 9, 9, 9); }\nrender();\nmarkLoaded();\n"
        },
    )
    harness = SimHarness()
    result = harness.evaluate(app, timeout_ms=5000.0)
    assert result.loaded
    metrics = result.metrics()
    assert metrics.event_count == 3
    assert metrics.max_depth == 2


def test_page_script_order_follows_script_tags(tmp_path):
    app = write_app(tmp_path, {"a.js": "log(1);", "b.js": "log(2);"})
    assert page_script_order(app) == ["a.js", "b.js"]


def test_page_referencing_unknown_script_rejected(tmp_path):
    write_app(tmp_path, {"a.js": "log(1);"})
    (tmp_path / "index.html").write_text('<script src="ghost.js"></script>')
    app = AppState.load(tmp_path)
    with pytest.raises(ValueError):
        page_script_order(app)


def test_manifest_validation(tmp_path):
    with pytest.raises(FileNotFoundError):
        AppState.load(tmp_path)
    (tmp_path / "app.json").write_text(
        json.dumps({"page": "index.html", "scripts": ["gone.js"], "sentinelText": "x"})
    )
    (tmp_path / "index.html").write_text("<html></html>")
    with pytest.raises(FileNotFoundError):
        AppState.load(tmp_path)
    (tmp_path / "app.json").write_text(json.dumps({"page": "index.html", "scripts": []}))
    with pytest.raises(ValueError):
        AppState.load(tmp_path)


def test_warmup_oracle_on_deterministic_app(tmp_path):
    app = write_app(
        tmp_path,
        {"main.js": "function work() { let a = 1; }\nwork();\nmarkLoaded();\n"},
    )
    harness = SimHarness()
    profile = warmup_oracle(
        harness, app, samples=5, discard=2, multiplier=3.0, floor=0
    )
    assert profile.threshold == 0  # deterministic captures are identical
    assert profile.timeout_ms == 1000.0  # clamped floor dominates tiny loads
    assert profile.metrics.event_count == 2
    single = harness.evaluate(app, 1000.0)
    assert profile.metrics == single.metrics()
    assert profile.screenshot == single.screenshot


def test_warmup_oracle_floor_carries_into_threshold(tmp_path):
    app = write_app(tmp_path, {"main.js": "markLoaded();\n"})
    profile = warmup_oracle(
        SimHarness(), app, samples=3, discard=1, multiplier=3.0, floor=25
    )
    assert profile.threshold == 25


def test_warmup_oracle_rejects_never_loading_app(tmp_path):
    app = write_app(tmp_path, {"main.js": "log(1);\n"})
    with pytest.raises(OracleNeverLoads):
        warmup_oracle(SimHarness(), app, samples=3, discard=1, multiplier=3.0, floor=0)


def test_warmup_oracle_parameter_validation(tmp_path):
    app = write_app(tmp_path, {"main.js": "markLoaded();\n"})
    with pytest.raises(ValueError):
        warmup_oracle(SimHarness(), app, samples=2, discard=2, multiplier=3.0, floor=0)


def test_warmup_oracle_median_over_post_discard_samples():
    from fakes import SequenceHarness, result_with_load_time

    harness = SequenceHarness(
        [
            result_with_load_time(50.0),  # discarded
            result_with_load_time(40.0),  # discarded
            result_with_load_time(1.0),
            result_with_load_time(2.0),
            result_with_load_time(3.0),
            result_with_load_time(2.0),  # calibration captures
            result_with_load_time(2.0),
        ]
    )
    profile = warmup_oracle(
        harness, app=None, samples=5, discard=2, multiplier=3.0, floor=0
    )
    assert profile.metrics.load_time_ms == pytest.approx(2.0)
    assert profile.timeout_ms == 1000.0  # 2 x 2 ms clamps to the 1 s floor
    assert harness.calls == 7


def test_for_loop_with_expression_init_runs():
    result = run(
        "let seen = '';\n"
        "for (k = 0; k < 3; k++) { seen = seen + k; }\n"
        "writeText('k', seen);\nmarkLoaded();\n"
    )
    assert not result.crashed
    assert "012" in result.document
