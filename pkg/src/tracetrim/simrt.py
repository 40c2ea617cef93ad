"""Deterministic script runtime standing in for a browser during search.

Executes the parser subset plus a small page API: ``paint(x, y, r, g, b)``
sets a framebuffer pixel, ``writeText(id, s)`` stamps a 5x7 bitmap per
character at a position derived from hashing the id, ``markLoaded()``
appends the sentinel text to the document, ``defer(fn)`` queues a new root
task (FIFO), and ``log(x)`` just emits an event. Arrays support ``length``,
``push``, ``forEach``, and ``map``.

Cost model: every function invocation (user or builtin) emits one Complete
trace event named after the callee, with a duration of 10 us base plus 1 us
per directly executed statement plus the durations of nested calls. Time is
purely virtual, so identical inputs produce byte-identical results. A step
budget and a virtual timeout both flag the run as timed out; an uncaught
script error flags it as crashed (a crashed page never counts as loaded).
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass

from .jsparse import (
    ARRAY_LITERAL,
    ARROW_FUNCTION,
    ASSIGNMENT,
    BINARY,
    BLOCK,
    BOOLEAN_LITERAL,
    CALL,
    EXPRESSION_STATEMENT,
    FOR_STATEMENT,
    FUNCTION_DECLARATION,
    FUNCTION_EXPRESSION,
    IDENTIFIER,
    IF_STATEMENT,
    MEMBER,
    NUMBER_LITERAL,
    PAREN,
    PROGRAM,
    RETURN_STATEMENT,
    STRING_LITERAL,
    UNARY,
    UPDATE,
    VARIABLE_DECLARATION,
    Ast,
    Node,
)
from .trace import Phase, TraceEvent

FRAMEBUFFER_SIZE = 100
INVOCATION_BASE_US = 10
STATEMENT_COST_US = 1
DEFAULT_STEP_BUDGET = 1_000_000

_GLYPH_WIDTH = 5
_GLYPH_HEIGHT = 7
_GLYPH_ADVANCE = 6


class ScriptCrash(Exception):
    """Uncaught script error; the evaluation reports loaded=False."""


class _Timeout(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class JsArray:
    __slots__ = ("items",)

    def __init__(self, items=None):
        self.items = items if items is not None else []


class JsFunction:
    __slots__ = ("params", "body", "name", "file_name", "env", "is_expression_body")

    def __init__(self, params, body, name, file_name, env, is_expression_body):
        self.params = params
        self.body = body
        self.name = name
        self.file_name = file_name
        self.env = env
        self.is_expression_body = is_expression_body


class _Env:
    __slots__ = ("vars", "parent")

    def __init__(self, parent=None):
        self.vars: dict = {}
        self.parent = parent

    def declare(self, name, value):
        self.vars[name] = value

    def lookup(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise ScriptCrash(f"{name} is not defined")

    def assign(self, name, value):
        env = self
        while env is not None:
            if name in env.vars:
                env.vars[name] = value
                return
            env = env.parent
        # Sloppy-mode global creation, as browsers do for plain scripts.
        env = self
        while env.parent is not None:
            env = env.parent
        env.vars[name] = value


@dataclass(slots=True)
class SimResult:
    events: list[TraceEvent]
    framebuffer: bytes  # row-major RGBA, FRAMEBUFFER_SIZE squared
    document: str
    loaded: bool
    timed_out: bool
    crashed: bool
    crash_message: str
    wall_clock_ms: float
    steps: int


def _display(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    if isinstance(value, str):
        return value
    if isinstance(value, JsArray):
        return ",".join(_display(item) for item in value.items)
    if isinstance(value, JsFunction):
        return f"function {value.name}"
    return str(value)


def _truthy(value) -> bool:
    if value is None or value is False:
        return False
    if isinstance(value, float):
        return value != 0.0
    if isinstance(value, str):
        return value != ""
    if value is True:
        return True
    return True


def _glyph_bits(ch: str) -> int:
    digest = hashlib.sha256(ch.encode("utf-8")).digest()
    bits = 0
    for j in range(_GLYPH_WIDTH * _GLYPH_HEIGHT):
        if (digest[j // 8] >> (j % 8)) & 1:
            bits |= 1 << j
    return bits


class _Interpreter:
    def __init__(self, sentinel_text: str, timeout_us: int, step_budget: int):
        self.sentinel_text = sentinel_text
        self.timeout_us = timeout_us
        self.step_budget = step_budget
        self.clock_us = 0
        self.steps = 0
        self.events: list[TraceEvent] = []
        size = FRAMEBUFFER_SIZE * FRAMEBUFFER_SIZE
        self.framebuffer = bytearray(b"\xff\xff\xff\xff" * size)
        self.document_parts: list[str] = []
        self.tasks: deque[JsFunction] = deque()
        self.globals = _Env()
        for name in ("paint", "writeText", "markLoaded", "defer", "log"):
            self.globals.declare(name, ("builtin", name))
        self.globals.declare("undefined", None)

    # -- bookkeeping -----------------------------------------------------------

    def _tick(self):
        self.steps += 1
        self.clock_us += STATEMENT_COST_US
        if self.steps > self.step_budget or self.clock_us >= self.timeout_us:
            raise _Timeout()

    def _emit(self, name: str, category: str, start_us: int, source_url: str | None):
        self.events.append(
            TraceEvent(
                name=name,
                category=category,
                phase=Phase.COMPLETE,
                timestamp_us=start_us,
                duration_us=self.clock_us - start_us,
                pid=1,
                tid=1,
                source_url=source_url,
            )
        )

    # -- program execution -------------------------------------------------------

    def run_scripts(self, scripts: list[tuple[str, Ast]]):
        # Like browser script tags: each file hoists its declarations right
        # before it runs, so earlier files cannot call into later ones at
        # top level. Deferred tasks run after every file has loaded.
        for file_name, ast in scripts:
            self._hoist(ast.root.children, self.globals, file_name)
            for statement in ast.root.children:
                self.execute_statement(statement, self.globals, file_name)
        while self.tasks:
            fn = self.tasks.popleft()
            self.invoke(fn, [])

    def _hoist(self, statements: list[Node], env: _Env, file_name: str):
        for node in statements:
            if node.kind == FUNCTION_DECLARATION:
                env.declare(node.value, self._make_function(node, env, file_name))

    def _make_function(self, node: Node, env: _Env, file_name: str) -> JsFunction:
        children = node.children
        if node.kind == ARROW_FUNCTION:
            params = [p.value for p in children[:-1]]
            body = children[-1]
            return JsFunction(
                params, body, "(anonymous)", file_name, env,
                is_expression_body=body.kind != BLOCK,
            )
        has_name = node.value is not None
        params = [p.value for p in children[1:-1]] if has_name else [
            p.value for p in children[:-1]
        ]
        name = node.value if has_name else "(anonymous)"
        return JsFunction(params, children[-1], name, file_name, env,
                          is_expression_body=False)

    def execute_statement(self, node: Node, env: _Env, file_name: str):
        self._tick()
        kind = node.kind
        if kind == EXPRESSION_STATEMENT:
            self.evaluate(node.children[0], env, file_name)
        elif kind == VARIABLE_DECLARATION:
            for declarator in node.children:
                name = declarator.children[0].value
                value = None
                if len(declarator.children) == 2:
                    value = self.evaluate(declarator.children[1], env, file_name)
                    if isinstance(value, JsFunction) and value.name == "(anonymous)":
                        value.name = name
                env.declare(name, value)
        elif kind == FUNCTION_DECLARATION:
            pass  # already bound during hoisting
        elif kind == RETURN_STATEMENT:
            value = None
            if node.children:
                value = self.evaluate(node.children[0], env, file_name)
            raise _Return(value)
        elif kind == IF_STATEMENT:
            condition = self.evaluate(node.children[0], env, file_name)
            if _truthy(condition):
                self.execute_statement(node.children[1], env, file_name)
            elif len(node.children) == 3:
                self.execute_statement(node.children[2], env, file_name)
        elif kind == FOR_STATEMENT:
            init, condition, update, body = node.children
            loop_env = _Env(env)
            if init.kind == VARIABLE_DECLARATION:
                self.execute_statement(init, loop_env, file_name)
            else:
                self.evaluate(init, loop_env, file_name)
            while _truthy(self.evaluate(condition, loop_env, file_name)):
                self.execute_statement(body, loop_env, file_name)
                self.evaluate(update, loop_env, file_name)
        elif kind == BLOCK:
            block_env = _Env(env)
            self._hoist(node.children, block_env, file_name)
            for statement in node.children:
                self.execute_statement(statement, block_env, file_name)
        else:
            raise ScriptCrash(f"cannot execute node kind {kind}")

    # -- expressions -------------------------------------------------------------

    def evaluate(self, node: Node, env: _Env, file_name: str):
        kind = node.kind
        if kind == IDENTIFIER:
            return env.lookup(node.value)
        if kind == NUMBER_LITERAL:
            return node.value
        if kind == STRING_LITERAL:
            return node.value
        if kind == BOOLEAN_LITERAL:
            return node.value
        if kind == PAREN:
            return self.evaluate(node.children[0], env, file_name)
        if kind == ARRAY_LITERAL:
            return JsArray([
                self.evaluate(child, env, file_name) for child in node.children
            ])
        if kind in (FUNCTION_EXPRESSION, ARROW_FUNCTION):
            return self._make_function(node, env, file_name)
        if kind == MEMBER:
            obj = self.evaluate(node.children[0], env, file_name)
            return self._member_get(obj, self._member_key(node, env, file_name))
        if kind == CALL:
            return self._evaluate_call(node, env, file_name)
        if kind == ASSIGNMENT:
            return self._evaluate_assignment(node, env, file_name)
        if kind == BINARY:
            return self._evaluate_binary(node, env, file_name)
        if kind == UNARY:
            operand = self.evaluate(node.children[0], env, file_name)
            if node.value == "!":
                return not _truthy(operand)
            if not isinstance(operand, float) or isinstance(operand, bool):
                raise ScriptCrash("unary - expects a number")
            return -operand
        if kind == UPDATE:
            return self._evaluate_update(node, env, file_name)
        raise ScriptCrash(f"cannot evaluate node kind {kind}")

    def _member_key(self, node: Node, env: _Env, file_name: str):
        if node.value == ".":
            return node.children[1].value
        return self.evaluate(node.children[1], env, file_name)

    def _member_get(self, obj, key):
        if isinstance(obj, JsArray):
            if key == "length":
                return float(len(obj.items))
            if key in ("push", "forEach", "map"):
                return ("method", key, obj)
            if isinstance(key, float):
                index = int(key)
                if 0 <= index < len(obj.items):
                    return obj.items[index]
                return None
            raise ScriptCrash(f"array has no property {_display(key)!r}")
        if isinstance(obj, str):
            if key == "length":
                return float(len(obj))
            if isinstance(key, float):
                index = int(key)
                if 0 <= index < len(obj):
                    return obj[index]
                return None
            raise ScriptCrash(f"string has no property {_display(key)!r}")
        raise ScriptCrash(
            f"cannot read property {_display(key)!r} of {_display(obj)}"
        )

    def _evaluate_call(self, node: Node, env: _Env, file_name: str):
        callee = node.children[0]
        args = [self.evaluate(arg, env, file_name) for arg in node.children[1:]]
        target = self.evaluate(callee, env, file_name)
        return self.invoke(target, args)

    def _evaluate_assignment(self, node: Node, env: _Env, file_name: str):
        target, value_node = node.children
        value = self.evaluate(value_node, env, file_name)
        if target.kind == IDENTIFIER:
            if isinstance(value, JsFunction) and value.name == "(anonymous)":
                value.name = target.value
            env.assign(target.value, value)
            return value
        obj = self.evaluate(target.children[0], env, file_name)
        key = self._member_key(target, env, file_name)
        if isinstance(obj, JsArray) and isinstance(key, float):
            index = int(key)
            if index < 0:
                raise ScriptCrash("negative array index")
            while len(obj.items) <= index:
                obj.items.append(None)
            obj.items[index] = value
            return value
        raise ScriptCrash(
            f"cannot assign property {_display(key)!r} on {_display(obj)}"
        )

    def _evaluate_update(self, node: Node, env: _Env, file_name: str):
        target = node.children[0]
        if target.kind == IDENTIFIER:
            old = env.lookup(target.value)
            if not isinstance(old, float) or isinstance(old, bool):
                raise ScriptCrash("++ expects a number")
            env.assign(target.value, old + 1.0)
            return old
        obj = self.evaluate(target.children[0], env, file_name)
        key = self._member_key(target, env, file_name)
        old = self._member_get(obj, key)
        if not isinstance(old, float) or isinstance(old, bool):
            raise ScriptCrash("++ expects a number")
        if isinstance(obj, JsArray) and isinstance(key, float):
            obj.items[int(key)] = old + 1.0
            return old
        raise ScriptCrash("++ target is not writable")

    def _evaluate_binary(self, node: Node, env: _Env, file_name: str):
        op = node.value
        left_node, right_node = node.children
        if op == "&&":
            left = self.evaluate(left_node, env, file_name)
            return self.evaluate(right_node, env, file_name) if _truthy(left) else left
        if op == "||":
            left = self.evaluate(left_node, env, file_name)
            return left if _truthy(left) else self.evaluate(right_node, env, file_name)
        left = self.evaluate(left_node, env, file_name)
        right = self.evaluate(right_node, env, file_name)
        if op == "+":
            if isinstance(left, str) or isinstance(right, str):
                return _display(left) + _display(right)
            return self._arith(left) + self._arith(right)
        if op in ("-", "*", "/", "%"):
            a, b = self._arith(left), self._arith(right)
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if b == 0.0:
                    raise ScriptCrash("division by zero")
                return a / b
            if b == 0.0:
                raise ScriptCrash("modulo by zero")
            return a - b * float(int(a / b))  # JS-style remainder keeps dividend sign
        if op in ("==", "!="):
            equal = self._loose_equal(left, right)
            return equal if op == "==" else not equal
        if op in ("<", "<=", ">", ">="):
            if isinstance(left, float) and isinstance(right, float):
                pass
            elif isinstance(left, str) and isinstance(right, str):
                pass
            else:
                raise ScriptCrash(f"cannot compare {_display(left)} {op} {_display(right)}")
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right
        raise ScriptCrash(f"unsupported operator {op}")

    @staticmethod
    def _arith(value) -> float:
        if isinstance(value, bool):
            return 1.0 if value else 0.0
        if isinstance(value, float):
            return value
        raise ScriptCrash(f"arithmetic on non-number {_display(value)}")

    @staticmethod
    def _loose_equal(left, right) -> bool:
        if isinstance(left, bool) or isinstance(right, bool):
            if isinstance(left, (bool, float)) and isinstance(right, (bool, float)):
                return _Interpreter._arith(left) == _Interpreter._arith(right)
            return False
        if type(left) is type(right):
            if isinstance(left, JsArray):
                return left is right
            return left == right
        if left is None and right is None:
            return True
        return False

    # -- invocation ---------------------------------------------------------------

    def invoke(self, target, args):
        if self.clock_us >= self.timeout_us or self.steps > self.step_budget:
            raise _Timeout()
        if isinstance(target, JsFunction):
            return self._invoke_user(target, args)
        if isinstance(target, tuple) and target and target[0] == "builtin":
            return self._invoke_builtin(target[1], args)
        if isinstance(target, tuple) and target and target[0] == "method":
            return self._invoke_method(target[1], target[2], args)
        raise ScriptCrash(f"{_display(target)} is not a function")

    def _invoke_user(self, fn: JsFunction, args):
        start = self.clock_us
        self.clock_us += INVOCATION_BASE_US
        env = _Env(fn.env)
        for index, param in enumerate(fn.params):
            env.declare(param, args[index] if index < len(args) else None)
        result = None
        try:
            if fn.is_expression_body:
                result = self.evaluate(fn.body, env, fn.file_name)
            else:
                self._hoist(fn.body.children, env, fn.file_name)
                for statement in fn.body.children:
                    self.execute_statement(statement, env, fn.file_name)
        except _Return as ret:
            result = ret.value
        self._emit(fn.name, "script", start, fn.file_name)
        return result

    def _invoke_builtin(self, name: str, args):
        start = self.clock_us
        self.clock_us += INVOCATION_BASE_US
        result = None
        if name == "paint":
            self._paint(args)
        elif name == "writeText":
            self._write_text(args)
        elif name == "markLoaded":
            self.document_parts.append(self.sentinel_text)
        elif name == "defer":
            if not args or not isinstance(args[0], JsFunction):
                raise ScriptCrash("defer expects a function")
            self.tasks.append(args[0])
        elif name == "log":
            pass
        else:
            raise ScriptCrash(f"unknown builtin {name}")
        self._emit(name, "builtin", start, None)
        return result

    def _invoke_method(self, name: str, receiver: JsArray, args):
        start = self.clock_us
        self.clock_us += INVOCATION_BASE_US
        result = None
        if name == "push":
            receiver.items.extend(args)
            result = float(len(receiver.items))
        elif name == "forEach":
            if not args or not isinstance(args[0], JsFunction):
                raise ScriptCrash("forEach expects a function")
            callback = args[0]
            for index in range(len(receiver.items)):
                if index >= len(receiver.items):
                    break
                self.invoke(callback, [receiver.items[index], float(index)])
        elif name == "map":
            if not args or not isinstance(args[0], JsFunction):
                raise ScriptCrash("map expects a function")
            callback = args[0]
            mapped = []
            for index in range(len(receiver.items)):
                mapped.append(
                    self.invoke(callback, [receiver.items[index], float(index)])
                )
            result = JsArray(mapped)
        else:
            raise ScriptCrash(f"unknown array method {name}")
        self._emit(name, "builtin", start, None)
        return result

    # -- page API -------------------------------------------------------------------

    def _paint(self, args):
        if len(args) < 5:
            raise ScriptCrash("paint expects x, y, r, g, b")
        values = []
        for value in args[:5]:
            if isinstance(value, bool) or not isinstance(value, float):
                raise ScriptCrash("paint expects numbers")
            values.append(int(value))
        x, y, r, g, b = values
        if 0 <= x < FRAMEBUFFER_SIZE and 0 <= y < FRAMEBUFFER_SIZE:
            offset = (y * FRAMEBUFFER_SIZE + x) * 4
            self.framebuffer[offset] = max(0, min(255, r))
            self.framebuffer[offset + 1] = max(0, min(255, g))
            self.framebuffer[offset + 2] = max(0, min(255, b))
            self.framebuffer[offset + 3] = 255

    def _write_text(self, args):
        if len(args) < 2:
            raise ScriptCrash("writeText expects an id and a string")
        text_id = _display(args[0])
        text = _display(args[1])
        digest = hashlib.sha256(text_id.encode("utf-8")).digest()
        base_x = digest[0] % FRAMEBUFFER_SIZE
        base_y = digest[1] % FRAMEBUFFER_SIZE
        for index, ch in enumerate(text):
            bits = _glyph_bits(ch)
            origin_x = base_x + index * _GLYPH_ADVANCE
            for j in range(_GLYPH_WIDTH * _GLYPH_HEIGHT):
                if not (bits >> j) & 1:
                    continue
                x = origin_x + j % _GLYPH_WIDTH
                y = base_y + j // _GLYPH_WIDTH
                if 0 <= x < FRAMEBUFFER_SIZE and 0 <= y < FRAMEBUFFER_SIZE:
                    offset = (y * FRAMEBUFFER_SIZE + x) * 4
                    self.framebuffer[offset : offset + 4] = b"\x00\x00\x00\xff"
        self.document_parts.append(text)


def execute_scripts(
    scripts: list[tuple[str, Ast]],
    sentinel_text: str,
    timeout_ms: float,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> SimResult:
    """Run parsed scripts in order and report the final page state.

    ``scripts`` pairs each manifest file name with its parsed Ast; the file
    name becomes the source attribution of events for functions defined there.
    """
    timeout_us = max(1, int(timeout_ms * 1000))
    interp = _Interpreter(sentinel_text, timeout_us, step_budget)
    timed_out = False
    crashed = False
    crash_message = ""
    try:
        interp.run_scripts(scripts)
    except _Timeout:
        timed_out = True
    except ScriptCrash as exc:
        crashed = True
        crash_message = str(exc)
    except RecursionError:
        crashed = True
        crash_message = "call stack exhausted"
    document = "".join(interp.document_parts)
    loaded = (
        not timed_out
        and not crashed
        and bool(sentinel_text)
        and sentinel_text in document
    )
    clock = min(interp.clock_us, timeout_us) if timed_out else interp.clock_us
    events = sorted(interp.events, key=lambda e: e.timestamp_us)
    return SimResult(
        events=events,
        framebuffer=bytes(interp.framebuffer),
        document=document,
        loaded=loaded,
        timed_out=timed_out,
        crashed=crashed,
        crash_message=crash_message,
        wall_clock_ms=clock / 1000.0,
        steps=interp.steps,
    )
