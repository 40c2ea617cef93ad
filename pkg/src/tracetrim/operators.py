"""The two mutation operators: trace-targeted deletion and the loop rewrite.

Deletion removes the nearest enclosing statement of any mention of a method
name seen in the page-load trace. The loop rewrite converts ``forEach``/
``map`` call sites to indexed loops the way a minimally tested community
codemod would: the receiver expression is pasted inline and therefore
re-evaluated in the loop header and body. That hazard is intentional; the
search loop is the safety net.
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass

from . import jsparse
from .astops import enclosing_statement, find_mentions, iter_statement_nodes
from .errors import ReparseFailure, ScriptSyntaxError, SpanDrift
from .jsparse import (
    ARROW_FUNCTION,
    ASSIGNMENT,
    CALL,
    EXPRESSION_STATEMENT,
    FUNCTION_EXPRESSION,
    IDENTIFIER,
    MEMBER,
    PAREN,
    VARIABLE_DECLARATION,
    Ast,
    Node,
    parse_source,
)
from .trace import CallSiteTarget


class Operator(enum.Enum):
    DELETE = "delete"
    LOOP_REWRITE = "loop-rewrite"


@dataclass(frozen=True, slots=True)
class MutationCandidate:
    id: str
    file_name: str
    operator: Operator
    span: tuple[int, int]
    removed_text: str
    inserted_text: str
    preview: str


@dataclass(frozen=True, slots=True)
class MutatedSource:
    file_name: str
    new_text: str
    applied_candidate: MutationCandidate


def _preview(text: str, limit: int = 48) -> str:
    collapsed = " ".join(text.split())
    return collapsed if len(collapsed) <= limit else collapsed[: limit - 3] + "..."


def _candidate_id(file_name, operator, span, removed, inserted) -> str:
    payload = "\x00".join(
        [file_name, operator.value, str(span[0]), str(span[1]), removed, inserted]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _make_candidate(file_name, operator, span, removed, inserted) -> MutationCandidate:
    return MutationCandidate(
        id=_candidate_id(file_name, operator, span, removed, inserted),
        file_name=file_name,
        operator=operator,
        span=span,
        removed_text=removed,
        inserted_text=inserted,
        preview=_preview(removed),
    )


def _deletion_placeholder(text: str, span: tuple[int, int]) -> str:
    return "" if text[span[1] :].startswith("\n") else "\n"


def enumerate_deletions(
    ast: Ast, file_name: str, targets: list[CallSiteTarget]
) -> list[MutationCandidate]:
    """Deletion candidates for every traced-name mention in this file.

    One candidate per distinct enclosing statement (mentions sharing a
    statement merge), ordered by span start descending so applying a later
    edit never invalidates an earlier span within one enumeration pass.
    """
    spans: set[tuple[int, int]] = set()
    for target in targets:
        if target.file_name != file_name:
            continue
        for locus in find_mentions(ast, target.method_name):
            statement = enclosing_statement(ast, locus)
            spans.add(statement.span)
    candidates = []
    for span in sorted(spans, key=lambda s: (-s[0], -s[1])):
        removed = ast.text[span[0] : span[1]]
        candidates.append(
            _make_candidate(
                file_name,
                Operator.DELETE,
                span,
                removed,
                _deletion_placeholder(ast.text, span),
            )
        )
    return candidates


def apply_deletion(text: str, candidate: MutationCandidate) -> MutatedSource | None:
    """Apply a deletion candidate; None means the edit broke the parse.

    Raises SpanDrift when the file no longer matches the candidate (the
    caller must re-enumerate against the current text).
    """
    if candidate.operator is not Operator.DELETE:
        raise ValueError(f"not a deletion candidate: {candidate.operator}")
    start, end = candidate.span
    if text[start:end] != candidate.removed_text:
        raise SpanDrift(
            f"{candidate.file_name}[{start}:{end}] changed since enumeration"
        )
    new_text = text[:start] + _deletion_placeholder(text, candidate.span) + text[end:]
    try:
        parse_source(new_text)
    except ScriptSyntaxError:
        return None
    return MutatedSource(
        file_name=candidate.file_name, new_text=new_text, applied_candidate=candidate
    )


# --- loop rewrite -------------------------------------------------------------

_FRESH_NAME_RE = re.compile(r"__[im](\d+)")

# Receiver kinds that can take ".length"/"[i]" without extra parentheses.
_POSTFIX_SAFE = frozenset({IDENTIFIER, MEMBER, CALL, PAREN, jsparse.ARRAY_LITERAL})


def _fresh_counter(text: str) -> int:
    taken = [int(m.group(1)) for m in _FRESH_NAME_RE.finditer(text)]
    return max(taken) + 1 if taken else 0


def _match_iteration_call(node: Node, method: str) -> tuple[Node, Node] | None:
    """Match EXPR.method(CALLBACK); returns (receiver, callback) or None."""
    if node.kind != CALL or len(node.children) != 2:
        return None
    callee, callback = node.children[0], node.children[1]
    if callee.kind != MEMBER or callee.value != ".":
        return None
    prop = callee.children[1]
    if prop.kind != IDENTIFIER or prop.value != method:
        return None
    if callback.kind not in (FUNCTION_EXPRESSION, ARROW_FUNCTION, IDENTIFIER):
        return None
    return callee.children[0], callback


def _loop_site(node: Node):
    """Classify a statement as a rewrite site.

    Returns (form, receiver, callback, lhs_text_or_None, decl_keyword_or_None)
    where form is "forEach" or "map"; None when the statement is not a site.
    """
    if node.kind == EXPRESSION_STATEMENT:
        expr = node.children[0]
        match = _match_iteration_call(expr, "forEach")
        if match:
            return ("forEach", match[0], match[1], None, None)
        if expr.kind == ASSIGNMENT:
            target, value = expr.children
            match = _match_iteration_call(value, "map")
            if match:
                return ("map", match[0], match[1], target, None)
        return None
    if node.kind == VARIABLE_DECLARATION and len(node.children) == 1:
        declarator = node.children[0]
        if len(declarator.children) == 2:
            match = _match_iteration_call(declarator.children[1], "map")
            if match:
                return ("map", match[0], match[1], declarator.children[0], node.value)
    return None


def _rewrite_text(ast: Ast, site, counter: int) -> str:
    form, receiver, callback, lhs, decl_keyword = site
    receiver_text = ast.text[receiver.start : receiver.end]
    if receiver.kind not in _POSTFIX_SAFE:
        receiver_text = f"({receiver_text})"
    callback_text = ast.text[callback.start : callback.end]
    if callback.kind != IDENTIFIER:
        callback_text = f"({callback_text})"
    i = f"__i{counter}"
    if form == "forEach":
        return (
            f"for (let {i} = 0; {i} < {receiver_text}.length; {i}++) "
            f"{{ {callback_text}({receiver_text}[{i}], {i}); }}"
        )
    m = f"__m{counter}"
    lhs_text = ast.text[lhs.start : lhs.end]
    assign = f"{decl_keyword} {lhs_text}" if decl_keyword else lhs_text
    return (
        f"let {m} = []; "
        f"for (let {i} = 0; {i} < {receiver_text}.length; {i}++) "
        f"{{ {m}.push({callback_text}({receiver_text}[{i}], {i})); }} "
        f"{assign} = {m};"
    )


def enumerate_loop_sites(ast: Ast, file_name: str) -> list[MutationCandidate]:
    """Rewrite candidates for every forEach/map site, span start descending."""
    counter = _fresh_counter(ast.text)
    candidates = []
    for node, _ in iter_statement_nodes(ast.root):
        site = _loop_site(node)
        if site is None:
            continue
        removed = ast.text[node.start : node.end]
        candidates.append(
            _make_candidate(
                file_name,
                Operator.LOOP_REWRITE,
                node.span,
                removed,
                _rewrite_text(ast, site, counter),
            )
        )
    candidates.sort(key=lambda c: (-c.span[0], -c.span[1]))
    return candidates


def apply_loop_rewrite(text: str, candidate: MutationCandidate) -> MutatedSource | None:
    """Apply a loop-rewrite candidate; None when the result fails to parse."""
    if candidate.operator is not Operator.LOOP_REWRITE:
        raise ValueError(f"not a loop-rewrite candidate: {candidate.operator}")
    start, end = candidate.span
    if text[start:end] != candidate.removed_text:
        raise SpanDrift(
            f"{candidate.file_name}[{start}:{end}] changed since enumeration"
        )
    new_text = text[:start] + candidate.inserted_text + text[end:]
    try:
        parse_source(new_text)
    except ScriptSyntaxError:
        return None
    return MutatedSource(
        file_name=candidate.file_name, new_text=new_text, applied_candidate=candidate
    )


def apply_candidate(text: str, candidate: MutationCandidate) -> MutatedSource | None:
    if candidate.operator is Operator.DELETE:
        return apply_deletion(text, candidate)
    return apply_loop_rewrite(text, candidate)


def rewrite_all_sites(text: str, file_name: str, max_passes: int = 64) -> tuple[str, int]:
    """Batch mode: rewrite every loop site in a file, one site per pass.

    Re-enumerates after each application so fresh-name counters never
    collide. Returns the final text and the number of rewrites applied.
    """
    applied = 0
    for _ in range(max_passes):
        ast = parse_source(text)
        sites = enumerate_loop_sites(ast, file_name)
        if not sites:
            return text, applied
        mutated = apply_loop_rewrite(text, sites[0])
        if mutated is None:
            raise ReparseFailure(
                f"batch rewrite produced unparseable source in {file_name}"
            )
        text = mutated.new_text
        applied += 1
    raise ReparseFailure(f"batch rewrite did not converge in {max_passes} passes")
