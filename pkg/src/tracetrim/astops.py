"""Mention lookup, statement resolution, and statement deletion on parsed sources."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LocusNotFound, ReparseFailure, ScriptSyntaxError
from .jsparse import BLOCK, IDENTIFIER, PROGRAM, Ast, Node, iter_nodes, parse_source


@dataclass(frozen=True, slots=True)
class NodeLocus:
    """A stable reference to one node: child-index path from the root."""
    path: tuple[int, ...]
    kind: str
    span: tuple[int, int]


@dataclass(frozen=True, slots=True)
class StatementSpan:
    """Byte span of a complete statement (terminator included) and its kind."""
    span: tuple[int, int]
    statement_kind: str


@dataclass(frozen=True, slots=True)
class DeletionRecord:
    span: tuple[int, int]
    removed_text: str


def find_mentions(ast: Ast, name: str) -> list[NodeLocus]:
    """Every Identifier node spelled ``name``, in source order.

    Declaration names, call callees, parameters, and dot-member property
    names all count; string contents do not.
    """
    if not name:
        raise ValueError("name must be nonempty")
    found = [
        NodeLocus(path=path, kind=node.kind, span=node.span)
        for node, path in iter_nodes(ast.root)
        if node.kind == IDENTIFIER and node.value == name
    ]
    found.sort(key=lambda locus: locus.span)
    return found


def resolve_locus(ast: Ast, locus: NodeLocus) -> list[Node]:
    """Resolve a locus to its node; returns the path of nodes root..node."""
    node = ast.root
    chain = [node]
    for index in locus.path:
        if index >= len(node.children):
            raise LocusNotFound(f"path {locus.path} does not resolve")
        node = node.children[index]
        chain.append(node)
    if node.span != locus.span or node.kind != locus.kind:
        raise LocusNotFound(
            f"node at path {locus.path} is {node.kind}@{node.span}, "
            f"expected {locus.kind}@{locus.span}"
        )
    return chain


def enclosing_statement(ast: Ast, locus: NodeLocus) -> StatementSpan:
    """Nearest ancestor in statement position (never the Program root).

    Statement position means the node's parent is the Program or a Block;
    a mention inside a for-clause or if-condition therefore resolves to the
    whole loop or conditional, which is the smallest syntactically safe
    deletion unit.
    """
    chain = resolve_locus(ast, locus)
    for index in range(len(chain) - 1, 0, -1):
        parent = chain[index - 1]
        if parent.kind in (PROGRAM, BLOCK):
            node = chain[index]
            return StatementSpan(span=node.span, statement_kind=node.kind)
    raise LocusNotFound(f"no enclosing statement for path {locus.path}")


def delete_span(text: str, span: tuple[int, int]) -> tuple[str, DeletionRecord]:
    """Remove a statement span from ``text``, keeping one newline at the cut.

    Bytes outside the span are untouched; when the span is not already
    followed by a newline, a single placeholder newline is inserted so the
    lines around the edit keep their positions. The result must re-parse or
    ReparseFailure is raised (callers treat that as an inapplicable edit,
    not a crash).
    """
    start, end = span
    if not (0 <= start <= end <= len(text)):
        raise ValueError(f"span {span} out of range for text of length {len(text)}")
    suffix = text[end:]
    placeholder = "" if suffix.startswith("\n") else "\n"
    new_text = text[:start] + placeholder + suffix
    try:
        parse_source(new_text)
    except ScriptSyntaxError as exc:
        raise ReparseFailure(f"deleting {span} breaks the parse: {exc}") from exc
    return new_text, DeletionRecord(span=span, removed_text=text[start:end])


def iter_statement_nodes(root: Node):
    """Yield (node, path) for every node in statement position."""
    for node, path in iter_nodes(root):
        if node.kind in (PROGRAM, BLOCK):
            for index, child in enumerate(node.children):
                yield child, path + (index,)
