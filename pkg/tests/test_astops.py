from __future__ import annotations

import pytest

from tracetrim.astops import (
    NodeLocus,
    delete_span,
    enclosing_statement,
    find_mentions,
    iter_statement_nodes,
    resolve_locus,
)
from tracetrim.errors import LocusNotFound, ReparseFailure
from tracetrim.jsparse import (
    EXPRESSION_STATEMENT,
    FOR_STATEMENT,
    FUNCTION_DECLARATION,
    IF_STATEMENT,
    VARIABLE_DECLARATION,
    parse_source,
)


def span_text(source, span):
    return source[span[0] : span[1]]


# --- find_mentions -----------------------------------------------------------


def test_absent_name_yields_no_mentions():
    ast = parse_source("foo();")
    assert find_mentions(ast, "bar") == []


def test_call_and_member_property_mentions():
    source = "foo(); a.foo();"
    ast = parse_source(source)
    mentions = find_mentions(ast, "foo")
    assert len(mentions) == 2
    assert [span_text(source, m.span) for m in mentions] == ["foo", "foo"]


def test_declaration_name_counts_as_mention():
    ast = parse_source("function foo(){} foo();")
    assert len(find_mentions(ast, "foo")) == 2


def test_string_contents_do_not_count():
    ast = parse_source("log('foo');")
    assert find_mentions(ast, "foo") == []


def test_mentions_in_source_order():
    source = "let a = foo(1); bar(); foo(foo);"
    ast = parse_source(source)
    spans = [m.span for m in find_mentions(ast, "foo")]
    assert spans == sorted(spans)
    assert len(spans) == 3


def test_empty_name_rejected():
    with pytest.raises(ValueError):
        find_mentions(parse_source(""), "")


# --- resolve_locus / enclosing_statement --------------------------------------


def test_resolve_locus_round_trip():
    ast = parse_source("x = foo();")
    locus = find_mentions(ast, "foo")[0]
    chain = resolve_locus(ast, locus)
    assert chain[-1].value == "foo"


def test_stale_locus_raises():
    ast = parse_source("x = foo();")
    bogus = NodeLocus(path=(5, 2), kind="Identifier", span=(0, 3))
    with pytest.raises(LocusNotFound):
        resolve_locus(ast, bogus)
    shifted = NodeLocus(path=(0,), kind="Identifier", span=(0, 3))
    with pytest.raises(LocusNotFound):
        resolve_locus(ast, shifted)


def test_enclosing_statement_of_call_argument():
    source = "x = foo();"
    ast = parse_source(source)
    locus = find_mentions(ast, "foo")[0]
    statement = enclosing_statement(ast, locus)
    assert statement.statement_kind == EXPRESSION_STATEMENT
    assert span_text(source, statement.span) == "x = foo();"


def test_enclosing_statement_of_declaration_name_is_whole_declaration():
    source = "function foo(){ return 1; }\nfoo();"
    ast = parse_source(source)
    declaration_mention = find_mentions(ast, "foo")[0]
    statement = enclosing_statement(ast, declaration_mention)
    assert statement.statement_kind == FUNCTION_DECLARATION
    assert span_text(source, statement.span) == "function foo(){ return 1; }"


def test_enclosing_statement_inside_loop_body_is_inner_statement():
    source = "for (let i = 0; i < 3; i++) { foo(i); log(i); }"
    ast = parse_source(source)
    locus = find_mentions(ast, "foo")[0]
    statement = enclosing_statement(ast, locus)
    assert span_text(source, statement.span) == "foo(i);"


def test_mention_in_loop_clause_resolves_to_whole_loop():
    source = "for (let i = start(); i < 3; i++) { log(i); }"
    ast = parse_source(source)
    locus = find_mentions(ast, "start")[0]
    statement = enclosing_statement(ast, locus)
    assert statement.statement_kind == FOR_STATEMENT
    assert span_text(source, statement.span) == source


def test_mention_in_if_condition_resolves_to_whole_conditional():
    source = "if (ready()) { go(); }"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "ready")[0])
    assert statement.statement_kind == IF_STATEMENT


def test_mention_in_declarator_init_resolves_to_declaration():
    source = "let total = compute(1) + 2;"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "compute")[0])
    assert statement.statement_kind == VARIABLE_DECLARATION
    assert span_text(source, statement.span) == source


# --- delete_span ---------------------------------------------------------------


def test_delete_only_statement_leaves_valid_empty_program():
    source = "foo();"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "foo")[0])
    new_text, record = delete_span(source, statement.span)
    assert new_text == "\n"
    assert record.removed_text == "foo();"
    assert parse_source(new_text).root.children == []


def test_delete_first_of_two_statements_keeps_other_byte_exact():
    source = "foo();\nbar();"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "foo")[0])
    new_text, _ = delete_span(source, statement.span)
    assert new_text == "\nbar();"


def test_delete_on_shared_line_inserts_placeholder_newline():
    source = "foo(); bar();"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "foo")[0])
    new_text, _ = delete_span(source, statement.span)
    assert new_text == "\n bar();"


def test_delete_statement_with_sole_return_still_parses():
    source = "function f() { return g(); }\nf();"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "g")[0])
    new_text, _ = delete_span(source, statement.span)
    parse_source(new_text)
    assert "return" not in new_text


def test_bytes_outside_span_unchanged():
    source = "aa();\nbb();\ncc();\n"
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "bb")[0])
    new_text, _ = delete_span(source, statement.span)
    start, end = statement.span
    assert new_text.startswith(source[:start])
    assert new_text.endswith(source[end:])


def test_deleting_required_block_reports_reparse_failure():
    source = "if (a) { f(); } else { g(); }"
    ast = parse_source(source)
    # The then-branch block is not in statement position; removing it breaks syntax.
    block = ast.root.children[0].children[1]
    with pytest.raises(ReparseFailure):
        delete_span(source, block.span)


def test_out_of_range_span_rejected():
    with pytest.raises(ValueError):
        delete_span("a();", (2, 99))


# --- iter_statement_nodes -------------------------------------------------------


def test_iter_statement_nodes_covers_nested_blocks():
    source = "function f() { a(); b(); }\nc();"
    ast = parse_source(source)
    kinds = [node.kind for node, _ in iter_statement_nodes(ast.root)]
    assert kinds.count(EXPRESSION_STATEMENT) == 3
    assert FUNCTION_DECLARATION in kinds


def test_scripted_edit_matches_committed_golden():
    from pathlib import Path

    goldens = Path(__file__).parent / "goldens"
    source = (goldens / "edit_input.js").read_text()
    ast = parse_source(source)
    statement = enclosing_statement(ast, find_mentions(ast, "prime")[-1])
    assert span_text(source, statement.span) == "prime(12);"
    new_text, _ = delete_span(source, statement.span)
    assert new_text == (goldens / "edit_expected.js").read_text()


def test_random_programs_statement_deletions_always_reparse():
    import random

    from genprog import gen_program
    from tracetrim.jsparse import PROGRAM

    rng = random.Random(0xD00D)
    checked = 0
    for _ in range(120):
        source = gen_program(rng, statements=rng.randint(1, 5), depth=2)
        ast = parse_source(source)
        for node, path in iter_statement_nodes(ast.root):
            if len(path) != 1:
                continue  # top-level statements only; nested ones shift spans
            new_text, record = delete_span(source, node.span)
            assert record.removed_text == source[node.span[0] : node.span[1]]
            reparsed = parse_source(new_text)
            assert reparsed.root.kind == PROGRAM
            checked += 1
    assert checked > 200
