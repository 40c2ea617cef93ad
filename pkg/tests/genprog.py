"""Random program generator over the supported script grammar.

Used by property tests: anything this produces must parse, print back
byte-identically, re-parse to a structurally equal tree, and keep proper
span nesting. Generation is bottom-up with bounded depth so programs stay
small and readable in failure output.
"""

from __future__ import annotations

import random

_NAMES = ["alpha", "beta", "gamma", "delta", "probe", "item", "total", "flag"]
_BINOPS = ["+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||"]


def _name(rng: random.Random) -> str:
    return rng.choice(_NAMES)


def gen_expression(rng: random.Random, depth: int) -> str:
    if depth <= 0:
        return rng.choice(
            [
                _name(rng),
                str(rng.randint(0, 99)),
                f"{rng.randint(1, 9)}.{rng.randint(0, 9)}",
                "true",
                "false",
                f"'{_name(rng)}'",
            ]
        )
    kind = rng.randrange(10)
    if kind == 0:
        return f"{gen_expression(rng, depth - 1)} {rng.choice(_BINOPS)} {gen_expression(rng, depth - 1)}"
    if kind == 1:
        return f"!{gen_expression(rng, depth - 1)}"
    if kind == 2:
        return f"-{gen_expression(rng, 0)}"
    if kind == 3:
        args = ", ".join(gen_expression(rng, depth - 1) for _ in range(rng.randrange(3)))
        return f"{_name(rng)}({args})"
    if kind == 4:
        return f"{_name(rng)}.{_name(rng)}"
    if kind == 5:
        return f"{_name(rng)}[{gen_expression(rng, depth - 1)}]"
    if kind == 6:
        elements = ", ".join(gen_expression(rng, depth - 1) for _ in range(rng.randrange(4)))
        return f"[{elements}]"
    if kind == 7:
        return f"({gen_expression(rng, depth - 1)})"
    if kind == 8:
        params = ", ".join(dict.fromkeys(_name(rng) for _ in range(rng.randrange(3))))
        if rng.random() < 0.5:
            # parenthesized: arrows only parse at assignment level
            return f"(({params}) => {gen_expression(rng, depth - 1)})"
        body = gen_statement(rng, depth - 1, indent="  ")
        return f"function ({params}) {{\n{body}\n}}"
    # parenthesized: assignment is not a valid binary operand
    return f"({_name(rng)} = {gen_expression(rng, depth - 1)})"


def gen_statement(rng: random.Random, depth: int, indent: str = "") -> str:
    kind = rng.randrange(8) if depth > 0 else rng.randrange(3)
    if kind == 0:
        return f"{indent}{_name(rng)} = {gen_expression(rng, depth)};"
    if kind == 1:
        keyword = rng.choice(["let", "var", "const"])
        return f"{indent}{keyword} {_name(rng)} = {gen_expression(rng, depth)};"
    if kind == 2:
        return f"{indent}{_name(rng)}({gen_expression(rng, max(0, depth - 1))});"
    if kind == 3:
        return (
            f"{indent}if ({gen_expression(rng, depth - 1)}) {{\n"
            f"{gen_statement(rng, depth - 1, indent + '  ')}\n"
            f"{indent}}} else {{\n"
            f"{gen_statement(rng, depth - 1, indent + '  ')}\n"
            f"{indent}}}"
        )
    if kind == 4:
        loop_var = _name(rng)
        return (
            f"{indent}for (let {loop_var} = 0; {loop_var} < {rng.randint(1, 5)}; {loop_var}++) {{\n"
            f"{gen_statement(rng, depth - 1, indent + '  ')}\n"
            f"{indent}}}"
        )
    if kind == 5:
        params = ", ".join(dict.fromkeys(_name(rng) for _ in range(rng.randrange(3))))
        return (
            f"{indent}function {_name(rng)}({params}) {{\n"
            f"{gen_statement(rng, depth - 1, indent + '  ')}\n"
            f"{indent}  return {gen_expression(rng, max(0, depth - 1))};\n"
            f"{indent}}}"
        )
    if kind == 6:
        return (
            f"{indent}{{\n"
            f"{gen_statement(rng, depth - 1, indent + '  ')}\n"
            f"{indent}}}"
        )
    return f"{indent}// note {rng.randint(0, 9)}\n{indent}{_name(rng)}();"


def gen_program(rng: random.Random, statements: int = 5, depth: int = 3) -> str:
    return "\n".join(gen_statement(rng, depth) for _ in range(statements)) + "\n"
