"""Parser for the script-language subset the mutation operators work on.

The grammar covers what generated page scripts in the fixture corpus use:
variable declarations (let/var/const), function declarations, expression
statements, three-clause for loops, if/else, return, and blocks; expressions
include identifiers, number/string/boolean literals, array literals, member
access (dot and computed), calls, assignment, the usual binary and unary
operators, postfix ++, function expressions, and arrow functions.

Every node carries an exact byte span into the original text, so printing is
a span splice: unedited regions stay byte-identical. Comments are trivia
attached to the node that follows them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ScriptSyntaxError

# Node kinds.
PROGRAM = "Program"
EXPRESSION_STATEMENT = "ExpressionStatement"
VARIABLE_DECLARATION = "VariableDeclaration"
VAR_DECLARATOR = "VarDeclarator"
FUNCTION_DECLARATION = "FunctionDeclaration"
RETURN_STATEMENT = "ReturnStatement"
IF_STATEMENT = "IfStatement"
FOR_STATEMENT = "ForStatement"
BLOCK = "Block"
IDENTIFIER = "Identifier"
NUMBER_LITERAL = "NumberLiteral"
STRING_LITERAL = "StringLiteral"
BOOLEAN_LITERAL = "BooleanLiteral"
ARRAY_LITERAL = "ArrayLiteral"
MEMBER = "Member"
CALL = "Call"
ASSIGNMENT = "Assignment"
BINARY = "Binary"
UNARY = "Unary"
UPDATE = "Update"
FUNCTION_EXPRESSION = "FunctionExpression"
ARROW_FUNCTION = "ArrowFunction"
PAREN = "Paren"

# Kinds that can stand in statement position (direct child of Program/Block).
STATEMENT_KINDS = frozenset(
    {
        EXPRESSION_STATEMENT,
        VARIABLE_DECLARATION,
        FUNCTION_DECLARATION,
        RETURN_STATEMENT,
        IF_STATEMENT,
        FOR_STATEMENT,
        BLOCK,
    }
)

KEYWORDS = frozenset(
    {"let", "var", "const", "function", "return", "if", "else", "for", "true", "false"}
)
# Real ECMAScript reserved words minus the subset's own keywords; these lex
# as plain identifiers but may not be used as names.
RESERVED = frozenset(
    {
        "await", "break", "case", "catch", "class", "continue", "debugger",
        "default", "delete", "do", "enum", "export", "extends", "finally",
        "import", "in", "instanceof", "new", "null", "super", "switch",
        "this", "throw", "try", "typeof", "void", "while", "with", "yield",
    }
)

_PUNCTUATORS = (
    "=>", "++", "==", "!=", "<=", ">=", "&&", "||",
    "(", ")", "{", "}", "[", "]", ";", ",", ".", "=", "<", ">",
    "+", "-", "*", "/", "%", "!",
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "0": "\0"}


class Node:
    """One AST node: a kind, a byte span, ordered children, and a value.

    ``value`` holds the identifier name, literal value, operator text, or
    declaration keyword, depending on the kind.
    """

    __slots__ = ("kind", "start", "end", "children", "value", "leading_comments")

    def __init__(self, kind, start, end, children=(), value=None, leading_comments=()):
        self.kind: str = kind
        self.start: int = start
        self.end: int = end
        self.children: list[Node] = list(children)
        self.value = value
        self.leading_comments: tuple[str, ...] = tuple(leading_comments)

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def __repr__(self):
        value = f" {self.value!r}" if self.value is not None else ""
        return f"<{self.kind}{value} [{self.start}:{self.end}]>"


@dataclass(frozen=True)
class Ast:
    """A parse result: the original text plus its root Program node."""
    text: str
    root: Node


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # ident | keyword | num | str | punct | eof
    text: str
    start: int
    end: int
    line: int
    column: int
    comments: tuple[str, ...]


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_" or ch == "$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or ch == "$"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pending_comments: list[str] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)

    def error(message: str, at: int, expected: str = ""):
        return ScriptSyntaxError(message, line, at - line_start + 1, expected)

    def emit(kind: str, start: int, end: int, value_text: str | None = None):
        nonlocal pending_comments
        tokens.append(
            Token(
                kind=kind,
                text=value_text if value_text is not None else text[start:end],
                start=start,
                end=end,
                line=line,
                column=start - line_start + 1,
                comments=tuple(pending_comments),
            )
        )
        pending_comments = []

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            end = text.find("\n", i)
            end = n if end == -1 else end
            pending_comments.append(text[i:end])
            i = end
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "*":
            end = text.find("*/", i + 2)
            if end == -1:
                raise error("unterminated block comment", i, expected="*/")
            pending_comments.append(text[i : end + 2])
            for _ in range(text.count("\n", i, end + 2)):
                line += 1
            nl = text.rfind("\n", i, end + 2)
            if nl != -1:
                line_start = nl + 1
            i = end + 2
            continue
        if _is_ident_start(ch):
            start = i
            while i < n and _is_ident_part(text[i]):
                i += 1
            word = text[start:i]
            emit("keyword" if word in KEYWORDS else "ident", start, i)
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            emit("num", start, i)
            continue
        if ch in "'\"":
            quote = ch
            start = i
            i += 1
            value_chars: list[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise error("unterminated string literal", start, expected=quote)
                current = text[i]
                if current == quote:
                    i += 1
                    break
                if current == "\\":
                    if i + 1 >= n:
                        raise error("unterminated string literal", start, expected=quote)
                    escape = text[i + 1]
                    if escape not in _ESCAPES:
                        raise error(f"unsupported escape \\{escape}", i)
                    value_chars.append(_ESCAPES[escape])
                    i += 2
                    continue
                value_chars.append(current)
                i += 1
            emit("str", start, i, value_text="".join(value_chars))
            continue
        matched = False
        for punct in _PUNCTUATORS:
            if text.startswith(punct, i):
                emit("punct", i, i + len(punct))
                i += len(punct)
                matched = True
                break
        if not matched:
            raise error(f"unexpected character {ch!r}", i)

    tokens.append(Token("eof", "", n, n, line, n - line_start + 1, tuple(pending_comments)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers --------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def at_punct(self, text: str, offset: int = 0) -> bool:
        token = self.peek(offset)
        return token.kind == "punct" and token.text == text

    def at_keyword(self, word: str, offset: int = 0) -> bool:
        token = self.peek(offset)
        return token.kind == "keyword" and token.text == word

    def error(self, message: str, token: Token | None = None, expected: str = ""):
        token = token or self.peek()
        found = token.text or "end of input"
        raise ScriptSyntaxError(
            f"{message} (found {found!r})", token.line, token.column, expected
        )

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            self.error(f"expected {text!r}", expected=text)
        return self.advance()

    def expect_ident(self) -> Token:
        token = self.peek()
        if token.kind == "ident" and token.text in RESERVED:
            self.error(f"reserved word {token.text!r} is outside the supported subset")
        if token.kind != "ident":
            self.error("expected identifier", expected="identifier")
        return self.advance()

    # -- program --------------------------------------------------------------

    def parse_program(self) -> Node:
        statements = []
        while self.peek().kind != "eof":
            statements.append(self.parse_statement())
        return Node(PROGRAM, 0, len(self.text), statements)

    # -- statements ------------------------------------------------------------

    def parse_statement(self) -> Node:
        token = self.peek()
        if token.kind == "punct" and token.text == "{":
            return self.parse_block()
        if token.kind == "keyword":
            if token.text in ("let", "var", "const"):
                return self.parse_var_declaration(require_semicolon=True)
            if token.text == "function":
                return self.parse_function(declaration=True)
            if token.text == "return":
                return self.parse_return()
            if token.text == "if":
                return self.parse_if()
            if token.text == "for":
                return self.parse_for()
        if token.kind == "ident" and token.text in RESERVED:
            self.error(f"reserved word {token.text!r} is outside the supported subset")
        start_token = token
        expression = self.parse_expression()
        semi = self.expect_punct(";")
        return Node(
            EXPRESSION_STATEMENT,
            start_token.start,
            semi.end,
            [expression],
            leading_comments=start_token.comments,
        )

    def parse_block(self) -> Node:
        open_token = self.expect_punct("{")
        statements = []
        while not self.at_punct("}"):
            if self.peek().kind == "eof":
                self.error("unterminated block", expected="}")
            statements.append(self.parse_statement())
        close_token = self.advance()
        return Node(
            BLOCK,
            open_token.start,
            close_token.end,
            statements,
            leading_comments=open_token.comments,
        )

    def parse_var_declaration(self, require_semicolon: bool) -> Node:
        keyword = self.advance()
        declarators = [self.parse_declarator()]
        while self.at_punct(","):
            self.advance()
            declarators.append(self.parse_declarator())
        end = declarators[-1].end
        if require_semicolon:
            end = self.expect_punct(";").end
        return Node(
            VARIABLE_DECLARATION,
            keyword.start,
            end,
            declarators,
            value=keyword.text,
            leading_comments=keyword.comments,
        )

    def parse_declarator(self) -> Node:
        name_token = self.expect_ident()
        name = Node(IDENTIFIER, name_token.start, name_token.end, value=name_token.text,
                    leading_comments=name_token.comments)
        children = [name]
        end = name_token.end
        if self.at_punct("="):
            self.advance()
            init = self.parse_assignment_expression()
            children.append(init)
            end = init.end
        return Node(VAR_DECLARATOR, name_token.start, end, children)

    def parse_function(self, declaration: bool) -> Node:
        keyword = self.advance()
        name_node = None
        if declaration or self.peek().kind == "ident":
            name_token = self.expect_ident()
            name_node = Node(
                IDENTIFIER, name_token.start, name_token.end, value=name_token.text
            )
        params = self.parse_params()
        body = self.parse_block()
        children = ([name_node] if name_node else []) + params + [body]
        return Node(
            FUNCTION_DECLARATION if declaration else FUNCTION_EXPRESSION,
            keyword.start,
            body.end,
            children,
            value=name_node.value if name_node else None,
            leading_comments=keyword.comments,
        )

    def parse_params(self) -> list[Node]:
        self.expect_punct("(")
        params = []
        if not self.at_punct(")"):
            while True:
                token = self.expect_ident()
                params.append(
                    Node(IDENTIFIER, token.start, token.end, value=token.text)
                )
                if self.at_punct(","):
                    self.advance()
                    continue
                break
        self.expect_punct(")")
        return params

    def parse_return(self) -> Node:
        keyword = self.advance()
        children = []
        if not self.at_punct(";"):
            children.append(self.parse_expression())
        semi = self.expect_punct(";")
        return Node(
            RETURN_STATEMENT,
            keyword.start,
            semi.end,
            children,
            leading_comments=keyword.comments,
        )

    def parse_if(self) -> Node:
        keyword = self.advance()
        self.expect_punct("(")
        condition = self.parse_expression()
        self.expect_punct(")")
        consequent = self.parse_statement()
        children = [condition, consequent]
        end = consequent.end
        if self.at_keyword("else"):
            self.advance()
            alternate = self.parse_statement()
            children.append(alternate)
            end = alternate.end
        return Node(
            IF_STATEMENT, keyword.start, end, children, leading_comments=keyword.comments
        )

    def parse_for(self) -> Node:
        keyword = self.advance()
        self.expect_punct("(")
        if self.at_keyword("let") or self.at_keyword("var") or self.at_keyword("const"):
            init = self.parse_var_declaration(require_semicolon=False)
        else:
            init = self.parse_expression()
        self.expect_punct(";")
        condition = self.parse_expression()
        self.expect_punct(";")
        update = self.parse_expression()
        self.expect_punct(")")
        body = self.parse_statement()
        return Node(
            FOR_STATEMENT,
            keyword.start,
            body.end,
            [init, condition, update, body],
            leading_comments=keyword.comments,
        )

    # -- expressions -----------------------------------------------------------

    def parse_expression(self) -> Node:
        return self.parse_assignment_expression()

    def _arrow_after_parens(self) -> bool:
        # At "(", decide whether the matching ")" is followed by "=>".
        depth = 0
        offset = 0
        while True:
            token = self.peek(offset)
            if token.kind == "eof":
                return False
            if token.kind == "punct":
                if token.text == "(":
                    depth += 1
                elif token.text == ")":
                    depth -= 1
                    if depth == 0:
                        after = self.peek(offset + 1)
                        return after.kind == "punct" and after.text == "=>"
            offset += 1

    def parse_assignment_expression(self) -> Node:
        token = self.peek()
        if token.kind == "ident" and self.at_punct("=>", offset=1):
            return self.parse_arrow([self._param_from_token(self.advance())], token)
        if token.kind == "punct" and token.text == "(" and self._arrow_after_parens():
            self.advance()
            params = []
            if not self.at_punct(")"):
                while True:
                    params.append(self._param_from_token(self.expect_ident()))
                    if self.at_punct(","):
                        self.advance()
                        continue
                    break
            self.expect_punct(")")
            return self.parse_arrow(params, token)
        left = self.parse_logical_or()
        if self.at_punct("="):
            if left.kind not in (IDENTIFIER, MEMBER):
                self.error("invalid assignment target")
            self.advance()
            right = self.parse_assignment_expression()
            return Node(
                ASSIGNMENT, left.start, right.end, [left, right], value="=",
                leading_comments=left.leading_comments,
            )
        return left

    def _param_from_token(self, token: Token) -> Node:
        return Node(IDENTIFIER, token.start, token.end, value=token.text)

    def parse_arrow(self, params: list[Node], start_token: Token) -> Node:
        self.expect_punct("=>")
        if self.at_punct("{"):
            body = self.parse_block()
        else:
            body = self.parse_assignment_expression()
        return Node(
            ARROW_FUNCTION,
            start_token.start,
            body.end,
            params + [body],
            leading_comments=start_token.comments,
        )

    def _parse_binary_level(self, operators: tuple[str, ...], next_level) -> Node:
        left = next_level()
        while True:
            token = self.peek()
            if token.kind == "punct" and token.text in operators:
                self.advance()
                right = next_level()
                left = Node(
                    BINARY, left.start, right.end, [left, right], value=token.text,
                    leading_comments=left.leading_comments,
                )
            else:
                return left

    def parse_logical_or(self) -> Node:
        return self._parse_binary_level(("||",), self.parse_logical_and)

    def parse_logical_and(self) -> Node:
        return self._parse_binary_level(("&&",), self.parse_equality)

    def parse_equality(self) -> Node:
        return self._parse_binary_level(("==", "!="), self.parse_relational)

    def parse_relational(self) -> Node:
        return self._parse_binary_level(("<", "<=", ">", ">="), self.parse_additive)

    def parse_additive(self) -> Node:
        return self._parse_binary_level(("+", "-"), self.parse_multiplicative)

    def parse_multiplicative(self) -> Node:
        return self._parse_binary_level(("*", "/", "%"), self.parse_unary)

    def parse_unary(self) -> Node:
        token = self.peek()
        if token.kind == "punct" and token.text in ("!", "-"):
            self.advance()
            operand = self.parse_unary()
            return Node(
                UNARY, token.start, operand.end, [operand], value=token.text,
                leading_comments=token.comments,
            )
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while True:
            if self.at_punct("."):
                self.advance()
                prop_token = self.expect_ident()
                prop = Node(
                    IDENTIFIER, prop_token.start, prop_token.end, value=prop_token.text
                )
                node = Node(MEMBER, node.start, prop.end, [node, prop], value=".",
                            leading_comments=node.leading_comments)
            elif self.at_punct("["):
                self.advance()
                index = self.parse_expression()
                close = self.expect_punct("]")
                node = Node(MEMBER, node.start, close.end, [node, index], value="[]",
                            leading_comments=node.leading_comments)
            elif self.at_punct("("):
                self.advance()
                args = []
                if not self.at_punct(")"):
                    while True:
                        args.append(self.parse_assignment_expression())
                        if self.at_punct(","):
                            self.advance()
                            continue
                        break
                close = self.expect_punct(")")
                node = Node(CALL, node.start, close.end, [node] + args,
                            leading_comments=node.leading_comments)
            elif self.at_punct("++"):
                if node.kind not in (IDENTIFIER, MEMBER):
                    self.error("invalid increment target")
                plus = self.advance()
                node = Node(UPDATE, node.start, plus.end, [node], value="++",
                            leading_comments=node.leading_comments)
            else:
                return node

    def parse_primary(self) -> Node:
        token = self.peek()
        if token.kind == "ident":
            if token.text in RESERVED:
                self.error(f"reserved word {token.text!r} is outside the supported subset")
            self.advance()
            return Node(IDENTIFIER, token.start, token.end, value=token.text,
                        leading_comments=token.comments)
        if token.kind == "num":
            self.advance()
            return Node(NUMBER_LITERAL, token.start, token.end, value=float(token.text),
                        leading_comments=token.comments)
        if token.kind == "str":
            self.advance()
            return Node(STRING_LITERAL, token.start, token.end, value=token.text,
                        leading_comments=token.comments)
        if token.kind == "keyword":
            if token.text in ("true", "false"):
                self.advance()
                return Node(
                    BOOLEAN_LITERAL, token.start, token.end, value=(token.text == "true"),
                    leading_comments=token.comments,
                )
            if token.text == "function":
                return self.parse_function(declaration=False)
            self.error(f"unexpected keyword {token.text!r}")
        if token.kind == "punct":
            if token.text == "(":
                self.advance()
                inner = self.parse_expression()
                close = self.expect_punct(")")
                return Node(PAREN, token.start, close.end, [inner],
                            leading_comments=token.comments)
            if token.text == "[":
                self.advance()
                elements = []
                if not self.at_punct("]"):
                    while True:
                        elements.append(self.parse_assignment_expression())
                        if self.at_punct(","):
                            self.advance()
                            continue
                        break
                close = self.expect_punct("]")
                return Node(ARRAY_LITERAL, token.start, close.end, elements,
                            leading_comments=token.comments)
        self.error("expected expression")


def parse_source(text: str) -> Ast:
    """Parse source text to an Ast; raises ScriptSyntaxError outside the subset."""
    parser = _Parser(text)
    root = parser.parse_program()
    return Ast(text=text, root=root)


def parse_expression(text: str) -> Node:
    """Parse a standalone expression (used by span-soundness checks)."""
    parser = _Parser(text)
    node = parser.parse_expression()
    if parser.peek().kind != "eof":
        parser.error("trailing input after expression")
    return node


def print_source(ast: Ast) -> str:
    """Print an Ast back to source: a pure span splice of the original text."""
    return ast.text


def structurally_equal(a: Node, b: Node) -> bool:
    """Structural tree equality: kind, value, and children; spans ignored."""
    if a.kind != b.kind or a.value != b.value or len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


def iter_nodes(root: Node):
    """Yield (node, path) pairs depth-first; path is child indices from root."""
    stack: list[tuple[Node, tuple[int, ...]]] = [(root, ())]
    while stack:
        node, path = stack.pop()
        yield node, path
        for index in range(len(node.children) - 1, -1, -1):
            stack.append((node.children[index], path + (index,)))
