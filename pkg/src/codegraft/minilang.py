"""Tokenizer and structural parser for a small brace-delimited language.

The grammar covers the common shape of C-family sources: brace-delimited
blocks, semicolon-terminated statements, `Type name [= expr];` declarations,
`name = expr;` assignments, `if/for/while (expr) { ... }` control blocks,
`Type name(params) { ... }` functions, and `class Name { ... }` classes.
Anything else degrades to an opaque statement leaf; parsing only fails hard
on unbalanced braces.

The tokenizer is pluggable (see `Tokenizer`) so a real-language lexer can be
swapped in later; only the default one ships.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .errors import ParseError

# Words that can never be identifiers in scope analysis.
KEYWORDS = frozenset({
    "if", "else", "for", "while", "do", "switch", "case", "default",
    "break", "continue", "return", "class", "new", "this", "super",
    "true", "false", "null", "try", "catch", "finally", "throw", "throws",
    "import", "package", "extends", "implements", "instanceof",
})

# Built-in value types, accepted in declaration type position.
PRIMITIVE_TYPES = frozenset({
    "int", "long", "short", "byte", "float", "double", "char", "boolean",
    "void", "var",
})

# Leading declaration modifiers, skipped when matching statement patterns.
MODIFIERS = frozenset({
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "transient", "volatile", "const", "strictfp",
})

CONTROL_KEYWORDS = frozenset({
    "if", "else", "for", "while", "do", "switch", "case", "try", "catch",
    "finally", "synchronized",
})

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^="})


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | "string" | "op"
    text: str
    line: int
    col: int


class Tokenizer(Protocol):
    def tokenize(self, source: str) -> list[Token]: ...


_TOKEN_RE = re.compile(
    r"""
      (?P<comment>//[^\n]*|/\*.*?\*/)
    | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
    | (?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>==|!=|<=|>=|&&|\|\||\+\+|--|\+=|-=|\*=|/=|%=|&=|\|=|\^=|->|::|<<|>>
            |[{}()\[\];,.=<>+\-*/%!&|:?@#$~^\\])
    | (?P<ws>\s+)
    | (?P<other>.)
    """,
    re.VERBOSE | re.DOTALL,
)


class MiniLangTokenizer:
    """Default lexer: strips comments, keeps strings whole, never fails."""

    def tokenize(self, source: str) -> list[Token]:
        tokens: list[Token] = []
        line = 1
        line_start = 0
        for match in _TOKEN_RE.finditer(source):
            kind = match.lastgroup
            text = match.group()
            col = match.start() - line_start + 1
            if kind in ("string", "number", "ident", "op"):
                tokens.append(Token(kind, text, line, col))
            elif kind == "other" and not text.isspace():
                tokens.append(Token("op", text, line, col))
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + text.rfind("\n") + 1
        return tokens


DEFAULT_TOKENIZER = MiniLangTokenizer()


@dataclass(frozen=True)
class SyntaxUnit:
    """One node of the parsed source tree.

    `kind` is "statement", "function_def", "class_def", or "block".
    Containers tile their line span with children; the opening header
    (text up to and including `{`) and the closing `}` appear as implicit
    statement leaves with `role` "header" / "closer", so every token of
    the source belongs to exactly one leaf.
    """

    kind: str
    span: tuple[int, int]
    children: tuple["SyntaxUnit", ...]
    text: str
    name: str | None = None
    role: str = "body"  # statement leaves: "body" | "header" | "closer"
    tokens: tuple[Token, ...] = field(default=(), repr=False)

    def walk(self) -> Iterable["SyntaxUnit"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> Iterable["SyntaxUnit"]:
        return (u for u in self.walk() if u.kind == "statement")

    def containers(self) -> Iterable["SyntaxUnit"]:
        return (u for u in self.walk() if u.kind != "statement")


_OPENERS = {"(": ")", "[": "]"}
_CLOSERS = {")": "(", "]": "["}


class _Frame:
    __slots__ = ("kind", "name", "start_line", "children")

    def __init__(self, kind: str, name: str | None, start_line: int):
        self.kind = kind
        self.name = name
        self.start_line = start_line
        self.children: list[SyntaxUnit] = []


def _span_of(tokens: list[Token]) -> tuple[int, int]:
    return tokens[0].line, tokens[-1].line


def _render(tokens: list[Token], source_lines: list[str]) -> str:
    first, last = _span_of(tokens)
    return "\n".join(source_lines[first - 1 : last])


def _matching_paren(tokens: list[Token], open_index: int) -> int:
    depth = 0
    for i in range(open_index, len(tokens)):
        if tokens[i].text in _OPENERS:
            depth += 1
        elif tokens[i].text in _CLOSERS:
            depth -= 1
            if depth == 0:
                return i
    return -1


def classify_header(tokens: list[Token]) -> tuple[str, str | None]:
    """Decide what a `... {` header opens: class, function, or plain block."""
    idents = [t for t in tokens if t.kind == "ident"]
    for i, tok in enumerate(tokens):
        if tok.kind == "ident" and tok.text == "class":
            for j in range(i + 1, len(tokens)):
                if tokens[j].kind == "ident":
                    return "class_def", tokens[j].text
            return "class_def", None
    # Function shape: the last top-level `name(...)` group closes the header
    # and `name` is not a control keyword; `union(){` counts, `if (x) {` not.
    last = len(tokens) - 1
    while last >= 0 and tokens[last].kind == "ident":
        last -= 1  # tolerate `throws Foo` style trailers
    if last >= 0 and tokens[last].text == ")":
        depth = 0
        open_idx = -1
        for i in range(last, -1, -1):
            if tokens[i].text in _CLOSERS:
                depth += 1
            elif tokens[i].text in _OPENERS:
                depth -= 1
                if depth == 0:
                    open_idx = i
                    break
        if open_idx > 0:
            before = tokens[open_idx - 1]
            if (
                before.kind == "ident"
                and before.text not in CONTROL_KEYWORDS
                and before.text not in KEYWORDS
                and (open_idx < 2 or tokens[open_idx - 2].text != "new")
            ):
                return "function_def", before.text
    if idents and idents[0].text in CONTROL_KEYWORDS:
        return "block", None
    return "block", None


def parse(source: str, tokenizer: Tokenizer | None = None) -> SyntaxUnit:
    """Parse source into a syntax tree rooted at a block unit.

    Raises ParseError (with a line number) only for unbalanced braces.
    """
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    tokens = tokenizer.tokenize(source)
    source_lines = source.split("\n")
    total_lines = max(1, len(source_lines))

    root = _Frame("block", None, 1)
    stack: list[_Frame] = [root]
    open_braces: list[Token] = []
    pending: list[Token] = []
    depth = 0  # paren/bracket nesting inside the pending run

    def flush_statement(role: str = "body") -> None:
        if not pending:
            return
        unit = SyntaxUnit(
            kind="statement",
            span=_span_of(pending),
            children=(),
            text=_render(pending, source_lines),
            role=role,
            tokens=tuple(pending),
        )
        stack[-1].children.append(unit)
        pending.clear()

    for tok in tokens:
        if tok.text == "{" and depth == 0:
            kind, name = classify_header(pending) if pending else ("block", None)
            header_tokens = pending + [tok]
            frame = _Frame(kind, name, header_tokens[0].line)
            header = SyntaxUnit(
                kind="statement",
                span=_span_of(header_tokens),
                children=(),
                text=_render(header_tokens, source_lines),
                role="header",
                tokens=tuple(header_tokens),
            )
            frame.children.append(header)
            stack.append(frame)
            open_braces.append(tok)
            pending.clear()
        elif tok.text == "}" and depth == 0:
            flush_statement()
            if len(stack) == 1:
                raise ParseError("unmatched '}'", tok.line)
            frame = stack.pop()
            open_braces.pop()
            closer = SyntaxUnit(
                kind="statement",
                span=(tok.line, tok.line),
                children=(),
                text="}",
                role="closer",
                tokens=(tok,),
            )
            frame.children.append(closer)
            unit = SyntaxUnit(
                kind=frame.kind,
                span=(frame.start_line, tok.line),
                children=tuple(frame.children),
                text="\n".join(source_lines[frame.start_line - 1 : tok.line]),
                name=frame.name,
            )
            stack[-1].children.append(unit)
        else:
            if tok.text in _OPENERS:
                depth += 1
            elif tok.text in _CLOSERS:
                depth = max(0, depth - 1)
            pending.append(tok)
            if tok.text == ";" and depth == 0:
                flush_statement()

    flush_statement()
    if len(stack) > 1:
        raise ParseError("unclosed '{'", open_braces[-1].line)
    return SyntaxUnit(
        kind="block",
        span=(1, total_lines),
        children=tuple(root.children),
        text=source,
        name=None,
    )


def parse_lenient(source: str, tokenizer: Tokenizer | None = None) -> SyntaxUnit:
    """Parse a possibly partial fragment by balancing braces first.

    Added-code fragments often open or close more braces than they contain;
    missing closers are appended and excess closers wrapped, so free-variable
    analysis still sees the right nesting.
    """
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    tokens = tokenizer.tokenize(source)
    depth = 0
    deficit = 0  # closers seen with nothing open
    for tok in tokens:
        if tok.text == "{":
            depth += 1
        elif tok.text == "}":
            if depth == 0:
                deficit += 1
            else:
                depth -= 1
    balanced = ("{\n" * deficit) + source + ("\n}" * depth)
    return parse(balanced, tokenizer)
