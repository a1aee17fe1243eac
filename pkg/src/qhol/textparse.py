"""Tokenizer and a small arithmetic expression parser.

The same grammar serves scalar text (``(1 - q)/(1 + q^2)``), operator text
(``(1-q*M)*L - (1-q*M)^2``) and the building blocks of the sequence DSL.
Parsing yields a tiny tree of tuples which the callers interpret.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["Token", "ParseError", "tokenize", "parse_arith", "ArithNode"]


class ParseError(ValueError):
    """Syntax error carrying a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'name', 'op', 'end'
    text: str
    pos: int
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|\.\.|\*\*|[-+*/^(),;=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if chunk == "**":
                chunk = "^"
            tokens.append(Token(kind, chunk, pos, line, col))
        for ch in m.group():
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("end", "", pos, line, col))
    return tokens


# Arithmetic trees are plain tuples:
#   ("num", int) | ("name", str) | ("neg", node) | ("add"|"sub"|"mul"|"div", a, b)
#   | ("pow", base, node) | ("call", name, [args])
ArithNode = tuple


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not (self.tok.kind == "op" and self.tok.text == text):
            t = self.tok
            found = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", t.line, t.column)
        return self.take()


def _expr(c: _Cursor) -> ArithNode:
    node = _term(c)
    while c.tok.kind == "op" and c.tok.text in "+-":
        op = "add" if c.take().text == "+" else "sub"
        node = (op, node, _term(c))
    return node


def _term(c: _Cursor) -> ArithNode:
    node = _unary(c)
    while c.tok.kind == "op" and c.tok.text in ("*", "/"):
        op = "mul" if c.take().text == "*" else "div"
        node = (op, node, _unary(c))
    return node


def _unary(c: _Cursor) -> ArithNode:
    if c.accept("-"):
        return ("neg", _unary(c))
    if c.accept("+"):
        return _unary(c)
    return _power(c)


def _power(c: _Cursor) -> ArithNode:
    base = _atom(c)
    if c.accept("^"):
        # right associative; allow a signed exponent such as q^-2
        return ("pow", base, _unary(c))
    return base


def _atom(c: _Cursor) -> ArithNode:
    t = c.tok
    if t.kind == "num":
        c.take()
        return ("num", int(t.text))
    if t.kind == "name":
        c.take()
        if c.accept("("):
            args = [_expr(c)]
            while c.accept(","):
                args.append(_expr(c))
            c.expect(")")
            return ("call", t.text, args)
        return ("name", t.text)
    if c.accept("("):
        node = _expr(c)
        c.expect(")")
        return node
    found = t.text or "end of input"
    raise ParseError(f"unexpected {found!r}", t.line, t.column)


def parse_arith(text: str) -> ArithNode:
    """Parse ``text`` with the usual precedence of ``+ - * / ^``."""
    c = _Cursor(tokenize(text))
    node = _expr(c)
    if c.tok.kind != "end":
        t = c.tok
        raise ParseError(f"trailing input {t.text!r}", t.line, t.column)
    return node


def int_exponent(node: ArithNode) -> int:
    """Read an exponent subtree that must be an integer literal."""
    if node[0] == "num":
        return node[1]
    if node[0] == "neg":
        return -int_exponent(node[1])
    raise ParseError("exponent must be an integer literal")
