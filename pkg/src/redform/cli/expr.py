"""Recursive-descent parser for rational-function expressions.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?          # right associative, integer exponent
    atom   := INT | VAR | '(' expr ')'

so ``^`` binds tighter than unary minus, which binds tighter than ``* /``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..exactfield import RatFunc, format_ratfunc

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class ExprError(ValueError):
    """Syntax or evaluation error, positioned at ``line``/``column`` (1-based)."""

    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{line}:{column}: {message}")
        self.line, self.column, self.message = line, column, message


# AST nodes -----------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int
    pos: int


@dataclass(frozen=True)
class Var:
    name: str
    pos: int


@dataclass(frozen=True)
class Neg:
    arg: object
    pos: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int


@dataclass(frozen=True)
class _Tok:
    kind: str  # "int", "name", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            toks.append(_Tok("int", m.group(1), m.start(1)))
        elif m.group(2):
            toks.append(_Tok("name", m.group(2), m.start(2)))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ExprError(f"unexpected character {ch!r}", text, m.start(3))
            toks.append(_Tok("op", ch, m.start(3)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, variable: str):
        self.text = text
        self.variable = variable
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _eat(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return ExprError(msg, self.text, tok.pos)

    def parse(self):
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            tok = self.tok
            self.i += 1
            node = BinOp(tok.text, node, self.term(), tok.pos)
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            tok = self.tok
            self.i += 1
            node = BinOp(tok.text, node, self.unary(), tok.pos)
        return node

    def unary(self):
        tok = self.tok
        if self._eat("-"):
            return Neg(self.unary(), tok.pos)
        if self._eat("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.tok
        if self._eat("^"):
            return BinOp("^", base, self.unary(), tok.pos)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Num(int(tok.text), tok.pos)
        if tok.kind == "name":
            if tok.text != self.variable:
                raise self.error(f"unknown identifier {tok.text!r} (variable is {self.variable!r})")
            self.i += 1
            return Var(tok.text, tok.pos)
        if self._eat("("):
            node = self.expr()
            if not self._eat(")"):
                raise self.error("expected ')'")
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected {tok.text!r}")


def parse_ast(text: str, variable: str = "x"):
    return _Parser(text, variable).parse()


def evaluate(node, text: str = "") -> RatFunc:
    if isinstance(node, Num):
        return RatFunc(node.value)
    if isinstance(node, Var):
        return RatFunc.x()
    if isinstance(node, Neg):
        return -evaluate(node.arg, text)
    left = evaluate(node.left, text)
    right = evaluate(node.right, text)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if not right:
            raise ExprError("division by zero", text, node.pos)
        return left / right
    # "^"
    if not right.is_constant() or right.constant_value().denominator != 1:
        raise ExprError("exponent must be an integer constant", text, node.pos)
    n = int(right.constant_value())
    if n < 0 and not left:
        raise ExprError("zero raised to a negative power", text, node.pos)
    return left**n


def parse_expression(text: str, variable: str = "x") -> RatFunc:
    """Parse ``text`` and evaluate it to a canonical rational function."""
    return evaluate(parse_ast(text, variable), text)


def parse_rational(text: str) -> Fraction:
    f = parse_expression(str(text))
    if not f.is_constant():
        raise ExprError("expected a constant", str(text), 0)
    return f.constant_value()


def to_text(f: RatFunc, variable: str = "x") -> str:
    return format_ratfunc(f, variable)
