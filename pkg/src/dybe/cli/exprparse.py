"""Parser for coefficient expressions.

Grammar (standard precedence, ``^`` binds tightest and takes an integer)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := NUMBER | 'l' INT | '(' expr ')'
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..exact import Const, ScalarExpr, var
from ..exact.errors import DivisionByZero

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|(l\d+)|(.))")


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, column: int, text: str):
        super().__init__(f"column {column}: {msg}")
        self.column = column
        self.text = text
        self.msg = msg


def _tokens(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.end() == pos or (m.group(0).strip() == "" and m.end() == len(text)):
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1):
            out.append(("num", m.group(1), start))
        elif m.group(2):
            out.append(("var", m.group(2), start))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ExprSyntaxError(f"unexpected character {ch!r}", start + 1, text)
            out.append(("op", ch, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, nvars: int | None):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0
        self.nvars = nvars

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, tok[2] + 1, self.text)

    def expr(self) -> ScalarExpr:
        out = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> ScalarExpr:
        out = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()
            rhs = self.unary()
            if op[1] == "*":
                out = out * rhs
            else:
                try:
                    out = out / rhs
                except (DivisionByZero, ZeroDivisionError):
                    self.fail("division by zero", op)
        return out

    def unary(self) -> ScalarExpr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> ScalarExpr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            op = self.take()
            neg = False
            if self.peek()[:2] == ("op", "-"):
                self.take()
                neg = True
            tok = self.peek()
            if tok[0] != "num" or "." in tok[1]:
                self.fail("exponent must be an integer")
            self.take()
            k = int(tok[1])
            try:
                return base ** (-k if neg else k)
            except (DivisionByZero, ZeroDivisionError):
                self.fail("zero raised to a negative power", op)
        return base

    def atom(self) -> ScalarExpr:
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Const(Fraction(tok[1]))
        if tok[0] == "var":
            self.take()
            idx = int(tok[1][1:])
            if idx < 1 or (self.nvars is not None and idx > self.nvars):
                bound = f"l1..l{self.nvars}" if self.nvars else "no coordinates"
                self.fail(f"unknown coordinate {tok[1]} (available: {bound})", tok)
            return var(idx - 1)
        if tok[:2] == ("op", "("):
            self.take()
            inner = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.take()
            return inner
        if tok[0] == "end":
            self.fail("unexpected end of expression")
        self.fail(f"unexpected {tok[1]!r}")


def parse_expr(text: str, nvars: int | None = None) -> ScalarExpr:
    """Parse ``text``; ``nvars`` bounds the coordinate names ``l1..l<nvars>``."""
    p = _Parser(text, nvars)
    if p.peek()[0] == "end":
        p.fail("empty expression")
    out = p.expr()
    if p.peek()[0] != "end":
        p.fail(f"unexpected {p.peek()[1]!r}")
    return out


def format_expr(e: ScalarExpr) -> str:
    """Canonical printing through the normal form (parseable by :func:`parse_expr`)."""
    from ..exact import from_ratfunc

    return str(from_ratfunc(e.normal_form()))
