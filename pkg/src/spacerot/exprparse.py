"""Recursive-descent parser for the rotation-expression language.

    Expr   := Term ('+' Term)*
    Term   := Factor ('*' Factor)*
    Factor := axis '(' signed-real ')' | '(' Expr ')'
    axis   := 'x' | 'y' | 'z' | 'u' '(' real ',' real ',' real ')'

Whitespace is insignificant.  The signed real of a factor is the frequency
and its sign the rotation sense.  Offsets in errors count bytes of the
UTF-8 encoded source.
"""

from __future__ import annotations

import re

from .errors import ExprSyntaxError, InvalidAxisError
from .rotation import Axis, RotationExpr, Product, Sum, asr

_REAL = re.compile(rb"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_WS = b" \t\r\n"


class _Parser:
    def __init__(self, src: bytes):
        self.src = src
        self.pos = 0

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos] in _WS:
            self.pos += 1

    def peek(self) -> bytes:
        self.skip()
        return self.src[self.pos:self.pos + 1]

    def fail(self, message, expected):
        raise ExprSyntaxError(message, self.pos, expected)

    def found(self) -> str:
        if not self.peek():
            return "end of input"
        return repr(self.src[self.pos:self.pos + 4].decode("utf-8", "replace")[0])

    def expect(self, ch: bytes):
        if self.peek() != ch:
            self.fail(f"unexpected {self.found()}", {repr(ch.decode())})
        self.pos += 1

    def real(self) -> float:
        self.skip()
        m = _REAL.match(self.src, self.pos)
        if not m:
            self.fail(f"unexpected {self.found()}", {"number"})
        self.pos = m.end()
        return float(m.group(0))

    def expr(self) -> RotationExpr:
        terms = [self.term()]
        while self.peek() == b"+":
            self.pos += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> RotationExpr:
        factors = [self.factor()]
        while self.peek() == b"*":
            self.pos += 1
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> RotationExpr:
        ch = self.peek()
        if ch == b"(":
            self.pos += 1
            inner = self.expr()
            self.expect(b")")
            return inner
        if ch in (b"x", b"y", b"z"):
            self.pos += 1
            axis = Axis.of(ch.decode())
        elif ch == b"u":
            start = self.pos
            self.pos += 1
            self.expect(b"(")
            comps = [self.real()]
            for _ in range(2):
                self.expect(b",")
                comps.append(self.real())
            self.expect(b")")
            try:
                axis = Axis.of(comps)
            except InvalidAxisError as exc:
                raise InvalidAxisError(f"{exc} at offset {start}") from None
        else:
            self.fail(f"unexpected {self.found()}", {"'x'", "'y'", "'z'", "'u'", "'('"})
        self.expect(b"(")
        w = self.real()
        self.expect(b")")
        return asr(axis, w)


def parse_expr(text: str) -> RotationExpr:
    """Parse ``text`` into a Leaf, Product or Sum.

    '*' binds tighter than '+'; factor order is kept.  Raises
    :class:`ExprSyntaxError` with a byte offset and the expected tokens, or
    :class:`InvalidAxisError` for a non-unit ``u`` axis.
    """
    src = text.encode("utf-8")
    p = _Parser(src)
    if not p.peek():
        raise ExprSyntaxError("empty input", p.pos, {"'x'", "'y'", "'z'", "'u'", "'('"})
    expr = p.expr()
    if p.peek():
        p.fail(f"unexpected {p.found()}", {"'+'", "'*'", "end of input"})
    return expr
