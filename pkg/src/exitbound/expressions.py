"""Tiny arithmetic expression grammar for 1-D coefficient fields.

Supported: numbers, the variable x, + - * / ^ (power, right-associative),
unary minus, parentheses, and the functions exp, sin, cos, sqrt.  Parsed
expressions evaluate vectorized on numpy arrays, so they plug directly into
the scalar-field contract of the model module.
"""

from __future__ import annotations

import numpy as np

from .errors import ExpressionError

_FUNCTIONS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str | float, int]] = []
        self._scan()
        self.index = 0

    def _scan(self):
        text = self.text
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch in "+-*/^()":
                self.tokens.append(("op", ch, i))
                i += 1
                continue
            if ch.isdigit() or ch == ".":
                j = i
                while j < len(text) and (text[j].isdigit() or text[j] in ".eE" or
                                         (text[j] in "+-" and j > i and text[j - 1] in "eE")):
                    j += 1
                try:
                    value = float(text[i:j])
                except ValueError:
                    raise ExpressionError(f"bad number {text[i:j]!r}", i)
                self.tokens.append(("num", value, i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("name", text[i:j], i))
                i = j
                continue
            raise ExpressionError(f"unexpected character {ch!r}", i)

    def peek(self):
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return ("end", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.index += 1
        return tok


def _parse_expr(tz: _Tokenizer):
    node = _parse_term(tz)
    while tz.peek()[:2] in (("op", "+"), ("op", "-")):
        op = tz.next()[1]
        rhs = _parse_term(tz)
        node = (op, node, rhs)
    return node


def _parse_term(tz: _Tokenizer):
    node = _parse_unary(tz)
    while tz.peek()[:2] in (("op", "*"), ("op", "/")):
        op = tz.next()[1]
        rhs = _parse_unary(tz)
        node = (op, node, rhs)
    return node


def _parse_unary(tz: _Tokenizer):
    kind, value, pos = tz.peek()
    if (kind, value) == ("op", "-"):
        tz.next()
        return ("neg", _parse_unary(tz))
    if (kind, value) == ("op", "+"):
        tz.next()
        return _parse_unary(tz)
    return _parse_power(tz)


def _parse_power(tz: _Tokenizer):
    base = _parse_atom(tz)
    if tz.peek()[:2] == ("op", "^"):
        tz.next()
        # right-associative; exponent may carry a unary sign
        exponent = _parse_unary(tz)
        return ("^", base, exponent)
    return base


def _parse_atom(tz: _Tokenizer):
    kind, value, pos = tz.next()
    if kind == "num":
        return ("num", value)
    if kind == "name":
        if value == "x":
            return ("var",)
        if value in _FUNCTIONS:
            nk, nv, npos = tz.next()
            if (nk, nv) != ("op", "("):
                raise ExpressionError(f"expected '(' after {value}", npos)
            arg = _parse_expr(tz)
            ck, cv, cpos = tz.next()
            if (ck, cv) != ("op", ")"):
                raise ExpressionError("expected ')'", cpos)
            return ("call", value, arg)
        raise ExpressionError(f"unknown identifier {value!r}", pos)
    if (kind, value) == ("op", "("):
        node = _parse_expr(tz)
        ck, cv, cpos = tz.next()
        if (ck, cv) != ("op", ")"):
            raise ExpressionError("expected ')'", cpos)
        return node
    raise ExpressionError(f"unexpected token {value!r}", pos)


def _evaluate(node, x: np.ndarray) -> np.ndarray:
    tag = node[0]
    if tag == "num":
        return np.full_like(x, node[1])
    if tag == "var":
        return x
    if tag == "neg":
        return -_evaluate(node[1], x)
    if tag == "call":
        return _FUNCTIONS[node[1]](_evaluate(node[2], x))
    lhs = _evaluate(node[1], x)
    rhs = _evaluate(node[2], x)
    if tag == "+":
        return lhs + rhs
    if tag == "-":
        return lhs - rhs
    if tag == "*":
        return lhs * rhs
    if tag == "/":
        return lhs / rhs
    if tag == "^":
        return lhs ** rhs
    raise ExpressionError(f"corrupt expression node {tag!r}")


def parse_expression(text: str):
    """Compile an expression into a scalar field over (n, 1) point arrays."""
    tz = _Tokenizer(text)
    node = _parse_expr(tz)
    kind, value, pos = tz.peek()
    if kind != "end":
        raise ExpressionError(f"unexpected trailing input {value!r}", pos)

    def field(pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float)[:, 0]
        return np.asarray(_evaluate(node, x), dtype=float)

    return field
