"""Tiny arithmetic grammar for rate functions of a scalar factor u.

Supported: numeric literals, the variable u, + - * / ^, unary minus,
parentheses, exp(...) and log(...).  Compiled callables accept scalars or
numpy arrays.
"""

from __future__ import annotations

import re

import numpy as np


class RateExprError(ValueError):
    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{message} (at offset {pos})"
        super().__init__(message)
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?|([A-Za-z_]\w*)|([()+\-*/^,]))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise RateExprError(f"unexpected character {text[pos]!r}", pos)
        if m.group(1) is not None:
            tokens.append(("num", float(m.group(0)), pos))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), pos))
        else:
            tokens.append(("op", m.group(3), pos))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if kind and tok[0] != kind or value is not None and tok[1] != value:
            raise RateExprError(f"expected {value or kind}, got {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.power()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return ("pow", base, self.power())  # right-associative
        return base

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return ("neg", self.atom())
        if kind == "num":
            self.take()
            return ("num", value)
        if kind == "name":
            self.take()
            if value == "u":
                return ("var",)
            if value in ("exp", "log"):
                self.take("op", "(")
                inner = self.expr()
                self.take("op", ")")
                return (value, inner)
            raise RateExprError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            self.take()
            inner = self.expr()
            self.take("op", ")")
            return inner
        raise RateExprError(f"unexpected token {value!r}", pos)


def _evaluate(node, u):
    op = node[0]
    if op == "num":
        return node[1]
    if op == "var":
        return u
    if op == "neg":
        return -_evaluate(node[1], u)
    if op == "exp":
        return np.exp(_evaluate(node[1], u))
    if op == "log":
        return np.log(_evaluate(node[1], u))
    a, b = _evaluate(node[1], u), _evaluate(node[2], u)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    return np.power(a, b)


def parse_rate_expr(text):
    """Compile an expression in u to a vectorized callable; keeps the source."""
    parser = _Parser(_tokenize(text))
    ast = parser.expr()
    parser.take("end")

    def fn(u):
        return _evaluate(ast, u)

    fn.source = text.strip()
    return fn
