"""Arithmetic expressions in x and y for configuration files.

Grammar (standard precedence, ``^`` right-associative, no implicit
multiplication)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "sqrt": np.sqrt,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = ("x", "y")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class ExpressionDomainError(ArithmeticError):
    pass


# ---------------------------------------------------------------- AST nodes

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ExpressionSyntaxError(msg, tok[2], self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        return self.take()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            return Unary(tok[1], self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, val = tok[0], tok[1]
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                self.fail(f"unknown function {val!r}", tok)
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            if val in VARIABLES:
                return Var(val)
            self.fail(f"unknown name {val!r}", tok)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {val or 'end of input'!r}", tok)


def _variables(node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Unary, Call)):
        return _variables(node.arg)
    return _variables(node.left) | _variables(node.right)


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Unary):
        v = _eval(node.arg, env)
        return -v if node.op == "-" else v
    if isinstance(node, Call):
        v = _eval(node.arg, env)
        if node.func == "sqrt" and np.any(np.asarray(v) < 0):
            raise ExpressionDomainError("sqrt of a negative number")
        return FUNCTIONS[node.func](v)
    a, b = _eval(node.left, env), _eval(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(np.asarray(b) == 0):
            raise ExpressionDomainError("division by zero")
        return a / b
    base = np.asarray(a, dtype=float)
    expo = np.asarray(b, dtype=float)
    if np.any((base < 0) & (expo != np.round(expo))):
        raise ExpressionDomainError("negative base with a non-integer exponent")
    if np.any((base == 0) & (expo < 0)):
        raise ExpressionDomainError("zero raised to a negative power")
    return np.power(base, expo)


@dataclass(frozen=True)
class Expression:
    """Parsed expression; equality compares syntax trees."""

    tree: object
    source: str = field(default="", compare=False)

    @property
    def variables(self) -> set:
        return _variables(self.tree)

    def __call__(self, x=0.0, y=0.0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(_eval(self.tree, {"x": x, "y": y}), dtype=float)
        shape = np.broadcast(x, y).shape
        out = np.broadcast_to(out, shape).copy() if out.shape != shape else out
        if not np.all(np.isfinite(out)):
            raise ExpressionDomainError(f"non-finite value of {self.source!r}")
        return out if out.ndim else float(out)

    def of_y(self):
        """Callable of y alone (for boundary data)."""
        return _OfY(self)

    def __str__(self):
        return self.source


class _OfY:
    def __init__(self, expr: Expression):
        self.expr = expr

    def __call__(self, y):
        return self.expr(0.0, y)


def parse_expression(text: str) -> Expression:
    return Expression(_Parser(text).parse(), text.strip())
