"""Scalar expression language for manifold specifications.

Grammar (``^`` binds tightest and is right-associative, unary minus sits
between ``^`` and ``* /``)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | NAME '(' expr ')' | NAME | '(' expr ')'

Names are ``pi``, ``e``, the coordinates ``x0 .. x{n-1}``, or coordinate
aliases supplied at bind time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DomainError, ExprSyntaxError, ExpressionError, JetDivisionByZero

FUNCTION_NAMES = frozenset(jets.FUNCTIONS)
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    index: int
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    """Identifier not yet resolved to a coordinate (see :func:`bind`)."""

    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    offset: int = field(default=0, compare=False)


_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")
_VAR = re.compile(r"x(\d+)$")


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text=text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, off = self.peek()
        if v != value or kind != "op":
            raise ExprSyntaxError(f"unexpected {v or 'end of input'!r}", off, expected=repr(value), text=self.text)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, v, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", off, expected="operator or end of input", text=self.text)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, off = self.advance()
            node = BinOp(op, node, self.term(), off)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, off = self.advance()
            node = BinOp(op, node, self.unary(), off)
        return node

    def unary(self):
        kind, v, off = self.peek()
        if kind == "op" and v == "-":
            self.advance()
            return Neg(self.unary(), off)
        if kind == "op" and v == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, v, off = self.peek()
        if kind == "op" and v == "^":
            self.advance()
            return BinOp("^", base, self.unary(), off)
        return base

    def atom(self):
        kind, v, off = self.advance()
        if kind == "num":
            return Num(float(v), off)
        if kind == "name":
            if v in FUNCTION_NAMES:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(v, arg, off)
            if v in CONSTANTS:
                return Const(v, off)
            m = _VAR.match(v)
            if m:
                return Var(int(m.group(1)), off)
            return Name(v, off)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {v or 'end of input'!r}", off, expected="number, name or '('", text=self.text)


def parse(text):
    """Parse ``text`` into an AST; raises :class:`ExprSyntaxError` with a byte offset."""
    return _Parser(text).parse()


def bind(node, dim, names=()):
    """Resolve coordinate aliases and check every variable index is ``< dim``."""
    lookup = {n: i for i, n in enumerate(names)}

    def walk(n):
        if isinstance(n, Var):
            if n.index >= dim:
                raise ExpressionError(f"variable x{n.index} out of range for dim {dim}", n, n.offset)
            return n
        if isinstance(n, Name):
            if n.name not in lookup:
                raise ExpressionError(f"unknown name {n.name!r}", n, n.offset)
            return Var(lookup[n.name], n.offset)
        if isinstance(n, Neg):
            return Neg(walk(n.operand), n.offset)
        if isinstance(n, BinOp):
            return BinOp(n.op, walk(n.left), walk(n.right), n.offset)
        if isinstance(n, Call):
            return Call(n.func, walk(n.arg), n.offset)
        return n

    return walk(node)


def compile_expr(text, dim, names=()):
    return bind(parse(text), dim, names)


def is_constant(node):
    if isinstance(node, (Num, Const)):
        return True
    if isinstance(node, (Var, Name)):
        return False
    if isinstance(node, Neg):
        return is_constant(node.operand)
    if isinstance(node, BinOp):
        return is_constant(node.left) and is_constant(node.right)
    if isinstance(node, Call):
        return is_constant(node.arg)
    raise TypeError(node)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_text(node):
    """Print an AST back to source; ``parse(to_text(parse(s))) == parse(s)``."""

    def prec(n):
        if isinstance(n, BinOp):
            return _PREC[n.op]
        if isinstance(n, Neg):
            return _PREC["neg"]
        if isinstance(n, Num) and n.value < 0:
            return _PREC["neg"]
        return 5

    def wrap(n, need):
        s = to_text(n)
        return f"({s})" if prec(n) < need else s

    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, _PREC["neg"])
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    p = _PREC[node.op]
    if node.op == "^":
        return f"{wrap(node.left, p + 1)}^{wrap(node.right, _PREC['neg'])}"
    # left-assoc: right operand of equal precedence needs parentheses
    return f"{wrap(node.left, p)} {node.op} {wrap(node.right, p + 1)}"


def eval_jet(node, x, dim=None, _vars=None):
    """Evaluate ``node`` over the jet ring at ``x`` (shape ``(..., dim)``)."""
    if _vars is None:
        x = np.asarray(x, dtype=float)
        if dim is not None and x.shape[-1] != dim:
            raise ValueError(f"point has {x.shape[-1]} coordinates, expected {dim}")
        _vars = jets.coordinate_jets(x)
    d = len(_vars)
    ref = _vars[0]

    def const(v):
        return jets.Jet.constant(np.broadcast_to(v, ref.shape), d)

    def ev(n):
        if isinstance(n, Num):
            return const(n.value)
        if isinstance(n, Const):
            return const(CONSTANTS[n.name])
        if isinstance(n, Var):
            if n.index >= d:
                raise ExpressionError(f"variable x{n.index} out of range for dim {d}", n, n.offset)
            return _vars[n.index]
        if isinstance(n, Name):
            raise ExpressionError(f"unbound name {n.name!r}", n, n.offset)
        if isinstance(n, Neg):
            return -ev(n.operand)
        try:
            if isinstance(n, Call):
                return jets.FUNCTIONS[n.func](ev(n.arg))
            if n.op == "^" and is_constant(n.right):
                return ev(n.left).pow_const(eval_float(n.right))
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if n.op == "/":
                return a / b
            return a**b
        except (DomainError, JetDivisionByZero) as exc:
            if getattr(exc, "node", None) is not None:
                raise
            err = type(exc)(f"{exc} (at offset {n.offset})")
            err.node = n
            err.offset = n.offset
            raise err from None

    return ev(node)


def eval_float(node, x=None):
    """Plain float evaluation (constants only when ``x`` is None)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return float(x[node.index])
    if isinstance(node, Neg):
        return -eval_float(node.operand, x)
    if isinstance(node, Call):
        v = eval_float(node.arg, x)
        return float(jets.FUNCTIONS[node.func](jets.Jet.constant(v, 1)).value)
    a, b = eval_float(node.left, x), eval_float(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a**b
