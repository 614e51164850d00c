"""Expression language for chart components and scalar fields.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' factor)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' atom

Identifiers are the variables ``u, v`` (with ``x`` and ``y`` as aliases),
the constant ``pi`` and the functions ``sin, cos, exp, log, sqrt, abs``.

Note that unary minus is an *atom*, so ``-u^2`` parses as ``(-u)^2``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
VARIABLES = {"u": "u", "v": "v", "x": "u", "y": "v"}


class ExpressionError(ValueError):
    """Base class for expression failures."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ExpressionDomainError(ExpressionError):
    """Raised when a function is evaluated outside its real domain."""

    def __init__(self, message: str, subexpression: str):
        super().__init__(f"{message} in '{subexpression}'")
        self.subexpression = subexpression


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'u' or 'v'


@dataclass(frozen=True)
class Const:
    name: str  # only 'pi'


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()])"
)


def _offset(source: str, pos: int) -> int:
    return len(source[:pos].encode())


def _tokenize(source: str):
    tokens = []
    pos, n = 0, len(source)
    while True:
        while pos < n and source[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos]!r}", _offset(source, pos)
            )
        tokens.append((m.lastgroup, m.group(), _offset(source, pos)))
        pos = m.end()
    tokens.append(("end", "", _offset(source, n)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, off = self.take()
        if text != value:
            found = text if kind != "end" else "end of input"
            raise ExpressionSyntaxError(f"expected {value!r}, found {found!r}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "op" and text == "-":
            return Neg(self.atom())
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            if text in VARIABLES:
                return Var(VARIABLES[text])
            if text == "pi":
                return Const("pi")
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", off)
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", off)
        raise ExpressionSyntaxError(f"unexpected token {text!r}", off)


def parse_expression(source: str) -> Node:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _is_atom(node: Node) -> bool:
    return not isinstance(node, BinOp)


def pretty(node: Node) -> str:
    """Render ``node`` with the minimal parentheses needed to re-parse it."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.operand)
        return "-" + (inner if _is_atom(node.operand) else f"({inner})")
    op = node.op
    left, right = pretty(node.left), pretty(node.right)
    if op == "^":
        if not _is_atom(node.left):
            left = f"({left})"
        if isinstance(node.right, BinOp) and node.right.op != "^":
            right = f"({right})"
        return f"{left}^{right}"
    prec = _PREC[op]
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < prec:
        left = f"({left})"
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= prec:
        right = f"({right})"
    return f"{left} {op} {right}"


def substitute(node: Node, mapping: dict) -> Node:
    """Replace variables by subtrees, e.g. ``{'u': Var('v'), 'v': Var('u')}``."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, (Num, Const)):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, mapping))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, mapping))
    return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))


def variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Num, Const)):
        return set()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, Call):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


def as_node(value) -> Node:
    """Coerce a number, source string or node to a node."""
    if isinstance(value, (Num, Var, Const, Neg, BinOp, Call)):
        return value
    if isinstance(value, str):
        return parse_expression(value)
    value = float(value)
    return Num(value) if value >= 0 else Neg(Num(-value))


# small constructors used when building charts programmatically
def add(a, b) -> Node:
    return BinOp("+", as_node(a), as_node(b))


def mul(a, b) -> Node:
    return BinOp("*", as_node(a), as_node(b))


def evaluate(node: Node, env: dict, lib):
    """Evaluate ``node`` with variables bound in ``env``.

    ``lib`` supplies the arithmetic; it must provide ``const``, ``neg``,
    ``add``, ``sub``, ``mul``, ``div``, ``pow`` and one method per function
    name.  This lets the same tree be evaluated on floats, arrays or jets.
    """
    if isinstance(node, Num):
        return lib.const(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return lib.const(math.pi)
    if isinstance(node, Neg):
        return lib.neg(evaluate(node.operand, env, lib))
    if isinstance(node, Call):
        arg = evaluate(node.arg, env, lib)
        return getattr(lib, node.func)(arg, node)
    a = evaluate(node.left, env, lib)
    b = evaluate(node.right, env, lib)
    if node.op == "+":
        return lib.add(a, b)
    if node.op == "-":
        return lib.sub(a, b)
    if node.op == "*":
        return lib.mul(a, b)
    if node.op == "/":
        return lib.div(a, b, node)
    return lib.pow(a, b, node)
