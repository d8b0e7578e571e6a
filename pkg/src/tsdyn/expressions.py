"""Arithmetic expressions in the time variable ``t`` and states ``x1..xn``.

Grammar (recursive descent, one function per rule):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' factor)?
    atom   := NUMBER | 't' | 'x' DIGITS | '(' expr ')'

Power binds tighter than unary minus and associates to the right, so
``-x1^2`` is ``-(x1^2)`` and ``2^3^2`` is ``2^(3^2)``.  Numbers are decimal
with an optional exponent part.  Evaluation guards the usual real-domain
holes: division by zero, zero to a negative power, and a negative base under
a non-integer exponent all raise :class:`DomainViolation`; overflow raises
:class:`NonFiniteResult`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import DomainViolation, ExpressionSyntaxError, NonFiniteResult, UnknownVariable

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class TimeVar:
    pass


@dataclass(frozen=True)
class StateVar:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    child: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Const, TimeVar, StateVar, Neg, BinOp]


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, T, X, OP, LPAREN, RPAREN, END
    text: str
    pos: int  # 1-based column


def _tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        pos = i + 1
        if c.isdigit() or c == ".":
            m = _NUMBER.match(src, i)
            if m is None:
                raise ExpressionSyntaxError(pos, f"malformed number near {c!r}")
            out.append(Token("NUM", m.group(0), pos))
            i = m.end()
            continue
        if c.isalpha() or c == "_":
            m = _NAME.match(src, i)
            name = m.group(0)
            if name == "t":
                out.append(Token("T", name, pos))
            elif name[0] == "x" and name[1:].isdigit():
                out.append(Token("X", name, pos))
            else:
                raise UnknownVariable(
                    f"unknown identifier {name!r} at position {pos}; "
                    "only t and x1..xn are available"
                )
            i = m.end()
            continue
        if c in "+-*/^":
            out.append(Token("OP", c, pos))
            i += 1
            continue
        if c == "(":
            out.append(Token("LPAREN", c, pos))
            i += 1
            continue
        if c == ")":
            out.append(Token("RPAREN", c, pos))
            i += 1
            continue
        raise ExpressionSyntaxError(pos, f"unexpected character {c!r}")
    out.append(Token("END", "", n + 1))
    return out


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.k = 0

    def peek(self) -> Token:
        return self.tokens[self.k]

    def advance(self) -> Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            got = tok.text or "end of input"
            raise ExpressionSyntaxError(tok.pos, f"expected {what}, got {got!r}")
        return self.advance()

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.atom()
        if self.peek().kind == "OP" and self.peek().text == "^":
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "NUM":
            return Const(float(tok.text))
        if tok.kind == "T":
            return TimeVar()
        if tok.kind == "X":
            idx = int(tok.text[1:])
            if idx < 1:
                raise UnknownVariable(
                    f"state variables are numbered from x1, got {tok.text!r} "
                    f"at position {tok.pos}"
                )
            return StateVar(idx)
        if tok.kind == "LPAREN":
            node = self.expr()
            self.expect("RPAREN", "')'")
            return node
        got = tok.text or "end of input"
        raise ExpressionSyntaxError(tok.pos, f"expected a value, got {got!r}")


@dataclass(frozen=True)
class ExpressionTree:
    """Parsed expression with evaluation and canonical printing."""

    root: Node

    def evaluate(self, t: float, x: Sequence[float]) -> float:
        v = _eval(self.root, t, x)
        if not math.isfinite(v):
            raise NonFiniteResult(f"expression evaluated to {v!r}")
        return v

    def max_state_index(self) -> int:
        return _max_state(self.root)

    def __str__(self) -> str:
        return _show(self.root, 0)


def parse_expression(src: str) -> ExpressionTree:
    """Parse ``src``; errors carry the 1-based position of the problem."""
    parser = _Parser(_tokenize(src))
    root = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "END":
        raise ExpressionSyntaxError(
            trailing.pos, f"unexpected trailing input {trailing.text!r}"
        )
    return ExpressionTree(root)


def _eval(node: Node, t: float, x: Sequence[float]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, TimeVar):
        return t
    if isinstance(node, StateVar):
        if node.index > len(x):
            raise UnknownVariable(
                f"x{node.index} referenced but only {len(x)} state values given"
            )
        return float(x[node.index - 1])
    if isinstance(node, Neg):
        return -_eval(node.child, t, x)
    left = _eval(node.left, t, x)
    if node.op == "^":
        return _power(left, _eval(node.right, t, x))
    right = _eval(node.right, t, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0.0:
        raise DomainViolation("division by zero")
    return left / right


def _power(base: float, expo: float) -> float:
    integral = expo == math.floor(expo) and abs(expo) < 1e15
    if base == 0.0 and expo < 0.0:
        raise DomainViolation("zero base with negative exponent")
    if base < 0.0 and not integral:
        raise DomainViolation(
            f"negative base {base:g} with non-integer exponent {expo:g}"
        )
    try:
        return base ** expo
    except OverflowError as exc:
        raise NonFiniteResult("power overflow") from exc
    except ZeroDivisionError as exc:  # 0 ** negative int via pow
        raise DomainViolation("zero base with negative exponent") from exc


def _max_state(node: Node) -> int:
    if isinstance(node, StateVar):
        return node.index
    if isinstance(node, Neg):
        return _max_state(node.child)
    if isinstance(node, BinOp):
        return max(_max_state(node.left), _max_state(node.right))
    return 0


# precedence levels for printing: addition 1, multiplication 2, unary 3, power 4
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _show(node: Node, parent_prec: int) -> str:
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, TimeVar):
        return "t"
    if isinstance(node, StateVar):
        return f"x{node.index}"
    if isinstance(node, Neg):
        inner = _show(node.child, 3)
        text = f"-{inner}"
        return f"({text})" if parent_prec > 3 else text
    prec = _PREC[node.op]
    if node.op == "^":
        # right-associative; the base must bind tighter than power itself
        left = _show(node.left, prec + 1)
        right = _show(node.right, prec)
        text = f"{left}^{right}"
    else:
        sep = f" {node.op} " if prec == 1 else node.op
        left = _show(node.left, prec)
        # left-associative: a - (b - c) and a / (b * c) need the parens kept
        right = _show(node.right, prec + 1)
        text = f"{left}{sep}{right}"
    return f"({text})" if parent_prec > prec else text
