"""Parser and evaluator for user-entered objective expressions.

Grammar (precedence low to high): additive, multiplicative, unary minus,
power (right-associative), atoms. `x` denotes the full input vector,
`x1`..`xd` its components. Supported functions: sin, cos, exp, log, sqrt,
abs, min, max, sum, pow. Deliberately no assignment, loops or conditionals:
expressions are evaluated for remote users.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs", "min", "max", "sum", "pow")
_ARITY = {"pow": 2, "min": (1, 2), "max": (1, 2)}


class ExpressionError(ValueError):
    """Parse or evaluation failure; position is 1-based where known."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str       # "x" or "x<k>"


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Unary, Binary, Call]


@dataclass(frozen=True)
class Expression:
    """Parsed expression bound to a fixed input dimension."""

    root: Node
    dim: int
    text: str

    def __call__(self, x) -> float:
        return evaluate(self.root, np.asarray(x, dtype=float), self.dim)

    def to_string(self) -> str:
        return _print(self.root)


# ---------------------------------------------------------------------------
# tokenizer

@dataclass(frozen=True)
class _Token:
    kind: str      # num | ident | op | lparen | rparen | comma | end
    text: str
    pos: int       # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        pos = i + 1
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_exp = False
            while j < n and (text[j].isdigit() or text[j] == "." or
                             (text[j] in "eE" and j + 1 < n and
                              (text[j + 1].isdigit() or text[j + 1] in "+-")) or
                             (seen_exp and text[j] in "+-" and text[j - 1] in "eE")):
                if text[j] in "eE":
                    seen_exp = True
                j += 1
            tokens.append(_Token("num", text[i:j], pos))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], pos))
            i = j
        elif ch in "+-*/^":
            tokens.append(_Token("op", ch, pos))
            i += 1
        elif ch == "(":
            tokens.append(_Token("lparen", ch, pos))
            i += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ch, pos))
            i += 1
        elif ch == ",":
            tokens.append(_Token("comma", ch, pos))
            i += 1
        else:
            raise ExpressionError(f"unexpected character '{ch}'", pos)
    tokens.append(_Token("end", "", n + 1))
    return tokens


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens: list[_Token], dim: int):
        self.tokens = tokens
        self.k = 0
        self.dim = dim

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def advance(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExpressionError(f"expected {what}", tok.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.additive()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(f"unexpected '{tok.text}'", tok.pos)
        return node

    def additive(self) -> Node:
        node = self.multiplicative()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Unary("-", self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())  # right-associative
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            try:
                return Num(float(tok.text))
            except ValueError:
                raise ExpressionError(f"invalid number '{tok.text}'", tok.pos)
        if tok.kind == "lparen":
            self.advance()
            node = self.additive()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.peek().kind == "lparen":
                if name not in FUNCTIONS:
                    raise ExpressionError(f"unknown function '{name}'", tok.pos)
                self.advance()
                args = [self.additive()]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.additive())
                self.expect("rparen", "')'")
                self._check_arity(name, len(args), tok.pos)
                return Call(name, tuple(args))
            return self._variable(name, tok.pos)
        raise ExpressionError("unexpected end of expression" if tok.kind == "end"
                              else f"unexpected '{tok.text}'", tok.pos)

    def _check_arity(self, name: str, got: int, pos: int) -> None:
        want = _ARITY.get(name, 1)
        ok = got in want if isinstance(want, tuple) else got == want
        if not ok:
            raise ExpressionError(f"function '{name}' takes {want} argument(s), got {got}", pos)

    def _variable(self, name: str, pos: int) -> Var:
        if name == "x":
            return Var("x")
        if name.startswith("x") and name[1:].isdigit():
            k = int(name[1:])
            if not 1 <= k <= self.dim:
                raise ExpressionError(f"variable '{name}' out of range for dim {self.dim}", pos)
            return Var(name)
        raise ExpressionError(f"unknown identifier '{name}'", pos)


def parse_expression(text: str, dim: int) -> Expression:
    """Parse an expression over x / x1..xd; errors carry a 1-based position."""
    if not text or not text.strip():
        raise ExpressionError("empty expression", 1)
    tokens = _tokenize(text)
    root = _Parser(tokens, dim).parse()
    return Expression(root=root, dim=dim, text=text)


# ---------------------------------------------------------------------------
# evaluation

def evaluate(node: Node, x: np.ndarray, dim: int) -> float:
    val = _eval(node, x)
    arr = np.asarray(val, dtype=float)
    if arr.ndim == 0:
        result = float(arr)
    elif arr.size == 1:
        result = float(arr.reshape(()))
    else:
        raise ExpressionError("expression must reduce to a scalar (use sum/min/max)")
    if not np.isfinite(result):
        raise ExpressionError("expression evaluated to a non-finite value")
    return result


def _eval(node: Node, x: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name == "x":
            return x
        return float(x[int(node.name[1:]) - 1])
    if isinstance(node, Unary):
        return -_eval(node.operand, x)
    if isinstance(node, Binary):
        left, right = _eval(node.left, x), _eval(node.right, x)
        if node.op == "+":
            return np.add(left, right)
        if node.op == "-":
            return np.subtract(left, right)
        if node.op == "*":
            return np.multiply(left, right)
        if node.op == "/":
            if np.any(np.asarray(right) == 0):
                raise ExpressionError("division by zero")
            return np.divide(left, right)
        if node.op == "^":
            return np.power(np.asarray(left, dtype=float), right)
    if isinstance(node, Call):
        args = [_eval(a, x) for a in node.args]
        if node.name == "log":
            if np.any(np.asarray(args[0]) <= 0):
                raise ExpressionError("log of a non-positive value")
            return np.log(args[0])
        if node.name == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise ExpressionError("sqrt of a negative value")
            return np.sqrt(args[0])
        if node.name in ("sin", "cos", "exp", "abs"):
            return getattr(np, node.name)(args[0])
        if node.name == "sum":
            return np.sum(args[0])
        if node.name in ("min", "max"):
            fn = np.minimum if node.name == "min" else np.maximum
            red = np.min if node.name == "min" else np.max
            return fn(args[0], args[1]) if len(args) == 2 else red(args[0])
        if node.name == "pow":
            return np.power(np.asarray(args[0], dtype=float), args[1])
    raise ExpressionError(f"cannot evaluate node {node!r}")


def _print(node: Node) -> str:
    """Canonical text form; parse(print(parse(s))) is a fixed point."""
    if isinstance(node, Num):
        v = node.value
        return str(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"-{_wrap(node.operand, 25)}"
    if isinstance(node, Binary):
        prec = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}[node.op]
        left = _wrap(node.left, prec)
        # right side binds one step tighter except for right-associative ^
        right = _wrap(node.right, prec if node.op == "^" else prec + 1)
        return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_print(a) for a in node.args)})"
    raise ValueError(f"cannot print node {node!r}")


def _precedence(node: Node) -> int:
    if isinstance(node, Binary):
        return {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}[node.op]
    if isinstance(node, Unary):
        return 25
    return 100


def _wrap(node: Node, needed: int) -> str:
    text = _print(node)
    return f"({text})" if _precedence(node) < needed else text
