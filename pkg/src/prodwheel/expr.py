"""Small arithmetic expression language for user-defined function families.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | NAME | '(' expr ')'

``-x^2`` parses as ``-(x^2)``. Evaluation is vectorised: variables may be
bound to numpy arrays of a common shape.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownVariableError",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "ExprAst",
    "parse_expression",
    "evaluate",
]


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, text: str):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownVariableError(ExprError):
    def __init__(self, name: str, offset: int, allowed: Sequence[str]):
        self.name = name
        self.offset = offset
        super().__init__(
            f"unknown variable {name!r} at offset {offset}; "
            f"expected one of {', '.join(allowed)}"
        )


@dataclass(frozen=True)
class Const:
    value: float

    def evaluate(self, env):
        return self.value

    def variables(self) -> set[str]:
        return set()

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def evaluate(self, env):
        return env[self.name]

    def variables(self) -> set[str]:
        return {self.name}

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"

    def evaluate(self, env):
        return -self.operand.evaluate(env)

    def variables(self) -> set[str]:
        return self.operand.variables()

    def __str__(self) -> str:
        return f"(-{self.operand})"


_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"

    def evaluate(self, env):
        lhs = self.left.evaluate(env)
        rhs = self.right.evaluate(env)
        if self.op == "^":
            # float power so that e.g. 2^-1 and (-8)^(1/3) follow IEEE rules
            return np.power(np.asarray(lhs, dtype=float), rhs)
        return _BINARY[self.op](lhs, rhs)

    def variables(self) -> set[str]:
        return self.left.variables() | self.right.variables()

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


ExprAst = Union[Const, Var, Neg, BinOp]


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = list(variables)
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        kind, value, pos = self.tok
        what = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"{message}, found {what}", pos, self.text)

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.tok[0] != "end":
            self.fail("expected operator")
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> ExprAst:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> ExprAst:
        kind, value, pos = self.tok
        if kind == "num":
            self.take()
            return Const(float(value))
        if kind == "name":
            self.take()
            if value not in self.variables:
                raise UnknownVariableError(value, pos, self.variables)
            return Var(value)
        if kind == "op" and value == "(":
            self.take()
            node = self.expr()
            if not (self.tok[0] == "op" and self.tok[1] == ")"):
                self.fail("expected ')'")
            self.take()
            return node
        self.fail("expected number, variable or '('")


def parse_expression(text: str, variable_names: Sequence[str]) -> ExprAst:
    """Parse ``text`` into an AST over the given variable names.

    Raises
    ------
    ExprSyntaxError
        Malformed input; ``offset`` is the 0-based character position.
    UnknownVariableError
        A name not listed in ``variable_names``.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text)
    return _Parser(text, variable_names).parse()


def evaluate(ast: ExprAst, env: Mapping[str, object]):
    """Evaluate ``ast`` with numpy semantics; ``env`` maps names to scalars or arrays."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return ast.evaluate(env)
