"""Arithmetic expression DSL for Hamiltonians, f-functions and potentials.

Grammar (highest precedence first)::

    ^        right-associative power; the exponent may carry a unary minus
    -        unary negation
    * /      left-associative
    + -      left-associative

Primaries are decimal numbers (optional fraction and exponent), identifiers and
one-argument calls of ``exp sinh cosh tanh log sqrt sinhc``.  ``-x^2`` parses
as ``-(x^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from . import dual

__all__ = [
    "Token",
    "Const",
    "Symbol",
    "Neg",
    "Binary",
    "Call",
    "Ast",
    "ExprError",
    "ExprSyntaxError",
    "UnknownFunctionError",
    "UnboundSymbolError",
    "FUNCTIONS",
    "tokenize",
    "parse",
    "to_source",
    "free_symbols",
    "substitute",
    "compile_ast",
    "evaluate",
]


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at byte {position}{detail}")


class UnknownFunctionError(ExprError):
    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(
            f"unknown function {name!r} at byte {position}; known: {', '.join(sorted(FUNCTIONS))}"
        )


class UnboundSymbolError(ExprError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"unbound symbol(s): {', '.join(self.missing)}")


FUNCTIONS: dict[str, Callable] = {
    "exp": dual.exp,
    "sinh": dual.sinh,
    "cosh": dual.cosh,
    "tanh": dual.tanh,
    "log": dual.log,
    "sqrt": dual.sqrt,
    "sinhc": dual.sinhc,
}


@dataclass(frozen=True)
class Token:
    kind: str  # number | identifier | operator | paren | comma | end
    lexeme: str
    position: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<identifier>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<operator>[-+*/^])
  | (?P<paren>[()])
  | (?P<comma>,)
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    nbytes = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", nbytes)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            tokens.append(Token(kind, text, nbytes))
        nbytes += len(text.encode("utf-8"))
        pos = m.end()
    tokens.append(Token("end", "", nbytes))
    return tokens


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Ast"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Ast"


Ast = Union[Const, Symbol, Neg, Binary, Call]

_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_PRIMARY_START = frozenset({"number", "identifier", "(", "-"})


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, lexeme: str) -> Token:
        if self.tok.lexeme != lexeme or self.tok.kind == "end":
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.lexeme)
            raise ExprSyntaxError(f"unexpected {what}", self.tok.position, frozenset({lexeme}))
        return self.advance()

    def parse(self) -> Ast:
        node = self.binary(1)
        if self.tok.kind != "end":
            raise ExprSyntaxError(
                f"unexpected {self.tok.lexeme!r}",
                self.tok.position,
                frozenset({"+", "-", "*", "/", "^", "end of input"}),
            )
        return node

    def binary(self, min_prec: int) -> Ast:
        left = self.unary()
        while self.tok.kind == "operator" and _BINARY_PREC.get(self.tok.lexeme, 0) >= min_prec:
            op = self.advance().lexeme
            right = self.binary(_BINARY_PREC[op] + 1)
            left = Binary(op, left, right)
        return left

    def unary(self) -> Ast:
        if self.tok.kind == "operator" and self.tok.lexeme == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Ast:
        base = self.primary()
        if self.tok.kind == "operator" and self.tok.lexeme == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def primary(self) -> Ast:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Const(float(t.lexeme))
        if t.kind == "identifier":
            self.advance()
            if self.tok.lexeme == "(":
                if t.lexeme not in FUNCTIONS:
                    raise UnknownFunctionError(t.lexeme, t.position)
                self.advance()
                arg = self.binary(1)
                self.expect(")")
                return Call(t.lexeme, arg)
            return Symbol(t.lexeme)
        if t.lexeme == "(":
            self.advance()
            node = self.binary(1)
            self.expect(")")
            return node
        what = "end of input" if t.kind == "end" else repr(t.lexeme)
        raise ExprSyntaxError(f"unexpected {what}", t.position, _PRIMARY_START)


def parse(source: str) -> Ast:
    return _Parser(source).parse()


def to_source(node: Ast) -> str:
    """Fully parenthesised source text that re-parses to the same tree."""
    if isinstance(node, Const):
        if node.value < 0:
            return f"(-{-node.value!r})"
        return repr(node.value)
    if isinstance(node, Symbol):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_symbols(node: Ast) -> set[str]:
    if isinstance(node, Symbol):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Neg):
        return free_symbols(node.operand)
    if isinstance(node, Call):
        return free_symbols(node.arg)
    return free_symbols(node.left) | free_symbols(node.right)


def substitute(node: Ast, replacements: Mapping[str, Ast]) -> Ast:
    if isinstance(node, Symbol):
        return replacements.get(node.name, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, replacements))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, replacements))
    return Binary(node.op, substitute(node.left, replacements), substitute(node.right, replacements))


def _add(a, b):
    return a + b


def _sub(a, b):
    return a - b


def _mul(a, b):
    return a * b


def _div(a, b):
    return a / b


_OPS = {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": dual.power}


def compile_ast(node: Ast) -> Callable[[Mapping[str, object]], object]:
    """Closure evaluating ``node`` against a name -> scalar mapping."""
    if isinstance(node, Const):
        v = node.value
        return lambda env: v
    if isinstance(node, Symbol):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        f = compile_ast(node.operand)
        return lambda env: -f(env)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.func]
        a = compile_ast(node.arg)
        return lambda env: fn(a(env))
    if node.op == "^" and isinstance(node.right, Const) and node.right.value.is_integer():
        n = int(node.right.value)
        lf = compile_ast(node.left)
        return lambda env: dual.power(lf(env), n)
    op = _OPS[node.op]
    lf, rf = compile_ast(node.left), compile_ast(node.right)
    return lambda env: op(lf(env), rf(env))


def evaluate(node: Ast, bindings: Mapping[str, object]):
    """Evaluate ``node``; the scalar kind follows the kind of the bindings."""
    missing = free_symbols(node) - set(bindings)
    if missing:
        raise UnboundSymbolError(missing)
    return compile_ast(node)(bindings)
