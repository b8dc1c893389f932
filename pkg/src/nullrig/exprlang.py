"""Small arithmetic expression language for metric and embedding components.

Grammar (whitespace-insensitive):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          right associative, binds tightest
    atom   := NUMBER | VAR | FN '(' expr ')' | '(' expr ')'

Numbers are decimal or scientific floats, functions are sqrt, exp, ln,
sin, cos, and variables must belong to the chart the expression is parsed
against.  '-x^2' therefore parses as -(x^2) and '2^3^2' as 2^(3^2).

Every node carries its source byte span, so parse and evaluation errors
point back into the original text.  Printing with :func:`pretty` emits
floats via shortest round-trip decimal (exact to the last bit, at most 17
significant digits); parse(pretty(e)) is structurally equal to e.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import jets

__all__ = [
    "ExprError",
    "ParseError",
    "UnknownVariableError",
    "EvalDomainError",
    "Num",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "CompiledExpr",
    "parse",
    "pretty",
    "FUNCTIONS",
]


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} (at byte {position})")


class UnknownVariableError(ParseError):
    def __init__(self, name: str, position: int, source: str = ""):
        self.name = name
        super().__init__(f"unknown chart variable '{name}'", position, source)


class EvalDomainError(ExprError):
    def __init__(self, message: str, span: tuple[int, int], fragment: str):
        self.span = span
        self.fragment = fragment
        super().__init__(f"{message} in '{fragment}' (bytes {span[0]}..{span[1]})")


# ---- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    span: tuple[int, int] = field(compare=False)


@dataclass(frozen=True)
class Num(Node):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Node):
    name: str = ""


@dataclass(frozen=True)
class Unary(Node):
    op: str = "-"
    operand: Node = None


@dataclass(frozen=True)
class Binary(Node):
    op: str = "+"
    left: Node = None
    right: Node = None


@dataclass(frozen=True)
class Call(Node):
    fn: str = ""
    arg: Node = None


FUNCTIONS: dict[str, Callable] = {
    "sqrt": jets.sqrt,
    "exp": jets.exp,
    "ln": jets.ln,
    "sin": jets.sin,
    "cos": jets.cos,
}


# ---- lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _lex(source: str) -> list[_Tok]:
    out = []
    i = 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", i, source)
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), i))
        i = m.end()
    out.append(_Tok("end", "", n))
    return out


# ---- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, chart: Sequence[str]):
        self.source = source
        self.chart = tuple(chart)
        self.toks = _lex(source)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, text: str) -> _Tok:
        t = self.peek()
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected '{text}'", t.pos, self.source)
        return self.next()

    def parse(self) -> Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected trailing input {t.text!r}", t.pos, self.source)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.term()
            node = Binary((node.span[0], rhs.span[1]), op, node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            rhs = self.unary()
            node = Binary((node.span[0], rhs.span[1]), op, node, rhs)
        return node

    def unary(self) -> Node:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            operand = self.unary()
            return Unary((t.pos, operand.span[1]), "-", operand)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.next()
            exponent = self.unary()  # right associative, allows x^-2
            return Binary((base.span[0], exponent.span[1]), "^", base, exponent)
        return base

    def atom(self) -> Node:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Num((t.pos, t.pos + len(t.text)), float(t.text))
        if t.kind == "ident":
            self.next()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if t.text not in FUNCTIONS:
                    raise ParseError(f"unknown function '{t.text}'", t.pos, self.source)
                self.next()
                arg = self.expr()
                close = self.expect_op(")")
                return Call((t.pos, close.pos + 1), t.text, arg)
            if t.text not in self.chart:
                raise UnknownVariableError(t.text, t.pos, self.source)
            return Var((t.pos, t.pos + len(t.text)), t.text)
        if t.kind == "op" and t.text == "(":
            self.next()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(
            "expected a number, variable, function call or '('", t.pos, self.source
        )


# ---- printer ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node: Node) -> int:
    if isinstance(node, (Num, Var, Call)):
        return _PREC["atom"]
    if isinstance(node, Unary):
        return _PREC["neg"]
    return _PREC[node.op]


def pretty(node) -> str:
    """Render an AST (or CompiledExpr) back to grammar-conformant source."""
    if isinstance(node, CompiledExpr):
        node = node.ast
    return _render(node)


def _render(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_render(node.arg)})"
    if isinstance(node, Unary):
        s = _render(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            s = f"({s})"
        return f"-{s}"
    if isinstance(node, Binary):
        lp = _prec(node.left)
        rp = _prec(node.right)
        if node.op == "^":
            # right associative: parenthesize any non-atomic base
            ls = _render(node.left)
            if lp < _PREC["atom"]:
                ls = f"({ls})"
            rs = _render(node.right)
            if rp < _PREC["neg"]:  # exponent may be a unary chain or tighter
                rs = f"({rs})"
            return f"{ls}^{rs}"
        me = _PREC[node.op]
        ls = _render(node.left)
        if lp < me:
            ls = f"({ls})"
        rs = _render(node.right)
        if rp < me or (rp == me and node.op in ("-", "/")):
            rs = f"({rs})"
        return f"{ls}{node.op}{rs}"
    raise TypeError(f"not an AST node: {node!r}")


# ---- evaluation ------------------------------------------------------------


def _eval(node: Node, env: Mapping[str, object], source: str):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    try:
        if isinstance(node, Unary):
            return -_eval(node.operand, env, source)
        if isinstance(node, Call):
            return FUNCTIONS[node.fn](_eval(node.arg, env, source))
        if isinstance(node, Binary):
            a = _eval(node.left, env, source)
            b = _eval(node.right, env, source)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return jets.divide(a, b)
            return jets.power(a, b)
    except jets.JetDomainError as err:
        frag = source[node.span[0] : node.span[1]]
        raise EvalDomainError(str(err), node.span, frag) from err
    raise TypeError(f"not an AST node: {node!r}")


def _variables(node: Node, acc: set[str]):
    if isinstance(node, Var):
        acc.add(node.name)
    elif isinstance(node, Unary):
        _variables(node.operand, acc)
    elif isinstance(node, Call):
        _variables(node.arg, acc)
    elif isinstance(node, Binary):
        _variables(node.left, acc)
        _variables(node.right, acc)


@dataclass(frozen=True)
class CompiledExpr:
    """A parsed expression bound to a chart (ordered variable names)."""

    source: str
    chart: tuple[str, ...]
    ast: Node

    def variables(self) -> frozenset[str]:
        acc: set[str] = set()
        _variables(self.ast, acc)
        return frozenset(acc)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate with named leaves: floats, Jet2 jets or numpy arrays."""
        return _eval(self.ast, values, self.source)

    def __call__(self, *args):
        """Positional evaluation in chart order."""
        env = dict(zip(self.chart, args))
        return _eval(self.ast, env, self.source)

    def is_constant(self) -> bool:
        return not self.variables()

    def __str__(self) -> str:
        return pretty(self.ast)


def parse(source: str, chart: Sequence[str]) -> CompiledExpr:
    """Parse source against a chart; all variables must belong to it."""
    ast = _Parser(source, chart).parse()
    return CompiledExpr(source, tuple(chart), ast)
