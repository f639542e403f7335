"""Recursive-descent parser for immersion descriptor files.

    immersion <name>
    vars x y z
    let <id> = <qexpr>        (zero or more)
    left  = <qexpr>
    right = <qexpr>

    qexpr := factor ('*' factor)*
    factor := const(s, s, s, s) | exp(s, s, s) | inv(qexpr) | (qexpr) | <id>
    s := term (('+' | '-') term)*
    term := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | number | pi | sqrt3 | <var> | (s)

'#' starts a comment. Statements are one per line.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import sympy

from nkverify.dsl.types import Affine, Const, Exp, ImmersionDescriptor, Inv, Mul, QExpr, Var
from nkverify.errors import ParseError

UNIT_TOLERANCE = 1e-12

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[=,()+\-*/]))"
)
_FUNCTIONS = {"exp", "inv", "const"}
_CONSTANTS = {"pi": sympy.pi, "sqrt3": sympy.sqrt(3)}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(line_text: str, line: int) -> list[Token]:
    text = line_text.split("#", 1)[0].rstrip()
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None or match.end() == pos:
            column = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[column - 1]!r}", line, column)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), line, match.start(kind) + 1))
        pos = match.end()
    return tokens


class StatementParser:
    """Parses one statement line; `variables` and `bound` resolve identifiers."""

    def __init__(self, tokens: list[Token], line: int, variables: tuple[str, ...], bound: set[str]):
        self._tokens = tokens
        self._line = line
        self._pos = 0
        self._variables = variables
        self._bound = bound

    # Helpers

    @property
    def _current(self) -> Token | None:
        return self._tokens[self._pos] if self._pos < len(self._tokens) else None

    def _error_here(self, message: str) -> ParseError:
        token = self._current
        if token is not None:
            return ParseError(message, token.line, token.column)
        if self._tokens:
            last = self._tokens[-1]
            return ParseError(f"unexpected end of line: {message}", last.line, last.column)
        return ParseError(f"unexpected end of line: {message}", self._line, 1)

    def _advance(self) -> Token:
        token = self._current
        if token is None:
            raise self._error_here("expected more input")
        self._pos += 1
        return token

    def _consume(self, expected: str) -> Token:
        token = self._current
        if token is None or token.text != expected:
            found = "end of line" if token is None else repr(token.text)
            raise self._error_here(f"expected {expected!r}, found {found}")
        return self._advance()

    def _at(self, text: str) -> bool:
        return self._current is not None and self._current.text == text

    def finish(self) -> None:
        if self._current is not None:
            raise self._error_here(f"unexpected token {self._current.text!r}")

    # Quaternion expressions

    def qexpr(self) -> QExpr:
        left = self._factor()
        while self._at("*"):
            self._advance()
            left = Mul(left, self._factor())
        return left

    def _factor(self) -> QExpr:
        token = self._current
        if token is None:
            raise self._error_here("expected a quaternion expression")
        if token.text == "(":
            self._advance()
            inner = self.qexpr()
            self._consume(")")
            return inner
        if token.kind != "ident":
            raise self._error_here(f"expected a quaternion expression, found {token.text!r}")
        name = token.text.lower()
        if name in _FUNCTIONS and self._pos + 1 < len(self._tokens) and self._tokens[self._pos + 1].text == "(":
            self._advance()
            self._consume("(")
            return getattr(self, f"_{name}_call")(token)
        self._advance()
        if token.text in self._variables:
            raise ParseError(f"{token.text} is a chart variable, not a quaternion", token.line, token.column)
        if token.text not in self._bound:
            raise ParseError(f"unbound identifier {token.text}", token.line, token.column)
        return Var(token.text)

    def _exp_call(self, token: Token) -> Exp:
        args = self._arguments(3)
        return Exp(tuple(args))

    def _inv_call(self, token: Token) -> Inv:
        operand = self.qexpr()
        self._consume(")")
        return Inv(operand)

    def _const_call(self, token: Token) -> Const:
        start = self._current
        args = self._arguments(4)
        if not all(a.is_constant for a in args):
            raise ParseError("const() takes constant components", start.line, start.column)
        w, x, y, z = (a.constant for a in args)
        n2 = float(w * w + x * x + y * y + z * z)
        if abs(n2 - 1.0) > UNIT_TOLERANCE:
            raise ParseError(f"const({w}, {x}, {y}, {z}) is not a unit quaternion", token.line, token.column)
        return Const(w, x, y, z)

    def _arguments(self, count: int) -> list[Affine]:
        args = [self.scalar()]
        for _ in range(count - 1):
            self._consume(",")
            args.append(self.scalar())
        self._consume(")")
        return args

    # Affine scalar expressions

    def scalar(self) -> Affine:
        left = self._term()
        while self._at("+") or self._at("-"):
            op = self._advance()
            right = self._term()
            left = left + right if op.text == "+" else left - right
        return left

    def _term(self) -> Affine:
        left = self._unary()
        while self._at("*") or self._at("/"):
            op = self._advance()
            right = self._unary()
            if op.text == "*":
                if not left.is_constant and not right.is_constant:
                    raise ParseError("non-affine product in a scalar argument", op.line, op.column)
                left = right.scaled(left.constant) if left.is_constant else left.scaled(right.constant)
            else:
                if not right.is_constant:
                    raise ParseError("division by a chart variable is not affine", op.line, op.column)
                if right.constant == 0:
                    raise ParseError("division by zero", op.line, op.column)
                left = left.scaled(1 / right.constant)
        return left

    def _unary(self) -> Affine:
        if self._at("-"):
            self._advance()
            return -self._unary()
        if self._at("+"):
            self._advance()
            return self._unary()
        token = self._current
        if token is None:
            raise self._error_here("expected a scalar")
        if token.text == "(":
            self._advance()
            inner = self.scalar()
            self._consume(")")
            return inner
        if token.kind == "number":
            self._advance()
            return Affine(sympy.Rational(token.text))
        if token.kind == "ident":
            self._advance()
            if token.text in _CONSTANTS:
                return Affine(_CONSTANTS[token.text])
            if token.text in self._variables:
                return Affine.variable(self._variables.index(token.text))
            raise ParseError(f"unknown scalar {token.text}", token.line, token.column)
        raise self._error_here(f"expected a scalar, found {token.text!r}")


def parse(text: str) -> ImmersionDescriptor:
    name = None
    variables: tuple[str, ...] = ()
    bindings: list[tuple[str, QExpr]] = []
    sides: dict[str, QExpr] = {}
    last_line = 1
    for line_no, line_text in enumerate(text.splitlines(), start=1):
        tokens = tokenize(line_text, line_no)
        if not tokens:
            continue
        last_line = line_no
        head = tokens[0]
        if name is None:
            if head.text != "immersion" or len(tokens) != 2 or tokens[1].kind != "ident":
                raise ParseError("descriptor must start with 'immersion <name>'", line_no, head.column)
            name = tokens[1].text
            continue
        if not variables:
            if head.text != "vars" or len(tokens) != 4 or any(t.kind != "ident" for t in tokens[1:]):
                raise ParseError("expected 'vars <x> <y> <z>'", line_no, head.column)
            variables = tuple(t.text for t in tokens[1:])
            if len(set(variables)) != 3:
                raise ParseError("chart variables must be distinct", line_no, tokens[1].column)
            continue
        bound = {b for b, _ in bindings}
        if head.text == "let":
            if sides:
                raise ParseError("let bindings must precede left and right", line_no, head.column)
            if len(tokens) < 2 or tokens[1].kind != "ident":
                raise ParseError("expected 'let <id> = <qexpr>'", line_no, head.column)
            ident = tokens[1]
            if ident.text in bound or ident.text in variables or ident.text.lower() in _FUNCTIONS | set(_CONSTANTS):
                raise ParseError(f"cannot bind {ident.text}", line_no, ident.column)
            parser = StatementParser(tokens[2:], line_no, variables, bound)
            parser._consume("=")
            bindings.append((ident.text, parser.qexpr()))
            parser.finish()
            continue
        if head.text in ("left", "right"):
            if head.text in sides:
                raise ParseError(f"{head.text} assigned twice", line_no, head.column)
            parser = StatementParser(tokens[1:], line_no, variables, bound)
            if not tokens[1:]:
                raise ParseError(f"expected '=' after {head.text}", line_no, head.column)
            parser._consume("=")
            sides[head.text] = parser.qexpr()
            parser.finish()
            continue
        raise ParseError(f"unexpected statement {head.text!r}", line_no, head.column)
    for required in ("left", "right"):
        if required not in sides:
            raise ParseError(f"missing '{required} = ...'", last_line, 1)
    descriptor = ImmersionDescriptor(name, variables, tuple(bindings), sides["left"], sides["right"], source=text)
    logging.debug(f"Parsed immersion {name} with {len(bindings)} bindings")
    return descriptor


def load(path: str | Path) -> ImmersionDescriptor:
    return parse(Path(path).read_text(encoding="utf-8"))
