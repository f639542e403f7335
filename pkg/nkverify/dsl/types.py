from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import sympy

ZERO = sympy.Integer(0)


@dataclass(frozen=True)
class Affine:
    """c0 + c1 x + c2 y + c3 z with exact sympy coefficients."""

    constant: sympy.Expr = ZERO
    coefficients: tuple[sympy.Expr, sympy.Expr, sympy.Expr] = (ZERO, ZERO, ZERO)

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    @classmethod
    def variable(cls, index: int) -> Affine:
        coefficients = [ZERO, ZERO, ZERO]
        coefficients[index] = sympy.Integer(1)
        return cls(ZERO, tuple(coefficients))

    def __add__(self, other: Affine) -> Affine:
        return Affine(
            self.constant + other.constant,
            tuple(a + b for a, b in zip(self.coefficients, other.coefficients)),
        )

    def __neg__(self) -> Affine:
        return Affine(-self.constant, tuple(-c for c in self.coefficients))

    def __sub__(self, other: Affine) -> Affine:
        return self + (-other)

    def scaled(self, factor: sympy.Expr) -> Affine:
        return Affine(sympy.simplify(self.constant * factor), tuple(sympy.simplify(c * factor) for c in self.coefficients))

    def value(self, point) -> float:
        return float(self.constant) + sum(float(c) * float(x) for c, x in zip(self.coefficients, point))

    def gradient(self) -> tuple[float, float, float]:
        return tuple(float(c) for c in self.coefficients)


@dataclass(frozen=True)
class Const:
    w: sympy.Expr
    x: sympy.Expr
    y: sympy.Expr
    z: sympy.Expr


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Exp:
    args: tuple[Affine, Affine, Affine]


@dataclass(frozen=True)
class Mul:
    left: QExpr
    right: QExpr


@dataclass(frozen=True)
class Inv:
    operand: QExpr


QExpr = Union[Const, Var, Exp, Mul, Inv]


@dataclass(frozen=True)
class ImmersionDescriptor:
    """A map from a chart box in R3 to S3 x S3, as left and right quaternion expressions."""

    name: str
    variables: tuple[str, str, str]
    bindings: tuple[tuple[str, QExpr], ...]
    left: QExpr
    right: QExpr
    source: str | None = field(default=None, compare=False, repr=False)
