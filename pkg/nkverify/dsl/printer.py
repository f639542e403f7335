from __future__ import annotations

import re

import sympy
from sympy.printing.str import StrPrinter

from nkverify.dsl.types import Affine, Const, Exp, ImmersionDescriptor, Inv, Mul, QExpr, Var

_ATOM = re.compile(r"^[A-Za-z0-9_.]+$")


class _ScalarPrinter(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        if expr == sympy.sqrt(3):
            return "sqrt3"
        return super()._print_Pow(expr, rational=rational)


def _scalar(value: sympy.Expr) -> str:
    text = _ScalarPrinter().doprint(value)
    return text if _ATOM.match(text) else f"({text})"


def _affine(a: Affine, variables: tuple[str, ...]) -> str:
    parts: list[tuple[bool, str]] = []
    if a.constant != 0 or a.is_constant:
        negative = a.constant.could_extract_minus_sign()
        parts.append((negative, _scalar(-a.constant if negative else a.constant)))
    for coefficient, name in zip(a.coefficients, variables):
        if coefficient == 0:
            continue
        negative = coefficient.could_extract_minus_sign()
        magnitude = -coefficient if negative else coefficient
        parts.append((negative, name if magnitude == 1 else f"{_scalar(magnitude)}*{name}"))
    negative, text = parts[0]
    out = f"-{text}" if negative else text
    for negative, text in parts[1:]:
        out += f" - {text}" if negative else f" + {text}"
    return out


def _qexpr(expr: QExpr, variables: tuple[str, ...]) -> str:
    match expr:
        case Const(w, x, y, z):
            return f"const({', '.join(_affine(Affine(c), variables) for c in (w, x, y, z))})"
        case Var(name):
            return name
        case Exp(args):
            return f"exp({', '.join(_affine(a, variables) for a in args)})"
        case Mul(left, right):
            rhs = _qexpr(right, variables)
            return f"{_qexpr(left, variables)} * {f'({rhs})' if isinstance(right, Mul) else rhs}"
        case Inv(operand):
            return f"inv({_qexpr(operand, variables)})"
    raise TypeError(f"not a quaternion expression: {expr!r}")


def pretty(desc: ImmersionDescriptor) -> str:
    """Descriptor source text that parses back to an equal descriptor."""
    lines = [f"immersion {desc.name}", f"vars {' '.join(desc.variables)}"]
    lines += [f"let {name} = {_qexpr(expr, desc.variables)}" for name, expr in desc.bindings]
    lines.append(f"left = {_qexpr(desc.left, desc.variables)}")
    lines.append(f"right = {_qexpr(desc.right, desc.variables)}")
    return "\n".join(lines) + "\n"
