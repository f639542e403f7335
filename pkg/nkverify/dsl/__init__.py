from nkverify.dsl.catalog import CATALOG_SOURCES, catalog, catalog_names, f8_reference
from nkverify.dsl.expr import evaluate, hessian, jacobian, jets
from nkverify.dsl.parser import load, parse
from nkverify.dsl.printer import pretty
from nkverify.dsl.types import Affine, Const, Exp, ImmersionDescriptor, Inv, Mul, QExpr, Var

__all__ = [
    "Affine",
    "CATALOG_SOURCES",
    "Const",
    "Exp",
    "ImmersionDescriptor",
    "Inv",
    "Mul",
    "QExpr",
    "Var",
    "catalog",
    "catalog_names",
    "evaluate",
    "f8_reference",
    "hessian",
    "jacobian",
    "jets",
    "load",
    "parse",
    "pretty",
]
