from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np
import sympy

from nkverify.errors import ConfigError

_expand = np.frompyfunc(sympy.expand, 1, 1)


@dataclass(frozen=True)
class Backend:
    """Scalar arithmetic used by the structure tensors.

    `float` evaluates everything in double precision; `exact` keeps every
    entry a sympy number in Q(sqrt 3) so polynomial identities can be
    certified with a zero residual.
    """

    name: str
    dtype: Any
    scalar: Callable[[Any], Any]
    sqrt: Callable[[Any], Any]

    @property
    def exact(self) -> bool:
        return self.dtype is object

    def array(self, values) -> np.ndarray:
        if not self.exact:
            return np.asarray(values, dtype=float)
        flat = [self.scalar(v) for v in np.asarray(values, dtype=object).ravel()]
        return np.array(flat, dtype=object).reshape(np.shape(values))

    def simplify(self, values: np.ndarray) -> np.ndarray:
        if not self.exact:
            return values
        return np.asarray(_expand(values), dtype=object)

    def residual(self, values) -> float:
        """Largest absolute entry; exact entries are expanded first so zero means zero."""
        values = np.asarray(values)
        if values.size == 0:
            return 0.0
        if self.exact:
            values = self.simplify(values)
            return max(float(abs(sympy.N(v))) for v in values.ravel())
        return float(np.max(np.abs(values)))

    def residuals(self, values, axis) -> np.ndarray:
        """Per-sample residuals, reducing every axis in `axis`."""
        values = np.asarray(values)
        if self.exact:
            values = self.simplify(values)
            values = np.vectorize(lambda v: float(abs(sympy.N(v))), otypes=[float])(values)
        return np.max(np.abs(values), axis=axis)


def _exact_scalar(value: Any) -> Any:
    if isinstance(value, sympy.Basic):
        return value
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    return sympy.nsimplify(value, rational=True)


FLOAT = Backend("float", float, float, np.sqrt)
EXACT = Backend("exact", object, _exact_scalar, sympy.sqrt)

BACKENDS = {"float": FLOAT, "exact": EXACT}


def get_backend(name: str) -> Backend:
    try:
        return BACKENDS[name]
    except KeyError:
        logging.error(f"Unknown backend {name}")
        raise ConfigError(f"backend must be one of {sorted(BACKENDS)}, got {name}")
