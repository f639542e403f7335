from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np
import sympy

from nkverify.errors import QuaternionDomainError

UNIT_TOLERANCE = 1e-9


def _is_exact(value: Any) -> bool:
    return isinstance(value, (sympy.Basic, Fraction, int))


def _is_symbolic(value: Any) -> bool:
    return isinstance(value, (sympy.Basic, Fraction))


def _sqrt(value: Any) -> Any:
    if _is_exact(value):
        return sympy.sqrt(sympy.nsimplify(value))
    return math.sqrt(value)


@dataclass(frozen=True)
class Quaternion:
    """A quaternion w + x i + y j + z k.

    Components may be floats, Fractions or sympy numbers; arithmetic never
    coerces between them, so exact inputs stay exact.
    """

    w: Any = 0
    x: Any = 0
    y: Any = 0
    z: Any = 0

    def __iter__(self):
        yield from (self.w, self.x, self.y, self.z)

    def __add__(self, other: Quaternion) -> Quaternion:
        return add(self, other)

    def __sub__(self, other: Quaternion) -> Quaternion:
        return sub(self, other)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    @property
    def real(self) -> Any:
        return self.w

    def imag(self) -> ImaginaryQuaternion:
        return ImaginaryQuaternion(self.x, self.y, self.z)

    def conjugate(self) -> Quaternion:
        return conjugate(self)

    def as_array(self) -> np.ndarray:
        dtype = object if any(_is_symbolic(c) for c in self) else float
        return np.array(tuple(self), dtype=dtype)

    @classmethod
    def from_array(cls, values) -> Quaternion:
        w, x, y, z = values
        return cls(w, x, y, z)


@dataclass(frozen=True)
class ImaginaryQuaternion:
    """A pure imaginary quaternion x i + y j + z k, an element of the Lie algebra of S3."""

    x: Any = 0
    y: Any = 0
    z: Any = 0

    def __iter__(self):
        yield from (self.x, self.y, self.z)

    def __add__(self, other: ImaginaryQuaternion) -> ImaginaryQuaternion:
        return ImaginaryQuaternion(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: ImaginaryQuaternion) -> ImaginaryQuaternion:
        return ImaginaryQuaternion(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> ImaginaryQuaternion:
        return ImaginaryQuaternion(-self.x, -self.y, -self.z)

    def __mul__(self, factor) -> ImaginaryQuaternion:
        return ImaginaryQuaternion(self.x * factor, self.y * factor, self.z * factor)

    __rmul__ = __mul__

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0, self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        dtype = object if any(_is_symbolic(c) for c in self) else float
        return np.array(tuple(self), dtype=dtype)

    @classmethod
    def from_array(cls, values) -> ImaginaryQuaternion:
        x, y, z = values
        return cls(x, y, z)


@dataclass(frozen=True)
class UnitQuaternion(Quaternion):
    """A point of S3. Build through `UnitQuaternion.of` so the norm is validated."""

    @classmethod
    def of(cls, q: Quaternion) -> UnitQuaternion:
        n2 = norm2(q)
        if all(_is_exact(c) for c in q):
            if sympy.simplify(sympy.nsimplify(n2) - 1) != 0:
                raise QuaternionDomainError(f"{q} is not a unit quaternion (norm^2 = {n2})")
            return cls(*q)
        n = math.sqrt(float(n2))
        if abs(n - 1.0) > UNIT_TOLERANCE:
            raise QuaternionDomainError(f"{q} is not a unit quaternion (|q| = {n})")
        return cls(*(float(c) / n for c in q))

    def inverse(self) -> UnitQuaternion:
        return UnitQuaternion(*conjugate(self))


ONE = Quaternion(1, 0, 0, 0)
I = Quaternion(0, 1, 0, 0)
J = Quaternion(0, 0, 1, 0)
K = Quaternion(0, 0, 0, 1)


def mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def add(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z)


def sub(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z)


def scale(q: Quaternion, factor: Any) -> Quaternion:
    return Quaternion(q.w * factor, q.x * factor, q.y * factor, q.z * factor)


def conjugate(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def norm2(q: Quaternion) -> Any:
    return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z


def norm(q: Quaternion) -> Any:
    return _sqrt(norm2(q))


def inverse(q: Quaternion) -> Quaternion:
    n2 = norm2(q)
    if n2 == 0:
        raise QuaternionDomainError("the zero quaternion has no inverse")
    if isinstance(n2, int):
        n2 = Fraction(n2)
    return scale(conjugate(q), 1 / n2)


def imag(q: Quaternion) -> ImaginaryQuaternion:
    return q.imag()


def commutator(a: ImaginaryQuaternion, b: ImaginaryQuaternion) -> ImaginaryQuaternion:
    """[a, b] = ab - ba, which equals 2 a x b on Im H."""
    return sub(mul(a.as_quaternion(), b.as_quaternion()), mul(b.as_quaternion(), a.as_quaternion())).imag()


def inner(a: ImaginaryQuaternion, b: ImaginaryQuaternion) -> Any:
    return a.x * b.x + a.y * b.y + a.z * b.z


def cross(a: ImaginaryQuaternion, b: ImaginaryQuaternion) -> ImaginaryQuaternion:
    return ImaginaryQuaternion(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )


def exp_im(v: ImaginaryQuaternion) -> UnitQuaternion:
    """exp(v) = cos|v| + sin|v| v/|v|, float backend only."""
    x, y, z = (float(c) for c in v)
    r = math.sqrt(x * x + y * y + z * z)
    # sin(r)/r by its series below 1e-4 so exp(0) = 1 continuously
    s = 1.0 - r * r / 6.0 + r**4 / 120.0 if r < 1e-4 else math.sin(r) / r
    return UnitQuaternion(math.cos(r), s * x, s * y, s * z)


def qmul_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product over the last axis of two (..., 4) arrays."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        (
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ),
        axis=-1,
    )


def qconj_array(a: np.ndarray) -> np.ndarray:
    return a * np.array([1.0, -1.0, -1.0, -1.0])
