from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nkverify.errors import BasePointMismatchError
from nkverify.geometry.quaternion import ImaginaryQuaternion, UnitQuaternion


@dataclass(frozen=True)
class ManifoldPoint:
    """A point (p, q) of S3 x S3."""

    p: UnitQuaternion
    q: UnitQuaternion

    @classmethod
    def from_array(cls, left, right) -> ManifoldPoint:
        return cls(UnitQuaternion.of(UnitQuaternion(*left)), UnitQuaternion.of(UnitQuaternion(*right)))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.p.as_array(), self.q.as_array()


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector at `base` in Lie coordinates: the ambient pair is (p alpha, q beta)."""

    base: ManifoldPoint
    alpha: ImaginaryQuaternion
    beta: ImaginaryQuaternion

    @property
    def coords(self) -> np.ndarray:
        """The six Lie coordinates [alpha_x, alpha_y, alpha_z, beta_x, beta_y, beta_z]."""
        return np.concatenate((self.alpha.as_array(), self.beta.as_array()))

    @classmethod
    def from_coords(cls, base: ManifoldPoint, coords) -> TangentVector:
        coords = list(coords)
        return cls(base, ImaginaryQuaternion(*coords[:3]), ImaginaryQuaternion(*coords[3:]))

    def same_base(self, *others: TangentVector) -> None:
        for other in others:
            if other.base != self.base:
                raise BasePointMismatchError(f"tangent vectors based at {self.base} and {other.base}")

    def __add__(self, other: TangentVector) -> TangentVector:
        self.same_base(other)
        return TangentVector(self.base, self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other: TangentVector) -> TangentVector:
        self.same_base(other)
        return TangentVector(self.base, self.alpha - other.alpha, self.beta - other.beta)

    def __neg__(self) -> TangentVector:
        return TangentVector(self.base, -self.alpha, -self.beta)

    def __mul__(self, factor) -> TangentVector:
        return TangentVector(self.base, self.alpha * factor, self.beta * factor)

    __rmul__ = __mul__
