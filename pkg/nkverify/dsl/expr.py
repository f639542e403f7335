"""Forward-mode evaluation of immersion descriptors with exact first and second derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from nkverify.dsl.types import Const, Exp, ImmersionDescriptor, Inv, Mul, QExpr, Var
from nkverify.geometry.quaternion import Quaternion, UnitQuaternion, qconj_array, qmul_array
from nkverify.geometry.types import ManifoldPoint

# below this |v|^2 the sin/cos coefficient functions are summed as power series
_SERIES_THRESHOLD = 0.25
_SERIES_TERMS = 14


@dataclass(frozen=True)
class Jet:
    """Value, gradient and Hessian of a quaternion-valued function of three chart variables."""

    value: np.ndarray  # (4,)
    first: np.ndarray  # (3, 4)
    second: np.ndarray  # (3, 3, 4)

    @classmethod
    def constant(cls, q) -> Jet:
        return cls(np.asarray(q, dtype=float), np.zeros((3, 4)), np.zeros((3, 3, 4)))

    def __mul__(self, other: Jet) -> Jet:
        a, b = self, other
        value = qmul_array(a.value, b.value)
        first = qmul_array(a.first, b.value) + qmul_array(a.value, b.first)
        second = (
            qmul_array(a.second, b.value)
            + qmul_array(a.first[:, None, :], b.first[None, :, :])
            + qmul_array(a.first[None, :, :], b.first[:, None, :])
            + qmul_array(a.value, b.second)
        )
        return Jet(value, first, second)

    def inverse(self) -> Jet:
        # d(q^-1) = -q^-1 dq q^-1
        r = qconj_array(self.value) / float(self.value @ self.value)
        rdq = qmul_array(r, self.first)  # r dq_i
        first = -qmul_array(rdq, r)
        second = (
            qmul_array(qmul_array(rdq[:, None, :], rdq[None, :, :]), r)
            + qmul_array(qmul_array(rdq[None, :, :], rdq[:, None, :]), r)
            - qmul_array(qmul_array(r, self.second), r)
        )
        return Jet(r, first, second)


def _series_coefficients(rho: float) -> tuple[float, float, float, float]:
    """C = cos r, S = sin r / r, S' = dS/drho, S'' = d2S/drho2 with rho = r^2."""
    if rho < _SERIES_THRESHOLD:
        c = s = ds = dds = 0.0
        for n in range(_SERIES_TERMS):
            sign = -1.0 if n % 2 else 1.0
            c += sign * rho**n / math.factorial(2 * n)
            s += sign * rho**n / math.factorial(2 * n + 1)
            if n >= 1:
                ds += sign * n * rho ** (n - 1) / math.factorial(2 * n + 1)
            if n >= 2:
                dds += sign * n * (n - 1) * rho ** (n - 2) / math.factorial(2 * n + 1)
        return c, s, ds, dds
    r = math.sqrt(rho)
    sin_r, cos_r = math.sin(r), math.cos(r)
    s = sin_r / r
    ds = (r * cos_r - sin_r) / (2 * r**3)
    dds = (3 * sin_r - 3 * r * cos_r - r * r * sin_r) / (4 * r**5)
    return cos_r, s, ds, dds


def exp_jet(v: np.ndarray, directions: np.ndarray) -> Jet:
    """Jet of exp_im along the affine map x -> v + sum_a x_a directions[a], at x = 0."""
    v = np.asarray(v, dtype=float)
    c = np.asarray(directions, dtype=float)
    rho = float(v @ v)
    cos_r, s, ds, dds = _series_coefficients(rho)
    dc, ddc = -s / 2, -ds / 2
    d_rho = 2 * c @ v  # (3,)
    dd_rho = 2 * c @ c.T  # (3, 3)

    value = np.concatenate(([cos_r], s * v))
    first = np.empty((3, 4))
    first[:, 0] = dc * d_rho
    first[:, 1:] = ds * d_rho[:, None] * v + s * c
    outer = np.outer(d_rho, d_rho)
    second = np.empty((3, 3, 4))
    second[:, :, 0] = ddc * outer + dc * dd_rho
    second[:, :, 1:] = (
        (dds * outer + ds * dd_rho)[:, :, None] * v
        + ds * d_rho[:, None, None] * c[None, :, :]
        + ds * d_rho[None, :, None] * c[:, None, :]
    )
    return Jet(value, first, second)


class Evaluator:
    """Evaluates one descriptor at one chart point, memoising let bindings."""

    def __init__(self, descriptor: ImmersionDescriptor, point):
        self.descriptor = descriptor
        self.point = np.asarray(point, dtype=float)
        self._bindings = dict(descriptor.bindings)
        self._memo: dict[str, Jet] = {}

    def jet(self, expr: QExpr) -> Jet:
        match expr:
            case Const(w, x, y, z):
                return Jet.constant([float(w), float(x), float(y), float(z)])
            case Var(name):
                if name not in self._memo:
                    self._memo[name] = self.jet(self._bindings[name])
                return self._memo[name]
            case Exp(args):
                v = np.array([a.value(self.point) for a in args])
                directions = np.array([a.gradient() for a in args]).T  # directions[var] is a 3-vector
                return exp_jet(v, directions)
            case Mul(left, right):
                return self.jet(left) * self.jet(right)
            case Inv(operand):
                return self.jet(operand).inverse()
        raise TypeError(f"not a quaternion expression: {expr!r}")

    def sides(self) -> tuple[Jet, Jet]:
        return self.jet(self.descriptor.left), self.jet(self.descriptor.right)


def jets(desc: ImmersionDescriptor, chart_point) -> tuple[Jet, Jet]:
    return Evaluator(desc, chart_point).sides()


def evaluate(desc: ImmersionDescriptor, chart_point) -> ManifoldPoint:
    left, right = jets(desc, chart_point)
    return ManifoldPoint(UnitQuaternion(*left.value), UnitQuaternion(*right.value))


def jacobian(desc: ImmersionDescriptor, chart_point) -> list[tuple[Quaternion, Quaternion]]:
    """Ambient pushforwards (dp/dx_a, dq/dx_a) of the three chart directions."""
    left, right = jets(desc, chart_point)
    return [(Quaternion(*left.first[a]), Quaternion(*right.first[a])) for a in range(3)]


def hessian(desc: ImmersionDescriptor, chart_point) -> list[list[tuple[Quaternion, Quaternion]]]:
    left, right = jets(desc, chart_point)
    return [[(Quaternion(*left.second[a, b]), Quaternion(*right.second[a, b])) for b in range(3)] for a in range(3)]
