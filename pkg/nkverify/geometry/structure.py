"""The homogeneous nearly Kaehler structure of S3 x S3 in Lie coordinates.

A tangent vector (U, V) at (p, q) is stored as the pair (p^-1 U, q^-1 V) of
imaginary quaternions, flattened to six coordinates
[alpha_x, alpha_y, alpha_z, beta_x, beta_y, beta_z]. In these coordinates
g, J and P are constant matrices and the Levi-Civita connection of
left-invariant fields is a constant bilinear tensor, so every structure
identity is polynomial arithmetic.

Tensor conventions: a matrix M acts as y = M x, and a bilinear tensor T
stores T(e_i, e_j) in T[i, j, :].
"""

from __future__ import annotations

import functools
import logging
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy

from nkverify.errors import BasePointMismatchError, StepUnderflowError, TangencyError
from nkverify.geometry.backend import EXACT, FLOAT, Backend, get_backend
from nkverify.geometry.quaternion import (
    ImaginaryQuaternion,
    Quaternion,
    commutator,
    conjugate,
    mul,
)
from nkverify.geometry.types import ManifoldPoint, TangentVector

TANGENCY_TOLERANCE = 1e-9
FD_STEP = 1e-5

_UNITS = (ImaginaryQuaternion(1, 0, 0), ImaginaryQuaternion(0, 1, 0), ImaginaryQuaternion(0, 0, 1))


class StructureTensors:
    """Constant structure tensors of S3 x S3 for one scalar backend."""

    def __init__(self, backend: Backend):
        self.backend = backend
        one = Fraction(1)
        identity = np.eye(3, dtype=int)
        zero = np.zeros((3, 3), dtype=int)
        self.metric = backend.array(
            np.block([[identity * Fraction(4, 3), -identity * Fraction(2, 3)], [-identity * Fraction(2, 3), identity * Fraction(4, 3)]])
        )
        self.metric_inverse = backend.array(
            np.block([[identity * one, identity * Fraction(1, 2)], [identity * Fraction(1, 2), identity * one]])
        )
        inv_sqrt3 = backend.sqrt(backend.scalar(3)) / 3
        self.j = backend.simplify(backend.array(np.block([[-identity, 2 * identity], [-2 * identity, identity]])) * inv_sqrt3)
        self.p = backend.array(np.block([[zero, identity], [identity, zero]]))
        self.pj = backend.simplify(matmul(self.p, self.j))
        self.bracket = self._bracket_tensor()
        self.connection = self._koszul_connection()
        self.g_tensor = self._g_tensor()
        logging.debug(f"Structure tensors built for the {backend.name} backend")

    def _bracket_tensor(self) -> np.ndarray:
        out = np.zeros((6, 6, 6), dtype=object)
        for a in range(3):
            for b in range(3):
                c = list(commutator(_UNITS[a], _UNITS[b]))
                out[a, b, :3] = c
                out[3 + a, 3 + b, 3:] = c
        return self.backend.array(out)

    def _koszul_connection(self) -> np.ndarray:
        # 2 g(A(x, y), z) = g([x, y], z) - g([y, z], x) + g([z, x], y)
        g_bracket = np.empty((6, 6, 6), dtype=self.backend.dtype)
        for i in range(6):
            for j in range(6):
                g_bracket[i, j] = apply(self.metric, self.bracket[i, j])
        half = self.backend.scalar(Fraction(1, 2))
        connection = np.empty((6, 6, 6), dtype=self.backend.dtype)
        for i in range(6):
            for j in range(6):
                lowered = [half * (g_bracket[i, j, k] - g_bracket[j, k, i] + g_bracket[k, i, j]) for k in range(6)]
                connection[i, j] = apply(self.metric_inverse, self.backend.array(lowered))
        return self.backend.simplify(connection)

    def _g_tensor(self) -> np.ndarray:
        # G(x, y) = A(x, Jy) - J A(x, y)
        out = np.empty((6, 6, 6), dtype=self.backend.dtype)
        for i in range(6):
            for j in range(6):
                a_x_jy = sum(self.j[l, j] * self.connection[i, l] for l in range(6))
                out[i, j] = a_x_jy - apply(self.j, self.connection[i, j])
        return self.backend.simplify(out)

    def constant(self, value) -> object:
        return self.backend.scalar(value)


@functools.lru_cache(maxsize=None)
def structure(backend: str = "float") -> StructureTensors:
    return StructureTensors(get_backend(backend))


def backend_of(*arrays: np.ndarray) -> Backend:
    return EXACT if any(np.asarray(a).dtype == object for a in arrays) else FLOAT


# ---------------------------------------------------------------------------
# array kernels, vectorised over leading batch axes and valid for object dtype
# ---------------------------------------------------------------------------


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[:, :, None] * b[None, :, :]).sum(axis=1)


def apply(matrix: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (matrix * x[..., None, :]).sum(axis=-1)


def bilinear(tensor: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (x[..., :, None, None] * y[..., None, :, None] * tensor).sum(axis=(-3, -2))


def inner(metric: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (x[..., :, None] * metric * y[..., None, :]).sum(axis=(-2, -1))


def _st(*arrays: np.ndarray) -> StructureTensors:
    return structure(backend_of(*arrays).name)


def g_arr(x, y):
    return inner(_st(x, y).metric, x, y)


def j_arr(x):
    return apply(_st(x).j, x)


def p_arr(x):
    return apply(_st(x).p, x)


def bracket_arr(x, y):
    return bilinear(_st(x, y).bracket, x, y)


def connection_arr(x, y):
    return bilinear(_st(x, y).connection, x, y)


def g_tensor_arr(x, y):
    return bilinear(_st(x, y).g_tensor, x, y)


def curvature_arr(x, y, z):
    """Closed form of the curvature tensor with the 5/12, 1/12 and 1/3 coefficients."""
    st = _st(x, y, z)

    def g(a, b):
        return inner(st.metric, a, b)[..., None]

    jx, jy, jz = apply(st.j, x), apply(st.j, y), apply(st.j, z)
    px, py = apply(st.p, x), apply(st.p, y)
    jpx, jpy = apply(st.j, px), apply(st.j, py)
    return (
        st.constant(Fraction(5, 12)) * (g(y, z) * x - g(x, z) * y)
        + st.constant(Fraction(1, 12)) * (g(jy, z) * jx - g(jx, z) * jy - 2 * g(jx, y) * jz)
        + st.constant(Fraction(1, 3)) * (g(py, z) * px - g(px, z) * py + g(jpy, z) * jpx - g(jpx, z) * jpy)
    )


def curvature_from_connection(x, y, z):
    """R(x, y)z = A(x, A(y, z)) - A(y, A(x, z)) - A([x, y], z) on left-invariant fields."""
    return connection_arr(x, connection_arr(y, z)) - connection_arr(y, connection_arr(x, z)) - connection_arr(bracket_arr(x, y), z)


def nabla_g_arr(x, y, z):
    """(nabla_x G)(y, z) from the definition, with A the connection tensor."""
    return connection_arr(x, g_tensor_arr(y, z)) - g_tensor_arr(connection_arr(x, y), z) - g_tensor_arr(y, connection_arr(x, z))


def eq26_rhs(x, y, z):
    st = _st(x, y, z)

    def g(a, b):
        return inner(st.metric, a, b)[..., None]

    jy, jz = apply(st.j, y), apply(st.j, z)
    return st.constant(Fraction(1, 3)) * (g(y, jz) * x + g(x, z) * jy - g(x, y) * jz)


def nabla_p_direct(x, y):
    st = _st(x, y)
    return connection_arr(x, apply(st.p, y)) - apply(st.p, connection_arr(x, y))


def nabla_pj_direct(x, y):
    st = _st(x, y)
    return connection_arr(x, apply(st.pj, y)) - apply(st.pj, connection_arr(x, y))


def nabla_p_arr(x, y):
    """((nabla_x P)y, (nabla_x PJ)y) from G: 2(nabla_x P)y = JG(x,Py) + JPG(x,y), 2(nabla_x PJ)y = -G(x,Py) + PG(x,y)."""
    st = _st(x, y)
    half = st.constant(Fraction(1, 2))
    g_x_py = g_tensor_arr(x, apply(st.p, y))
    g_x_y = g_tensor_arr(x, y)
    np_y = half * (apply(st.j, g_x_py) + apply(st.j, apply(st.p, g_x_y)))
    npj_y = half * (-g_x_py + apply(st.p, g_x_y))
    return np_y, npj_y


# ---------------------------------------------------------------------------
# tangent-vector operations
# ---------------------------------------------------------------------------


def _is_real_zero(value, exact: bool, tol: float) -> bool:
    if exact:
        return sympy.simplify(value) == 0
    return abs(float(value)) <= tol


def lie_coords(point: ManifoldPoint, ambient: tuple[Quaternion, Quaternion], tol: float = TANGENCY_TOLERANCE) -> TangentVector:
    """Left-translate an ambient tangent pair (U, V) at (p, q) to (p^-1 U, q^-1 V)."""
    u, v = ambient
    left = mul(conjugate(point.p), u)
    right = mul(conjugate(point.q), v)
    exact = backend_of(Quaternion(*left).as_array(), Quaternion(*right).as_array()).exact
    if not (_is_real_zero(left.w, exact, tol) and _is_real_zero(right.w, exact, tol)):
        raise TangencyError(f"({u}, {v}) is not tangent to S3 x S3 at {point}")
    return TangentVector(point, left.imag(), right.imag())


def from_lie(z: TangentVector) -> tuple[Quaternion, Quaternion]:
    return mul(z.base.p, z.alpha.as_quaternion()), mul(z.base.q, z.beta.as_quaternion())


def _unwrap(*vectors):
    if all(isinstance(v, TangentVector) for v in vectors):
        vectors[0].same_base(*vectors[1:])
        return vectors[0].base, [v.coords for v in vectors]
    return None, [np.asarray(v) for v in vectors]


def _wrap(base, coords):
    if base is None:
        return coords
    return TangentVector.from_coords(base, coords)


def metric_g(z, z2):
    _, (a, b) = _unwrap(z, z2)
    return g_arr(a, b)[()]


def apply_J(z):
    base, (a,) = _unwrap(z)
    return _wrap(base, j_arr(a))


def apply_P(z):
    base, (a,) = _unwrap(z)
    return _wrap(base, p_arr(a))


def lie_bracket(x, y):
    base, (a, b) = _unwrap(x, y)
    return _wrap(base, bracket_arr(a, b))


def levi_civita(x, y):
    """nabla_x y for the left-invariant extensions of x and y."""
    base, (a, b) = _unwrap(x, y)
    return _wrap(base, connection_arr(a, b))


def tensor_G(x, y):
    base, (a, b) = _unwrap(x, y)
    return _wrap(base, g_tensor_arr(a, b))


def nabla_P(x, y):
    base, (a, b) = _unwrap(x, y)
    np_y, npj_y = nabla_p_arr(a, b)
    return _wrap(base, np_y), _wrap(base, npj_y)


def curvature(x, y, z):
    base, (a, b, c) = _unwrap(x, y, z)
    return _wrap(base, curvature_arr(a, b, c))


def nabla_G(x, y, z):
    base, (a, b, c) = _unwrap(x, y, z)
    return _wrap(base, nabla_g_arr(a, b, c))


def velocity(curve: Callable[[float], ManifoldPoint], t0: float, step: float = FD_STEP) -> np.ndarray:
    """Lie coordinates of the curve velocity by central differences."""
    _check_step(t0, step)
    base = curve(t0)
    plus, minus = curve(t0 + step), curve(t0 - step)
    dp = (plus.p.as_array().astype(float) - minus.p.as_array().astype(float)) / (2 * step)
    dq = (plus.q.as_array().astype(float) - minus.q.as_array().astype(float)) / (2 * step)
    alpha = mul(conjugate(base.p), Quaternion(*dp)).imag()
    beta = mul(conjugate(base.q), Quaternion(*dq)).imag()
    return np.concatenate((alpha.as_array(), beta.as_array())).astype(float)


def _check_step(t0: float, step: float) -> None:
    if not step > 0 or t0 + step == t0 or t0 - step == t0:
        raise StepUnderflowError(f"finite-difference step {step} vanishes at t = {t0}")


def covariant_derivative_along(
    curve: Callable[[float], ManifoldPoint],
    field: Callable[[float], TangentVector],
    t0: float,
    step: float = FD_STEP,
    curve_velocity: np.ndarray | TangentVector | None = None,
) -> TangentVector:
    """D/dt of a vector field along a curve: z'(t0) + A(zeta(t0), z(t0)) in Lie coordinates.

    z' is a central difference of the field's Lie coordinates; the velocity
    zeta is taken from `curve_velocity` when given, otherwise differenced
    from the curve.
    """
    _check_step(t0, step)
    base = curve(t0)
    z0 = field(t0)
    if z0.base != base:
        raise BasePointMismatchError(f"field at t = {t0} is based at {z0.base}, the curve is at {base}")
    z_plus = field(t0 + step).coords.astype(float)
    z_minus = field(t0 - step).coords.astype(float)
    if curve_velocity is None:
        zeta = velocity(curve, t0, step)
    elif isinstance(curve_velocity, TangentVector):
        zeta = curve_velocity.coords.astype(float)
    else:
        zeta = np.asarray(curve_velocity, dtype=float)
    dz = (z_plus - z_minus) / (2 * step)
    return TangentVector.from_coords(base, dz + connection_arr(zeta, z0.coords.astype(float)))
