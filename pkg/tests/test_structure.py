import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

import nkverify.verify.checks  # noqa: F401
from nkverify.errors import BasePointMismatchError, ConfigError, StepUnderflowError, TangencyError
from nkverify.geometry.backend import EXACT, FLOAT, get_backend
from nkverify.geometry.quaternion import ONE, ImaginaryQuaternion, Quaternion, UnitQuaternion, exp_im
from nkverify.geometry.structure import (
    apply_J,
    covariant_derivative_along,
    from_lie,
    g_arr,
    j_arr,
    levi_civita,
    lie_coords,
    metric_g,
    structure,
    tensor_G,
    velocity,
)
from nkverify.geometry.types import ManifoldPoint, TangentVector
from nkverify.verify import registry

ORIGIN = ManifoldPoint(UnitQuaternion.of(ONE), UnitQuaternion.of(ONE))


def _vector(*coords, base=ORIGIN) -> TangentVector:
    return TangentVector.from_coords(base, coords)


def test_metric_values():
    assert metric_g(_vector(1, 0, 0, 0, 0, 0), _vector(1, 0, 0, 0, 0, 0)) == pytest.approx(4 / 3)
    assert metric_g(_vector(1, 0, 0, 0, 0, 0), _vector(0, 0, 0, 1, 0, 0)) == pytest.approx(-2 / 3)
    assert metric_g(_vector(1, 0, 0, 0, 0, 0), _vector(0, 1, 0, 0, 0, 0)) == pytest.approx(0.0)


def test_j_on_left_factor():
    jx = apply_J(_vector(1, 0, 0, 0, 0, 0))
    np.testing.assert_allclose(jx.coords, [-1 / math.sqrt(3), 0, 0, -2 / math.sqrt(3), 0, 0], atol=1e-15)
    assert metric_g(jx, jx) == pytest.approx(4 / 3)


def test_exact_tensors():
    st = structure("exact")
    assert st.metric[0, 0] == sympy.Rational(4, 3)
    j2 = np.array([[sympy.expand(sum(st.j[i, k] * st.j[k, l] for k in range(6))) for l in range(6)] for i in range(6)])
    assert (j2 == -np.eye(6, dtype=int)).all()


def test_structure_identities_float():
    rng = np.random.default_rng(2024)
    x, y, z = (rng.normal(size=(200, 6)) for _ in range(3))
    for check in registry.suite("structure"):
        assert FLOAT.residual(check.func(x, y, z)) < 1e-10, check.id


def test_structure_identities_exact():
    rng = np.random.default_rng(1)
    values = [[Fraction(int(n), int(d)) for n, d in zip(rng.integers(-6, 7, 6), rng.integers(1, 5, 6))] for _ in range(6)]
    x, y, z = (EXACT.array(np.array(values[k : k + 2], dtype=object)) for k in (0, 2, 4))
    for check in registry.suite("structure"):
        assert EXACT.residual(check.func(x, y, z)) == 0.0, check.id


def test_g_tensor_vanishes_on_equal_arguments():
    x = _vector(0.3, -1.0, 2.0, 0.5, 0.1, -0.7)
    np.testing.assert_allclose(tensor_G(x, x).coords, 0.0, atol=1e-14)


def test_nabla_j_from_g_tensor():
    # G(x, y) = (nabla_x J)y on left-invariant fields
    x = _vector(0.2, 0.4, -1.0, 1.5, 0.0, 0.3)
    y = _vector(-0.6, 1.1, 0.2, 0.0, 0.9, -0.4)
    lhs = levi_civita(x, apply_J(y)) - apply_J(levi_civita(x, y))
    np.testing.assert_allclose(lhs.coords, tensor_G(x, y).coords, atol=1e-12)


def test_lie_coords_round_trip():
    p = exp_im(ImaginaryQuaternion(0.2, -0.1, 0.4))
    q = exp_im(ImaginaryQuaternion(-0.3, 0.5, 0.0))
    point = ManifoldPoint(p, q)
    z = _vector(0.1, 0.2, 0.3, -0.4, 0.5, -0.6, base=point)
    again = lie_coords(point, from_lie(z))
    np.testing.assert_allclose(again.coords, z.coords, atol=1e-14)


def test_lie_coords_rejects_non_tangent():
    with pytest.raises(TangencyError):
        lie_coords(ORIGIN, (Quaternion(1, 0, 0, 0), Quaternion(0, 1, 0, 0)))


def test_mismatched_bases():
    other = ManifoldPoint(UnitQuaternion.of(Quaternion(0, 1, 0, 0)), UnitQuaternion.of(ONE))
    with pytest.raises(BasePointMismatchError):
        metric_g(_vector(1, 0, 0, 0, 0, 0), _vector(1, 0, 0, 0, 0, 0, base=other))


def _one_parameter(axis):
    axis = np.asarray(axis, dtype=float)
    return lambda t: ManifoldPoint(exp_im(ImaginaryQuaternion(*(t * axis[:3]))), exp_im(ImaginaryQuaternion(*(t * axis[3:]))))


def test_velocity_of_exponential_curve():
    axis = [0.3, -0.2, 0.1, 0.0, 0.5, 0.4]
    np.testing.assert_allclose(velocity(_one_parameter(axis), 0.7), axis, atol=1e-8)


def test_covariant_derivative_of_left_invariant_field():
    axis = np.array([0.3, -0.2, 0.1, 0.0, 0.5, 0.4])
    field_coords = np.array([1.0, 0.0, -1.0, 0.2, 0.3, 0.0])
    curve = _one_parameter(axis)
    derivative = covariant_derivative_along(curve, lambda t: TangentVector.from_coords(curve(t), field_coords), 0.5)
    np.testing.assert_allclose(derivative.coords, levi_civita(axis, field_coords), atol=1e-9)


def test_covariant_derivative_errors():
    curve = _one_parameter([1, 0, 0, 0, 0, 0])
    with pytest.raises(StepUnderflowError):
        covariant_derivative_along(curve, lambda t: _vector(1, 0, 0, 0, 0, 0, base=curve(t)), 1.0, step=1e-20)
    with pytest.raises(BasePointMismatchError):
        covariant_derivative_along(curve, lambda t: _vector(1, 0, 0, 0, 0, 0), 0.5)


def test_array_kernels_on_batches():
    x = np.eye(6)
    np.testing.assert_allclose(g_arr(j_arr(x), j_arr(x)), g_arr(x, x))


def test_unknown_backend():
    assert get_backend("exact") is EXACT
    with pytest.raises(ConfigError):
        get_backend("interval")
