import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from nkverify.errors import QuaternionDomainError
from nkverify.geometry.quaternion import (
    ONE,
    I,
    ImaginaryQuaternion,
    J,
    K,
    Quaternion,
    UnitQuaternion,
    commutator,
    conjugate,
    cross,
    exp_im,
    inner,
    inverse,
    mul,
    norm,
    qconj_array,
    qmul_array,
)


def _close(a: Quaternion, b: Quaternion, tol: float = 1e-12):
    np.testing.assert_allclose(np.array(tuple(a), dtype=float), np.array(tuple(b), dtype=float), atol=tol)


def test_unit_products():
    assert mul(I, J) == K
    assert mul(J, K) == I
    assert mul(K, I) == J
    assert mul(J, I) == -K
    for unit in (I, J, K):
        assert mul(unit, unit) == -ONE


def test_half_angle_square():
    h = Quaternion(1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0)
    _close(h * h, I)
    _close(h * inverse(h), ONE)


def test_inverse_examples():
    assert inverse(I) == -I
    assert inverse(ONE) == ONE
    assert inverse(Quaternion(0, 0, 2, 0)) == Quaternion(0, 0, Fraction(-1, 2), 0)


def test_inverse_of_zero():
    with pytest.raises(QuaternionDomainError):
        inverse(Quaternion())


def test_exact_inverse_stays_exact():
    q = Quaternion(1, 2, 3, 4)
    product = mul(q, inverse(q))
    assert product == ONE
    assert all(isinstance(c, (int, Fraction)) for c in product)
    assert inverse(inverse(q)) == q


def test_norm_is_multiplicative():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = Quaternion.from_array(rng.normal(size=4))
        b = Quaternion.from_array(rng.normal(size=4))
        assert norm(mul(a, b)) == pytest.approx(norm(a) * norm(b), rel=1e-12)


def test_associativity():
    rng = np.random.default_rng(5)
    a, b, c = (Quaternion.from_array(rng.normal(size=4)) for _ in range(3))
    _close(mul(mul(a, b), c), mul(a, mul(b, c)))


def test_commutator_is_twice_cross():
    a = ImaginaryQuaternion(1, 2, 3)
    b = ImaginaryQuaternion(-2, 0, 5)
    assert commutator(a, b) == 2 * cross(a, b)
    assert inner(commutator(a, b), a) == 0


def test_unit_quaternion_validation():
    with pytest.raises(QuaternionDomainError):
        UnitQuaternion.of(Quaternion(1, 1, 0, 0))
    q = UnitQuaternion.of(Quaternion(1 + 1e-11, 0, 0, 0))
    assert q.w == pytest.approx(1.0, abs=1e-15)
    half = sympy.Rational(1, 2)
    exact = UnitQuaternion.of(Quaternion(half, half, half, half))
    assert tuple(exact.inverse()) == tuple(conjugate(exact))


def test_exact_unit_with_radicals():
    r = 1 / sympy.sqrt(2)
    q = UnitQuaternion.of(Quaternion(r, 0, -r, 0))
    assert sympy.simplify(norm(q) - 1) == 0


@pytest.mark.parametrize(
    "v,expected",
    [
        (ImaginaryQuaternion(0, 0, 0), ONE),
        (ImaginaryQuaternion(math.pi / 2, 0, 0), I),
        (ImaginaryQuaternion(math.pi, 0, 0), -ONE),
        (ImaginaryQuaternion(0, 0, math.pi / 2), K),
    ],
)
def test_exp_im(v, expected):
    _close(exp_im(v), expected)


def test_exp_im_one_parameter_group():
    rng = np.random.default_rng(11)
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    for t, s in rng.uniform(-2.0, 2.0, size=(20, 2)):
        lhs = mul(exp_im(ImaginaryQuaternion(*(t * axis))), exp_im(ImaginaryQuaternion(*(s * axis))))
        _close(lhs, exp_im(ImaginaryQuaternion(*((t + s) * axis))))


def test_exp_im_small_argument_is_continuous():
    tiny = exp_im(ImaginaryQuaternion(1e-6, 0, 0))
    assert tiny.w == pytest.approx(1.0)
    assert tiny.x == pytest.approx(1e-6, rel=1e-9)


def test_array_kernels_agree():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(10, 4))
    b = rng.normal(size=(10, 4))
    product = qmul_array(a, b)
    for row, (qa, qb) in enumerate(zip(a, b)):
        np.testing.assert_allclose(product[row], mul(Quaternion.from_array(qa), Quaternion.from_array(qb)).as_array())
    np.testing.assert_allclose(qconj_array(a)[0], conjugate(Quaternion.from_array(a[0])).as_array())
