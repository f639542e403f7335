import math

import numpy as np
import pytest
import sympy

from nkverify.dsl import catalog
from nkverify.errors import BasePointMismatchError, DegenerateChartError, TangencyError
from nkverify.geometry.invariants import (
    angle_relations_check,
    bold_i,
    classification_cubic,
    cubic_closure_residual,
    depressed_cubic_roots,
    eq613_residual,
    eq614_residual,
    has_constant_angles,
    isotropy_mu,
    j_isotropy_lambda,
    maximize_cubic_form,
    polarized_jisotropy_check,
    prop42_residual,
    sectional_curvature,
    sectional_gauss_residual,
    sphere_directions,
)
from nkverify.geometry.lagrangian import eq58_residual, lagrangian_point
from nkverify.geometry.structure import apply_J


@pytest.fixture(scope="module")
def f7_point():
    return lagrangian_point(catalog("f7"), (0.0, 0.0, 0.0))


@pytest.fixture(scope="module")
def f8_point():
    return lagrangian_point(catalog("f8"), (0.0, 0.0, 0.0))


@pytest.fixture(scope="module")
def f3_point():
    return lagrangian_point(catalog("f3"), (0.1, 0.2, 0.3))


def test_sphere_directions():
    v = sphere_directions(100)
    assert v.shape == (113, 3)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0)


def test_totally_geodesic_is_isotropic(f3_point):
    report = isotropy_mu(f3_point)
    assert report.mu == pytest.approx(0.0, abs=1e-7)
    assert report.identity_residual < 1e-12
    assert j_isotropy_lambda(f3_point).lambda_ == pytest.approx(0.0, abs=1e-6)


def test_f7_is_not_isotropic(f7_point):
    report = isotropy_mu(f7_point)
    assert report.mu is None
    assert report.max_deviation > 0.01
    assert report.samples == 512 + 13


def test_f7_is_j_parallel(f7_point):
    report = j_isotropy_lambda(f7_point)
    assert report.lambda_ == pytest.approx(0.0, abs=1e-6)
    assert polarized_jisotropy_check(f7_point, lam=report.lambda_) < 1e-5
    assert eq58_residual(f7_point, report.lambda_) < 1e-5


def test_frame_values_of_nabla_p(f7_point, f8_point):
    assert eq613_residual(f7_point) < 1e-6
    assert eq613_residual(f8_point) < 1e-6


def test_bold_i_closed_form(f7_point):
    assert bold_i(f7_point).shape == (3, 3, 3, 3, 3)
    assert has_constant_angles(f7_point)
    assert eq614_residual(f7_point) < 1e-6


def test_cubic_form_maximum(f7_point, f8_point):
    f7 = maximize_cubic_form(f7_point)
    assert f7.value == pytest.approx(math.sqrt(3) / 6, abs=1e-9)
    assert f7.critical_residual < 1e-8
    assert f7.diagonal_residual < 1e-8
    np.testing.assert_allclose(f7.basis_coords @ f7.basis_coords.T, np.eye(3), atol=1e-12)
    f8 = maximize_cubic_form(f8_point)
    assert f8.value == pytest.approx(1 / math.sqrt(3), abs=1e-9)


def test_cubic_form_on_totally_geodesic(f3_point):
    result = maximize_cubic_form(f3_point)
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(result.vector) == pytest.approx(1.0)


def test_sectional_curvatures(f7_point, f8_point):
    assert sectional_curvature(f7_point) == pytest.approx(3 / 16, abs=1e-7)
    assert sectional_curvature(f8_point) == pytest.approx(0.0, abs=1e-7)
    assert sectional_gauss_residual(f7_point) < 1e-7
    assert sectional_gauss_residual(f8_point) < 1e-7
    frame = f7_point.frame.frame.frame
    assert sectional_curvature(f7_point, plane=(frame[0], frame[1])) == pytest.approx(3 / 16, abs=1e-7)
    assert sectional_curvature(catalog("f7"), (0.0, 0.0, 0.0), plane=([1, 0, 0], [0, 2, 0])) == pytest.approx(
        3 / 16, abs=1e-7
    )


def test_sectional_curvature_errors(f7_point, f3_point):
    frame = f7_point.frame.frame.frame
    with pytest.raises(DegenerateChartError):
        sectional_curvature(f7_point, plane=([1, 0, 0], [2, 0, 0]))
    with pytest.raises(TangencyError):
        sectional_curvature(f7_point, plane=(frame[0], apply_J(frame[1])))
    with pytest.raises(BasePointMismatchError):
        sectional_curvature(f3_point, plane=(frame[0], frame[1]))


def test_angle_relations_exact():
    relations = angle_relations_check((0, sympy.pi / 3, 2 * sympy.pi / 3))
    assert all(r == 0 for r in relations.lambda_residuals)
    assert relations.cyclic_sum == 0
    assert all(p == 0 for p in relations.product_forms)


def test_angle_relations_cyclic_sum_vanishes():
    rng = np.random.default_rng(4)
    for a, b in rng.uniform(0, math.pi, size=(20, 2)):
        relations = angle_relations_check((a, b, -a - b))
        assert relations.cyclic_sum == pytest.approx(0.0, abs=1e-14)


def test_classification_cubic():
    cubic = classification_cubic()
    assert cubic.polynomial.all_coeffs() == [32, 0, -6, 1]
    assert cubic.roots == {sympy.Rational(1, 4): 2, sympy.Rational(-1, 2): 1}
    assert cubic.curvatures[sympy.Rational(1, 4)] == sympy.Rational(3, 16)
    assert cubic.curvatures[sympy.Rational(-1, 2)] == 0


@pytest.mark.parametrize("h123", [0.25, -0.5])
def test_cubic_closure(h123):
    assert cubic_closure_residual(h123) == 0.0


@pytest.mark.parametrize(
    "coefficients,expected",
    [
        ((32, 0, -6, 1), [(-0.5, 1), (0.25, 2)]),
        ((1, 0, -7, 6), [(-3.0, 1), (1.0, 1), (2.0, 1)]),
        ((1, 0, 0, -8), [(2.0, 1)]),
        ((1, -3, 3, -1), [(1.0, 3)]),
    ],
)
def test_depressed_cubic_roots(coefficients, expected):
    roots = depressed_cubic_roots(*coefficients)
    assert [m for _, m in roots] == [m for _, m in expected]
    np.testing.assert_allclose([r for r, _ in roots], [r for r, _ in expected], atol=1e-12)


@pytest.mark.parametrize("name", ["f7", "f8"])
@pytest.mark.parametrize("chart", [(0.0, 0.0, 0.0), (0.1, -0.2, 0.15), (-0.3, 0.05, 0.25)])
def test_differentiated_j_isotropy(name, chart):
    assert prop42_residual(catalog(name), chart) < 1e-5
