import math
from pathlib import Path

import numpy as np
import pytest

from nkverify.dsl import catalog, catalog_names, evaluate, f8_reference, hessian, jacobian, load, parse, pretty
from nkverify.dsl.types import Exp, Mul
from nkverify.errors import ParseError, UnknownImmersionError
from nkverify.geometry.quaternion import ImaginaryQuaternion, Quaternion, conjugate, exp_im, mul

FIXTURES = Path(__file__).parent / "fixtures"
SQRT1_2 = 1 / math.sqrt(2)


def _pair(point) -> np.ndarray:
    return np.concatenate(point.as_arrays()).astype(float)


def _q(q: Quaternion) -> np.ndarray:
    return np.array(tuple(q), dtype=float)


def test_parse_catalog_source():
    desc = catalog("f7")
    assert desc.name == "f7"
    assert desc.variables == ("x", "y", "z")
    assert [name for name, _ in desc.bindings] == ["u", "i", "j"]
    assert isinstance(desc.left, Mul)
    assert isinstance(dict(desc.bindings)["u"], Exp)


def test_comments_and_blank_lines():
    desc = parse(
        """# leading comment
immersion c

vars a b c   # chart names are free
left = exp(a, 2*b - 1/2, pi/4)  # affine arguments
right = exp(0, 0, sqrt3*c)
"""
    )
    assert desc.variables == ("a", "b", "c")
    assert desc.left.args[1].gradient() == (0.0, 2.0, 0.0)
    assert float(desc.left.args[1].constant) == -0.5


def test_truncated_inverse_reports_column():
    with pytest.raises(ParseError) as e:
        parse("immersion t\nvars x y z\nlet U = exp(x, y, z)\nleft = U * inv(\nright = U\n")
    assert e.value.line == 4
    assert e.value.column == 15


def test_non_affine_argument():
    with pytest.raises(ParseError) as e:
        parse("immersion t\nvars x y z\nleft = exp(x*x, 0, 0)\nright = exp(0, 0, 0)\n")
    assert "non-affine" in e.value.message
    assert e.value.line == 3


@pytest.mark.parametrize(
    "text,message",
    [
        ("immersion t\nvars x y z\nleft = w\nright = w\n", "unbound identifier w"),
        ("immersion t\nvars x y z\nleft = x\nright = x\n", "chart variable"),
        ("immersion t\nvars x y z\nleft = const(1, 1, 0, 0)\nright = const(1, 0, 0, 0)\n", "not a unit quaternion"),
        ("immersion t\nvars x y z\nleft = exp(x/y, 0, 0)\nright = exp(0, 0, 0)\n", "not affine"),
        ("immersion t\nvars x y z\nleft = exp(0, 0, 0)\n", "missing 'right"),
        ("vars x y z\n", "must start with"),
        ("immersion t\nvars x x z\n", "distinct"),
        ("immersion t\nvars x y z\nleft = exp(0, 0, 0) $\n", "unexpected character"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert message in str(e.value)


def test_load_reports_line_of_bad_file():
    with pytest.raises(ParseError) as e:
        load(FIXTURES / "bad-syntax.imm")
    assert e.value.line == 3


def test_unknown_catalog_name():
    with pytest.raises(UnknownImmersionError):
        catalog("f9")
    assert catalog_names() == [f"f{k}" for k in range(1, 9)]


@pytest.mark.parametrize(
    "name,left,right",
    [
        ("f1", [1, 0, 0, 0], [1, 0, 0, 0]),
        ("f2", [1, 0, 0, 0], [1, 0, 0, 0]),
        ("f4", [1, 0, 0, 0], [0, 1, 0, 0]),
        ("f7", [0, 1, 0, 0], [0, 0, 1, 0]),
        ("f8", [1, 0, 0, 0], [SQRT1_2, 0, -SQRT1_2, 0]),
    ],
)
def test_evaluate_at_origin(name, left, right):
    np.testing.assert_allclose(_pair(evaluate(catalog(name), (0, 0, 0))), left + right, atol=1e-15)


def test_f5_formula():
    chart = (0.1, -0.3, 0.25)
    u = exp_im(ImaginaryQuaternion(*chart))
    expected_left = mul(mul(u, Quaternion(0, 1, 0, 0)), conjugate(u))
    point = evaluate(catalog("f5"), chart)
    np.testing.assert_allclose(_q(point.p), _q(expected_left), atol=1e-12)
    np.testing.assert_allclose(_q(point.q), _q(conjugate(u)), atol=1e-12)


def test_f8_matches_trigonometric_components():
    grid = np.linspace(-1.0, 1.0, 10)
    desc = catalog("f8")
    for chart in np.array(np.meshgrid(grid, grid, grid)).reshape(3, -1).T:
        p, q = f8_reference(chart)
        point = evaluate(desc, chart)
        np.testing.assert_allclose(point.p.as_array(), p, atol=1e-12)
        np.testing.assert_allclose(point.q.as_array(), q, atol=1e-12)


def test_evaluate_is_unit():
    rng = np.random.default_rng(9)
    for name in catalog_names():
        for chart in rng.uniform(-0.4, 0.4, size=(10, 3)):
            p, q = evaluate(catalog(name), chart).as_arrays()
            assert np.linalg.norm(p) == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.norm(q) == pytest.approx(1.0, abs=1e-12)


def test_jacobian_examples():
    (dp, dq), _, _ = jacobian(catalog("f1"), (0, 0, 0))
    np.testing.assert_allclose(_q(dp), 0.0, atol=1e-15)
    np.testing.assert_allclose(_q(dq), [0, 1, 0, 0], atol=1e-15)
    (dp, dq), _, _ = jacobian(catalog("f7"), (0, 0, 0))
    np.testing.assert_allclose(_q(dp), 0.0, atol=1e-15)
    np.testing.assert_allclose(_q(dq), [0, 0, 0, 2], atol=1e-15)


def test_jacobian_spans_left_factor_for_f2():
    columns = jacobian(catalog("f2"), (0, 0, 0))
    np.testing.assert_allclose(np.array([_q(dp) for dp, _ in columns]), np.eye(4)[1:], atol=1e-15)
    np.testing.assert_allclose(np.array([_q(dq) for _, dq in columns]), 0.0, atol=1e-15)


@pytest.mark.parametrize("name", [f"f{k}" for k in range(1, 9)])
def test_jacobian_against_finite_differences(name):
    desc = catalog(name)
    rng = np.random.default_rng(17)
    step = 1e-6
    for chart in rng.uniform(-0.4, 0.4, size=(10, 3)):
        columns = jacobian(desc, chart)
        for a in range(3):
            offset = np.zeros(3)
            offset[a] = step
            fd = (_pair(evaluate(desc, chart + offset)) - _pair(evaluate(desc, chart - offset))) / (2 * step)
            exact = np.concatenate([_q(columns[a][0]), _q(columns[a][1])])
            np.testing.assert_allclose(exact, fd, atol=1e-6)


def test_jacobian_columns_are_tangent():
    desc = catalog("f8")
    chart = (0.2, -0.1, 0.3)
    point = evaluate(desc, chart)
    for dp, dq in jacobian(desc, chart):
        assert abs(mul(conjugate(point.p), dp).w) < 1e-10
        assert abs(mul(conjugate(point.q), dq).w) < 1e-10


def test_hessian_is_symmetric():
    second = hessian(catalog("f7"), (0.1, 0.2, -0.3))
    for a in range(3):
        for b in range(3):
            np.testing.assert_allclose(_q(second[a][b][0]), _q(second[b][a][0]), atol=1e-12)
            np.testing.assert_allclose(_q(second[a][b][1]), _q(second[b][a][1]), atol=1e-12)


@pytest.mark.parametrize("name", [f"f{k}" for k in range(1, 9)])
def test_pretty_round_trip(name):
    desc = catalog(name)
    again = parse(pretty(desc))
    assert again == desc
    chart = (0.3, -0.2, 0.1)
    np.testing.assert_allclose(_pair(evaluate(again, chart)), _pair(evaluate(desc, chart)), atol=1e-15)


def test_fixture_with_renamed_variables():
    flat = load(FIXTURES / "f8-copy.imm")
    assert flat.name == "flat"
    chart = (0.25, -0.1, 0.3)
    np.testing.assert_allclose(_pair(evaluate(flat, chart)), _pair(evaluate(catalog("f8"), chart)), atol=1e-15)
