"""Pointwise invariants of a Lagrangian immersion built on a LagrangianPoint.

Isotropy and J-isotropy functionals, the polarised J-isotropy tensor, the
differentiated condition with its I tensor, the cubic form maximum,
sectional curvature and the angle relations behind the classification.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import sympy

from nkverify.dsl.types import ImmersionDescriptor
from nkverify.errors import (
    BasePointMismatchError,
    ConvergenceError,
    DegenerateChartError,
    LambdaUnavailableError,
    TangencyError,
)
from nkverify.geometry.lagrangian import (
    SQRT3,
    LagrangianPoint,
    gram,
    lagrangian_point,
    normal_curvature_from_tangent,
)
from nkverify.geometry.types import TangentVector

ISOTROPY_SAMPLES = 512
CONSTANCY_TOLERANCE = 1e-6
CRITICAL_TOLERANCE = 1e-8
ASCENT_ITERATIONS = 5000
NEWTON_ITERATIONS = 20


def _point(source: ImmersionDescriptor | LagrangianPoint, chart_point=None) -> LagrangianPoint:
    if isinstance(source, LagrangianPoint):
        return source
    return lagrangian_point(source, chart_point)


def _cyclic(tensor: np.ndarray, *patterns: str) -> np.ndarray:
    return tensor + sum(np.einsum(pattern, tensor) for pattern in patterns)


# ---------------------------------------------------------------------------
# isotropy
# ---------------------------------------------------------------------------

_AXES_AND_DIAGONALS = np.array(
    [
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [1, 1, 0],
        [1, -1, 0],
        [1, 0, 1],
        [1, 0, -1],
        [0, 1, 1],
        [0, 1, -1],
        [1, 1, 1],
        [1, 1, -1],
        [1, -1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)


def sphere_directions(n: int = ISOTROPY_SAMPLES) -> np.ndarray:
    """Fibonacci lattice of n unit vectors followed by the 13 axis and diagonal directions."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = i * math.pi * (3 - math.sqrt(5))
    lattice = np.column_stack((r * np.cos(phi), r * np.sin(phi), z))
    extra = _AXES_AND_DIAGONALS / np.linalg.norm(_AXES_AND_DIAGONALS, axis=1)[:, None]
    return np.concatenate((lattice, extra))


@dataclass(frozen=True)
class IsotropyReport:
    mu: float | None
    lambda_: float | None
    max_deviation: float
    samples: int
    identity_residual: float | None = None


def _orthonormal_pairs(directions: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    pairs = [(np.eye(3)[a], np.eye(3)[b]) for a, b in itertools.permutations(range(3), 2)]
    for x, y in zip(directions[:-1:16], directions[1::16]):
        y = y - (y @ x) * x
        norm = np.linalg.norm(y)
        if norm > 1e-6:
            pairs.append((x, y / norm))
    return pairs


def isotropy_mu(
    source: ImmersionDescriptor | LagrangianPoint,
    chart_point=None,
    n_samples: int = ISOTROPY_SAMPLES,
    tol: float = CONSTANCY_TOLERANCE,
) -> IsotropyReport:
    """|h(v, v)|^2 over sampled unit tangents; mu exists when it is constant within tol."""
    point = _point(source, chart_point)
    h = point.h.coefficients
    v = sphere_directions(n_samples)
    hvv = np.einsum("si,sj,ijk->sk", v, v, h)
    values = np.sum(hvv * hvv, axis=1)
    deviation = float(values.max() - values.min())
    if deviation > tol:
        return IsotropyReport(None, None, deviation, len(v))
    mu = math.sqrt(max(float(values.mean()), 0.0))
    identity = 0.0
    for x, y in _orthonormal_pairs(v):
        hxx, hyy, hxy = point.h(x, x), point.h(y, y), point.h(x, y)
        identity = max(identity, abs(mu * mu - hxx @ hyy - 2 * hxy @ hxy))
    return IsotropyReport(mu, None, deviation, len(v), identity)


def j_isotropy_values(point: LagrangianPoint, directions: np.ndarray) -> np.ndarray:
    return np.einsum("ijkl,si,sj,sk,sl->s", point.nabla_h, directions, directions, directions, directions)


def j_isotropy_lambda(
    source: ImmersionDescriptor | LagrangianPoint,
    chart_point=None,
    n_samples: int = ISOTROPY_SAMPLES,
    tol: float = CONSTANCY_TOLERANCE,
) -> IsotropyReport:
    """g((nabla h)(v, v, v), Jv) over sampled unit tangents; lambda exists when it is constant within tol."""
    point = _point(source, chart_point)
    v = sphere_directions(n_samples)
    values = j_isotropy_values(point, v)
    deviation = float(values.max() - values.min())
    lam = float(values.mean()) if deviation <= tol else None
    return IsotropyReport(None, lam, deviation, len(v))


# ---------------------------------------------------------------------------
# polarised J-isotropy and its derivative
# ---------------------------------------------------------------------------


def eq42_tensor(point: LagrangianPoint, lam: float) -> np.ndarray:
    """Left side of the polarised J-isotropy condition at [y, z, w, v] over the adapted frame."""
    t = point.tensors
    h = point.h.coefficients
    delta = np.eye(3)
    hg = np.einsum("yzm,wvm->yzwv", h, t.g)
    p_terms = np.einsum("yz,wv->yzwv", t.p, t.pj) - np.einsum("yz,wv->yzwv", t.pj, t.p)
    metric_terms = np.einsum("yz,wv->yzwv", delta, delta)
    return (
        12 * point.nabla_h
        + 3 * _cyclic(hg, "zwyv->yzwv", "wyzv->yzwv")
        + 2 * _cyclic(p_terms, "ywvz->yzwv", "yvzw->yzwv")
        - 4 * lam * _cyclic(metric_terms, "ywvz->yzwv", "yvzw->yzwv")
    )


def polarized_jisotropy_check(
    source: ImmersionDescriptor | LagrangianPoint,
    chart_point=None,
    lam: float = 0.0,
    n_random: int = 16,
    seed: int = 0,
) -> float:
    """Largest |eq42| over all frame 4-tuples and n_random random unit 4-tuples."""
    point = _point(source, chart_point)
    tensor = eq42_tensor(point, lam)
    residual = float(np.max(np.abs(tensor)))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        y, z, w, v = (u / np.linalg.norm(u) for u in rng.standard_normal((4, 3)))
        residual = max(residual, abs(float(np.einsum("yzwv,y,z,w,v->", tensor, y, z, w, v))))
    return residual


def bold_i(point: LagrangianPoint) -> np.ndarray:
    """The I(X, Y, Z, W, V) tensor for constant lambda, at [x, y, z, w, v]."""
    t = point.tensors
    ph, pjh, p, pj = t.ph, t.pjh, t.p, t.pj
    npz, npjz = t.nabla_p_h, t.nabla_pj_h
    terms = (
        np.einsum("yxz,wv->xyzwv", ph, pj)
        + np.einsum("xyz,wv->xyzwv", npz, pj)
        + np.einsum("yz,wxv->xyzwv", p, pjh)
        + np.einsum("yz,xwv->xyzwv", p, npjz)
        - np.einsum("xyz,wv->xyzwv", ph, pj)
        - np.einsum("yxz,wv->xyzwv", npz, pj)
        - np.einsum("xz,wyv->xyzwv", p, pjh)
        - np.einsum("xz,ywv->xyzwv", p, npjz)
        - np.einsum("yxz,wv->xyzwv", pjh, p)
        - np.einsum("xyz,wv->xyzwv", npjz, p)
        - np.einsum("yz,wxv->xyzwv", pj, ph)
        - np.einsum("yz,xwv->xyzwv", pj, npz)
        + np.einsum("xyz,wv->xyzwv", pjh, p)
        + np.einsum("yxz,wv->xyzwv", npjz, p)
        + np.einsum("xz,wyv->xyzwv", pj, ph)
        + np.einsum("xz,ywv->xyzwv", pj, npz)
    )
    return _cyclic(terms, "xywvz->xyzwv", "xyvzw->xyzwv")


def eq49_tensor(point: LagrangianPoint) -> np.ndarray:
    """The differentiated J-isotropy condition at [x, y, z, w, v] for constant lambda.

    R comes from the Gauss equation and R_perp from its relation to R on a
    Lagrangian submanifold.
    """
    t = point.tensors
    h = point.h.coefficients
    nh = point.nabla_h
    delta = np.eye(3)
    r = point.gauss_curvature
    r_perp = normal_curvature_from_tangent(point)

    ricci_identity = 12 * (
        np.einsum("zwm,xymv->xyzwv", h, r_perp)
        - np.einsum("xyzn,nwv->xyzwv", r, h)
        - np.einsum("xywn,znv->xyzwv", r, h)
    )
    nabla_terms = 9 * (np.einsum("yzwm,xvm->xyzwv", nh, t.g) - np.einsum("xzwm,yvm->xyzwv", nh, t.g))
    h_terms = 3 * (np.einsum("yzw,xv->xyzwv", h, delta) - np.einsum("xzw,yv->xyzwv", h, delta))
    paired = (
        np.einsum("xzv,yw->xyzwv", h, delta)
        - np.einsum("yzv,xw->xyzwv", h, delta)
        + np.einsum("yz,xwv->xyzwv", t.p, t.p_g)
        - np.einsum("xz,ywv->xyzwv", t.p, t.p_g)
        + np.einsum("yz,xwv->xyzwv", t.jp, t.jp_g)
        - np.einsum("xz,ywv->xyzwv", t.jp, t.jp_g)
    )
    return ricci_identity + nabla_terms + h_terms + _cyclic(paired, "xywzv->xyzwv") + 2 * bold_i(point)


def prop42_residual(
    source: ImmersionDescriptor | LagrangianPoint,
    chart_point=None,
    tol: float = CONSTANCY_TOLERANCE,
) -> float:
    """Largest |eq49| over the 243 frame 5-tuples; needs a constant J-isotropy lambda."""
    point = _point(source, chart_point)
    report = j_isotropy_lambda(point, tol=tol)
    if report.lambda_ is None:
        raise LambdaUnavailableError(
            f"{point.descriptor.name} is not J-isotropic at {point.chart_point} (deviation {report.max_deviation:.3e})"
        )
    return float(np.max(np.abs(eq49_tensor(point))))


def eq613_residual(point: LagrangianPoint) -> float:
    """g((nabla~_{e_i} P) e_j, e_k) and its PJ analogue against (lambda_j - lambda_k)/(2 sqrt3) on cyclic triples."""
    t = point.tensors
    lam, mu = point.lam, point.mu
    worst = 0.0
    for i, j, k in ((0, 1, 2), (1, 2, 0)):
        worst = max(
            worst,
            abs(t.nabla_p[i, j, k] - (lam[j] - lam[k]) / (2 * SQRT3)),
            abs(t.nabla_pj[i, j, k] - (mu[j] - mu[k]) / (2 * SQRT3)),
        )
    return worst


def eq614_expected(point: LagrangianPoint) -> float:
    lam, mu = point.lam, point.mu
    h123 = point.h.coefficients[0, 1, 2]
    bracket = 1 + 2 * (lam[0] * lam[2] + mu[0] * mu[2]) + (lam[0] * lam[1] + mu[0] * mu[1])
    return float(-bracket * h123 + (lam[0] * mu[1] - lam[1] * mu[0]) / (2 * SQRT3))


def eq614_residual(point: LagrangianPoint) -> float:
    """I(e_2, e_1, e_1, e_1, e_3) against its closed form in the angles and h_12^3."""
    return abs(float(bold_i(point)[1, 0, 0, 0, 2]) - eq614_expected(point))


# ---------------------------------------------------------------------------
# cubic form
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CubicMaximum:
    vector: np.ndarray  # maximiser in adapted-frame coordinates
    tangent: TangentVector
    value: float
    basis: tuple[TangentVector, TangentVector, TangentVector]
    basis_coords: np.ndarray  # rows in adapted-frame coordinates
    mus: tuple[float, float, float]
    critical_residual: float
    diagonal_residual: float


def _cubic(h: np.ndarray, v: np.ndarray) -> float:
    return float(np.einsum("ijk,i,j,k->", h, v, v, v))


def _cubic_gradient(h: np.ndarray, v: np.ndarray) -> np.ndarray:
    return 3 * np.einsum("ijk,j,k->i", h, v, v)


def _ascend(h: np.ndarray, start: np.ndarray, eta: float) -> np.ndarray:
    v = start / np.linalg.norm(start)
    for _ in range(ASCENT_ITERATIONS):
        grad = _cubic_gradient(h, v)
        tangent = grad - (v @ grad) * v
        if np.linalg.norm(tangent) < 1e-12:
            break
        v = v + eta * tangent
        v /= np.linalg.norm(v)
    for _ in range(NEWTON_ITERATIONS):
        grad = _cubic_gradient(h, v)
        projector = np.eye(3) - np.outer(v, v)
        tangent = projector @ grad
        if np.linalg.norm(tangent) < 1e-15:
            break
        hessian = projector @ (6 * np.einsum("ijk,i->jk", h, v) - 3 * _cubic(h, v) * np.eye(3)) @ projector
        step = np.linalg.lstsq(hessian + np.outer(v, v), -tangent, rcond=None)[0]
        v = v + step
        v /= np.linalg.norm(v)
    return v


def maximize_cubic_form(source: ImmersionDescriptor | LagrangianPoint, chart_point=None) -> CubicMaximum:
    """Maximum of F(v) = g(h(v, v), Jv) on the unit tangent sphere and a basis with h(e_1, e_j) = mu_j J e_j."""
    point = _point(source, chart_point)
    h = point.h.coefficients
    scale = float(np.abs(h).sum())
    if scale < 1e-12:
        best = np.array([1.0, 0.0, 0.0])
    else:
        eta = 0.5 / scale
        starts = [np.array(s, dtype=float) for s in itertools.product((-1, 0, 1), repeat=3) if any(s)]
        candidates = [_ascend(h, s, eta) for s in starts]
        best = max(candidates, key=lambda v: _cubic(h, v))
    value = _cubic(h, best)
    critical = float(np.linalg.norm(_cubic_gradient(h, best) - 3 * value * best))
    if critical > CRITICAL_TOLERANCE or value < -CRITICAL_TOLERANCE:
        raise ConvergenceError(f"cubic form ascent did not converge at {point.chart_point} (residual {critical:.3e})")

    operator = np.einsum("ijk,i->jk", h, best)
    _, _, vt = np.linalg.svd(best[None, :])
    complement = vt[1:].T
    values, vectors = np.linalg.eigh(complement.T @ operator @ complement)
    rows = np.vstack((best, (complement @ vectors).T))
    mus = (value, float(values[0]), float(values[1]))
    diagonal = float(np.max(np.abs(rows @ operator @ rows.T - np.diag(mus))))

    e = point.frame.coords
    base = point.frame.frame.image
    tangents = tuple(TangentVector.from_coords(base, row @ e) for row in rows)
    logging.debug(f"Cubic form maximum {value:.6g} at {point.chart_point}")
    return CubicMaximum(best, tangents[0], max(value, 0.0), tangents, rows, mus, critical, diagonal)


# ---------------------------------------------------------------------------
# sectional curvature
# ---------------------------------------------------------------------------


def _frame_components(point: LagrangianPoint, vector) -> np.ndarray:
    if not isinstance(vector, TangentVector):
        return np.asarray(vector, dtype=float)
    if vector.base != point.frame.frame.image:
        raise BasePointMismatchError(f"{vector} is not based at {point.frame.frame.image}")
    e = point.frame.coords
    coords = vector.coords.astype(float)
    components = gram(coords[None, :], e)[0]
    if np.linalg.norm(coords - components @ e) > 1e-8 * max(1.0, np.linalg.norm(coords)):
        raise TangencyError(f"{vector} is not tangent to {point.descriptor.name} at {point.chart_point}")
    return components


def sectional_curvature(
    source: ImmersionDescriptor | LagrangianPoint,
    chart_point=None,
    plane=None,
) -> float:
    """K(X, Y) = R(X, Y, Y, X) / (|X|^2 |Y|^2 - g(X, Y)^2) with R from the Gauss equation."""
    point = _point(source, chart_point)
    if plane is None:
        plane = (np.eye(3)[0], np.eye(3)[1])
    x, y = (_frame_components(point, v) for v in plane)
    area = (x @ x) * (y @ y) - (x @ y) ** 2
    if area <= 1e-14 * (x @ x) * (y @ y):
        raise DegenerateChartError("the plane is degenerate")
    numerator = float(np.einsum("xyzw,x,y,z,w->", point.gauss_curvature, x, y, y, x))
    return numerator / area


def has_constant_angles(point: LagrangianPoint, tol: float = CONSTANCY_TOLERANCE) -> bool:
    """e_i(theta_j) = -h_jj^i, so the angles are stationary exactly when every h_jj^i vanishes."""
    return float(np.max(np.abs(np.einsum("jji->ij", point.h.coefficients)))) < tol


def sectional_gauss_residual(point: LagrangianPoint) -> float:
    """K(e_i, e_j) against 5/12 + (1/3)(lambda_i lambda_j + mu_i mu_j) - (h_ij^k)^2 for constant-angle frames."""
    lam, mu, h = point.lam, point.mu, point.h.coefficients
    eye = np.eye(3)
    worst = 0.0
    for i, j in itertools.combinations(range(3), 2):
        k = 3 - i - j
        expected = 5 / 12 + (lam[i] * lam[j] + mu[i] * mu[j]) / 3 - h[i, j, k] ** 2
        worst = max(worst, abs(sectional_curvature(point, plane=(eye[i], eye[j])) - expected))
    return worst


# ---------------------------------------------------------------------------
# angle relations and the classification cubic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngleRelations:
    lambda_residuals: tuple  # lambda minus each cyclic expression
    cyclic_sum: object  # sum of the three expressions, identically zero
    product_forms: tuple  # cos(theta_j - theta_k) sin(theta_j + theta_k - 2 theta_i)


def angle_relations_check(theta, lam=0) -> AngleRelations:
    """Evaluate the three cyclic lambda relations on an angle triple.

    Exact (sympy) angles give exact, simplified results; floats give floats.
    """
    exact = any(isinstance(value, sympy.Basic) for value in theta)
    cos, sin = (sympy.cos, sympy.sin) if exact else (math.cos, math.sin)
    finish = sympy.simplify if exact else float
    t = [sympy.sympify(value) if exact else float(value) for value in theta]
    lam_c = [cos(2 * value) for value in t]
    mu_c = [sin(2 * value) for value in t]
    expressions = []
    products = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        expression = (lam_c[i] * mu_c[j] - lam_c[j] * mu_c[i] + lam_c[i] * mu_c[k] - lam_c[k] * mu_c[i]) / 6
        expressions.append(expression)
        products.append(finish(cos(t[k] - t[j]) * sin(t[k] + t[j] - 2 * t[i])))
    residuals = tuple(finish(lam - expression) for expression in expressions)
    return AngleRelations(residuals, finish(sum(expressions)), tuple(products))


@dataclass(frozen=True)
class ClassificationCubic:
    polynomial: sympy.Poly
    roots: dict  # root -> multiplicity
    curvatures: dict  # root -> sectional curvature


def classification_cubic(theta=(0, sympy.pi / 3, 2 * sympy.pi / 3)) -> ClassificationCubic:
    """The cubic in h_12^3 obtained when lambda = 0, the angles are constant and only h_12^3 survives.

    Coefficients are derived exactly from the angle triple and normalised to
    a leading coefficient of 32.
    """
    x = sympy.Symbol("x")
    t = [sympy.sympify(value) for value in theta]
    lam = [sympy.cos(2 * value) for value in t]
    mu = [sympy.sin(2 * value) for value in t]
    curvature = sympy.Rational(5, 12) + (lam[0] * lam[1] + mu[0] * mu[1]) / 3 - x**2
    bracket = 1 + 2 * (lam[0] * lam[2] + mu[0] * mu[2]) + (lam[0] * lam[1] + mu[0] * mu[1])
    expression = (
        -24 * curvature * x
        + x / 2
        + sympy.sqrt(3) / 2 * (lam[0] * mu[1] - lam[1] * mu[0])
        - 2 * bracket * x
    )
    poly = sympy.Poly(sympy.nsimplify(sympy.expand(expression)), x)
    poly = sympy.Poly(sympy.expand(poly.as_expr() * 32 / poly.LC()), x)
    roots = sympy.roots(poly)
    curvatures = {root: sympy.nsimplify(curvature.subs(x, root)) for root in roots}
    return ClassificationCubic(poly, roots, curvatures)


def cubic_closure_residual(h123: float) -> float:
    return abs(32 * h123**3 - 6 * h123 + 1)


def depressed_cubic_roots(a: float, b: float, c: float, d: float, tol: float = 1e-12) -> list[tuple[float, int]]:
    """Real roots of a x^3 + b x^2 + c x + d with multiplicities, via the depressed cubic t^3 + p t + q."""
    p = (3 * a * c - b * b) / (3 * a * a)
    q = (2 * b**3 - 9 * a * b * c + 27 * a * a * d) / (27 * a**3)
    shift = -b / (3 * a)
    discriminant = -(4 * p**3 + 27 * q * q)
    if abs(discriminant) <= tol * max(1.0, abs(p) ** 3, q * q):
        if abs(p) <= tol:
            return [(shift, 3)]
        simple, double = 3 * q / p, -3 * q / (2 * p)
        return sorted([(simple + shift, 1), (double + shift, 2)])
    if discriminant > 0:
        radius = 2 * math.sqrt(-p / 3)
        angle = math.acos(max(-1.0, min(1.0, 3 * q / (p * radius))))
        roots = [radius * math.cos((angle - 2 * math.pi * k) / 3) + shift for k in range(3)]
        return sorted((root, 1) for root in roots)
    offset = math.sqrt(q * q / 4 + p**3 / 27)
    return [(float(np.cbrt(-q / 2 + offset) + np.cbrt(-q / 2 - offset)) + shift, 1)]
