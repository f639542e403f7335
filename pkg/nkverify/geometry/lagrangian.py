"""Induced geometry of a Lagrangian immersion at a chart point.

Frames are stored as 3x6 arrays of Lie coordinates (one row per frame
vector) together with their chart coefficients C, so that e_i = sum_a
C[i, a] d/dx_a. Every frame-indexed table uses 0-based indices: h[i, j, k]
is g(h(e_i, e_j), J e_k).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import orthogonal_procrustes

from nkverify.dsl.expr import evaluate, jets
from nkverify.dsl.types import ImmersionDescriptor
from nkverify.errors import ComputationIntegrityError, DegenerateChartError, NotLagrangianError
from nkverify.geometry.quaternion import UnitQuaternion, qconj_array, qmul_array
from nkverify.geometry.structure import (
    apply,
    connection_arr,
    covariant_derivative_along,
    curvature_arr,
    g_tensor_arr,
    j_arr,
    nabla_p_arr,
    p_arr,
    structure,
)
from nkverify.geometry.types import ManifoldPoint, TangentVector

LAGRANGIAN_TOLERANCE = 1e-8
RANK_TOLERANCE = 1e-12
CLUSTER_GAP = 1e-7
DIAGONAL_TOLERANCE = 1e-6
DEGENERACY_TOLERANCE = 1e-6
MATCH_TOLERANCE = 1e-3
SYMMETRY_TOLERANCE = 1e-6
CONSTANT_H_TOLERANCE = 1e-7
STENCIL_STEP = 1e-4

SQRT3 = math.sqrt(3.0)

EPSILON = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPSILON[_i, _j, _k] = 1.0
    EPSILON[_j, _i, _k] = -1.0


def _metric() -> np.ndarray:
    return structure("float").metric


def gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """g(a_i, b_j) for two stacks of Lie coordinate rows."""
    return np.einsum("ia,ab,jb->ij", a, _metric(), b)


def circular_distance(a: float, b: float, period: float = math.pi) -> float:
    d = (a - b) % period
    return min(d, period - d)


def _wrap(delta, period: float = math.pi):
    """Representative of delta modulo period in [-period/2, period/2)."""
    return (np.asarray(delta) + period / 2) % period - period / 2


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FramePoint:
    """An orthonormal tangent frame of the immersion at one chart point."""

    chart_point: tuple[float, float, float]
    image: ManifoldPoint
    frame: tuple[TangentVector, TangentVector, TangentVector]
    jacobian: tuple[TangentVector, TangentVector, TangentVector]
    coefficients: np.ndarray = field(repr=False)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array([v.coords for v in self.frame], dtype=float)

    @cached_property
    def jacobian_coords(self) -> np.ndarray:
        return np.array([v.coords for v in self.jacobian], dtype=float)

    def with_frame(self, coords: np.ndarray, coefficients: np.ndarray) -> FramePoint:
        return FramePoint(
            self.chart_point,
            self.image,
            tuple(TangentVector.from_coords(self.image, row) for row in coords),
            self.jacobian,
            np.asarray(coefficients, dtype=float),
        )

    def orthonormality_residual(self) -> float:
        return float(np.max(np.abs(gram(self.coords, self.coords) - np.eye(3))))


def _lie_rows(value: np.ndarray, first: np.ndarray) -> np.ndarray:
    return qmul_array(qconj_array(value), first)


def frame_at(imm: ImmersionDescriptor, chart_point) -> FramePoint:
    """Pushforwards of the chart directions and a Gram-Schmidt orthonormal frame under g."""
    x = np.asarray(chart_point, dtype=float)
    left, right = jets(imm, x)
    image = ManifoldPoint(UnitQuaternion(*left.value), UnitQuaternion(*right.value))
    alpha = _lie_rows(left.value, left.first)
    beta = _lie_rows(right.value, right.first)
    jac = np.concatenate((alpha[:, 1:], beta[:, 1:]), axis=1)
    g_jac = gram(jac, jac)
    if np.linalg.eigvalsh(g_jac)[0] < RANK_TOLERANCE:
        raise DegenerateChartError(f"{imm.name} has rank < 3 at chart point {tuple(x)}")
    # lower-triangular inverse of the Cholesky factor is Gram-Schmidt in chart order
    coefficients = np.linalg.inv(np.linalg.cholesky(g_jac))
    frame = coefficients @ jac
    return FramePoint(
        tuple(float(c) for c in x),
        image,
        tuple(TangentVector.from_coords(image, row) for row in frame),
        tuple(TangentVector.from_coords(image, row) for row in jac),
        coefficients,
    )


def lagrangian_defect(fp: FramePoint) -> float:
    e = fp.coords
    return float(np.max(np.abs(gram(j_arr(e), e))))


def check_lagrangian(fp: FramePoint, tol: float = LAGRANGIAN_TOLERANCE) -> bool:
    return lagrangian_defect(fp) <= tol


def _require_lagrangian(fp: FramePoint, name: str) -> None:
    defect = lagrangian_defect(fp)
    if defect > LAGRANGIAN_TOLERANCE:
        raise NotLagrangianError(f"{name} is not Lagrangian at {fp.chart_point}: max |g(Je_i, e_j)| = {defect:.3e}")


# ---------------------------------------------------------------------------
# adapted frame
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    """Frame with P e_i = lambda_i e_i + mu_i J e_i and theta_i the angle functions."""

    frame: FramePoint
    theta: tuple[float, float, float]
    lambda_coef: tuple[float, float, float]
    mu_coef: tuple[float, float, float]
    degenerate: bool = False

    @property
    def coords(self) -> np.ndarray:
        return self.frame.coords

    @property
    def coefficients(self) -> np.ndarray:
        return self.frame.coefficients

    def adaptation_residual(self) -> float:
        e = self.coords
        target = np.array(self.lambda_coef)[:, None] * e + np.array(self.mu_coef)[:, None] * j_arr(e)
        diff = p_arr(e) - target
        return float(np.sqrt(np.max(np.einsum("ia,ab,ib->i", diff, _metric(), diff))))

    def orientation_residual(self) -> float:
        """max |sqrt3 J G(e_i, e_j) - sum_k eps_ij^k e_k| in g-norm."""
        e = self.coords
        jg = SQRT3 * j_arr(g_tensor_arr(e[:, None, :], e[None, :, :]))
        diff = jg - np.einsum("ijk,ka->ija", EPSILON, e)
        return float(np.sqrt(np.max(np.einsum("ija,ab,ijb->ij", diff, _metric(), diff))))

    def angle_sum_residual(self) -> float:
        return circular_distance(sum(self.theta), 0.0)


def _closest_to_axes(block: np.ndarray) -> np.ndarray:
    m = block.shape[1]
    rows = np.sort(np.argsort(-np.linalg.norm(block, axis=1), kind="stable")[:m])
    rotation, _ = orthogonal_procrustes(block[rows], np.eye(m))
    return block @ rotation


def _split_tables(e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pe = p_arr(e)
    return gram(pe, e), gram(pe, j_arr(e))


def _joint_eigenbasis(t: np.ndarray, s: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(t)
    cuts = [0] + [i + 1 for i in range(2) if values[i + 1] - values[i] > CLUSTER_GAP] + [3]
    blocks = []
    for start, stop in zip(cuts[:-1], cuts[1:]):
        block = vectors[:, start:stop]
        if stop - start > 1:
            s_block = block.T @ s @ block
            s_values, s_vectors = np.linalg.eigh(s_block)
            if s_values[-1] - s_values[0] > CLUSTER_GAP:
                block = block @ s_vectors
            else:
                block = _closest_to_axes(block)
        blocks.append(block)
    return np.concatenate(blocks, axis=1)


def _angles(lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    theta = (0.5 * np.arctan2(mu, lam)) % math.pi
    theta[np.abs(theta - math.pi) < 1e-9] = 0.0
    return theta


def _is_degenerate(theta) -> bool:
    return any(circular_distance(theta[a], theta[b]) < DEGENERACY_TOLERANCE for a, b in ((0, 1), (0, 2), (1, 2)))


def adapted_frame(fp: FramePoint) -> AdaptedFrame:
    """Jointly diagonalise the tangent and normal parts of P restricted to TM.

    With Pe = T(e) + J S(e), T and S are symmetric and commute on a Lagrangian
    tangent space; their joint eigenvectors give the frame of P e_i =
    cos 2theta_i e_i + sin 2theta_i J e_i. Angles are taken in [0, pi),
    sorted ascending, and the frame is oriented so that sqrt3 J G(e_1, e_2) = e_3.
    """
    e = fp.coords
    t, s = _split_tables(e)
    asymmetry = max(np.max(np.abs(t - t.T)), np.max(np.abs(s - s.T)))
    if asymmetry > DIAGONAL_TOLERANCE:
        raise ComputationIntegrityError(f"P splitting is not symmetric at {fp.chart_point} ({asymmetry:.3e})")
    t, s = (t + t.T) / 2, (s + s.T) / 2
    basis = _joint_eigenbasis(t, s)
    t_diag, s_diag = basis.T @ t @ basis, basis.T @ s @ basis
    off = max(np.max(np.abs(t_diag - np.diag(np.diag(t_diag)))), np.max(np.abs(s_diag - np.diag(np.diag(s_diag)))))
    if off > DIAGONAL_TOLERANCE:
        raise ComputationIntegrityError(f"joint diagonalisation of P failed at {fp.chart_point} ({off:.3e})")
    lam, mu = np.diag(t_diag).copy(), np.diag(s_diag).copy()
    radius = np.hypot(lam, mu)
    if np.max(np.abs(radius - 1.0)) > DIAGONAL_TOLERANCE:
        raise ComputationIntegrityError(f"P does not preserve TM + JTM at {fp.chart_point}")
    lam, mu = lam / radius, mu / radius
    theta = _angles(lam, mu)
    order = np.argsort(theta, kind="stable")
    rotation = basis.T[order]
    lam, mu, theta = lam[order], mu[order], theta[order]

    frame = rotation @ e
    for i in (0, 1):
        if frame[i, np.argmax(np.abs(frame[i]))] < 0:
            rotation[i] *= -1
            frame[i] *= -1
    orientation = SQRT3 * gram(j_arr(g_tensor_arr(frame[0], frame[1]))[None, :], frame[2:3])[0, 0]
    if abs(abs(orientation) - 1.0) > DIAGONAL_TOLERANCE:
        raise ComputationIntegrityError(f"sqrt3 JG(e_1, e_2) is not a unit frame vector at {fp.chart_point}")
    if orientation < 0:
        rotation[2] *= -1
        frame[2] *= -1

    degenerate = _is_degenerate(theta)
    if degenerate:
        logging.debug(f"Degenerate angles {tuple(theta)} at {fp.chart_point}")
    return AdaptedFrame(
        fp.with_frame(frame, rotation @ fp.coefficients),
        tuple(float(v) for v in theta),
        tuple(float(v) for v in lam),
        tuple(float(v) for v in mu),
        degenerate,
    )


def _angle_groups(theta) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, value in enumerate(theta):
        for group in groups:
            if circular_distance(theta[group[0]], value) < DEGENERACY_TOLERANCE:
                group.append(i)
                break
        else:
            groups.append([i])
    return groups


def align_frame(frame: AdaptedFrame, reference: AdaptedFrame) -> AdaptedFrame:
    """Reorder and rotate `frame` within its angle clusters onto a nearby `reference`.

    Used for frames at neighbouring chart points so that finite differences
    follow one smooth frame field.
    """
    euclid = np.linalg.cholesky(_metric())
    e, c = frame.coords, frame.coefficients
    e_ref = reference.coords
    aligned_e = np.empty_like(e)
    aligned_c = np.empty_like(c)
    used: set[int] = set()
    for group in _angle_groups(reference.theta):
        target = reference.theta[group[0]]
        candidates = [
            k for k in range(3) if k not in used and circular_distance(frame.theta[k], target) < MATCH_TOLERANCE
        ]
        if len(candidates) != len(group):
            raise ComputationIntegrityError(
                f"angle clusters do not match between {frame.frame.chart_point} and {reference.frame.chart_point}"
            )
        used.update(candidates)
        rotation, _ = orthogonal_procrustes((e[candidates] @ euclid).T, (e_ref[group] @ euclid).T)
        aligned_e[group] = rotation.T @ e[candidates]
        aligned_c[group] = rotation.T @ c[candidates]

    t, s = _split_tables(aligned_e)
    lam, mu = np.diag(t), np.diag(s)
    raw = 0.5 * np.arctan2(mu, lam)
    theta = np.array(reference.theta) + _wrap(raw - np.array(reference.theta))
    return AdaptedFrame(
        frame.frame.with_frame(aligned_e, aligned_c),
        tuple(float(v) for v in theta),
        tuple(float(v) for v in lam),
        tuple(float(v) for v in mu),
        frame.degenerate,
    )


def frame_stencil(
    imm: ImmersionDescriptor, frame: AdaptedFrame, step: float = STENCIL_STEP
) -> dict[tuple[int, int], AdaptedFrame]:
    """Aligned adapted frames at chart points x +- step C[i], i.e. along +-e_i."""
    x = np.array(frame.frame.chart_point)
    stencil = {}
    for i in range(3):
        for sign in (1, -1):
            y = x + sign * step * frame.coefficients[i]
            stencil[(i, sign)] = align_frame(adapted_frame(frame_at(imm, y)), frame)
    return stencil


def _central(stencil_values: dict[tuple[int, int], np.ndarray], step: float) -> np.ndarray:
    """Stack of e_i derivatives, indexed [i, ...]."""
    return np.stack([(stencil_values[(i, 1)] - stencil_values[(i, -1)]) / (2 * step) for i in range(3)])


# ---------------------------------------------------------------------------
# second fundamental form, connection and nabla h
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SecondFundamentalForm:
    coefficients: np.ndarray  # h[i, j, k] = g(h(e_i, e_j), J e_k)

    def symmetry_residual(self) -> float:
        h = self.coefficients
        return float(
            max(
                np.max(np.abs(h - h.transpose(1, 0, 2))),
                np.max(np.abs(h - h.transpose(0, 2, 1))),
            )
        )

    def minimality_residual(self) -> float:
        return float(np.max(np.abs(np.einsum("iik->k", self.coefficients))))

    def norm(self) -> float:
        return float(np.max(np.abs(self.coefficients)))

    def __call__(self, x, y) -> np.ndarray:
        """Normal components of h(x, y) along J e_k for frame-coefficient vectors x, y."""
        return np.einsum("i,j,ijk->k", x, y, self.coefficients)


@dataclass(frozen=True, eq=False)
class ConnectionCoeffs:
    coefficients: np.ndarray  # omega[i, j, k] = g(nabla_{e_i} e_j, e_k)

    def antisymmetry_residual(self) -> float:
        w = self.coefficients
        return float(np.max(np.abs(w + w.transpose(0, 2, 1))))


def coordinate_connection(imm: ImmersionDescriptor, chart_point) -> np.ndarray:
    """Ambient covariant derivatives of the chart fields, D[a, b] = nabla~_{d_a} d_b in Lie coordinates.

    For Z_b = (p^-1 d_b p, q^-1 d_b q), d_a Z_b = Im(p^-1 d_a d_b p - alpha_a alpha_b)
    per factor, so D needs only the exact second derivatives of the descriptor.
    """
    x = np.asarray(chart_point, dtype=float)
    derivative = []
    lie = []
    for side in jets(imm, x):
        conj = qconj_array(side.value)
        alpha = qmul_array(conj, side.first)
        second = qmul_array(conj, side.second) - qmul_array(alpha[:, None, :], alpha[None, :, :])
        derivative.append(second[..., 1:])
        lie.append(alpha[:, 1:])
    dz = np.concatenate(derivative, axis=-1)
    z = np.concatenate(lie, axis=-1)
    return dz + connection_arr(z[:, None, :], z[None, :, :])


def _frame_h(imm: ImmersionDescriptor, frame: AdaptedFrame | FramePoint) -> np.ndarray:
    fp = frame.frame if isinstance(frame, AdaptedFrame) else frame
    d = coordinate_connection(imm, fp.chart_point)
    c = fp.coefficients
    normal = np.einsum("abv,vw,kw->abk", d, _metric(), j_arr(fp.coords))
    return np.einsum("ia,jb,abk->ijk", c, c, normal)


def second_fundamental_form(
    imm: ImmersionDescriptor, chart_point, frame: AdaptedFrame | FramePoint | None = None
) -> SecondFundamentalForm:
    """h in the given frame, by default the adapted frame at the point."""
    if frame is None:
        fp = frame_at(imm, chart_point)
        _require_lagrangian(fp, imm.name)
        frame = adapted_frame(fp)
    else:
        _require_lagrangian(frame.frame if isinstance(frame, AdaptedFrame) else frame, imm.name)
    sff = SecondFundamentalForm(_frame_h(imm, frame))
    symmetry = sff.symmetry_residual()
    if symmetry > SYMMETRY_TOLERANCE:
        raise ComputationIntegrityError(f"h is not totally symmetric at {tuple(chart_point)} ({symmetry:.3e})")
    minimality = sff.minimality_residual()
    if minimality > SYMMETRY_TOLERANCE:
        raise ComputationIntegrityError(f"h is not trace free at {tuple(chart_point)} ({minimality:.3e})")
    return sff


def connection_coeffs(
    imm: ImmersionDescriptor,
    chart_point,
    frame: AdaptedFrame,
    step: float = STENCIL_STEP,
    stencil: dict[tuple[int, int], AdaptedFrame] | None = None,
) -> ConnectionCoeffs:
    """omega_ij^k = g(nabla~_{e_i} e_j, e_k) by covariant differentiation along the e_i chart curves."""
    if stencil is None:
        stencil = frame_stencil(imm, frame, step)
    x = np.asarray(chart_point, dtype=float)
    e = frame.coords
    omega = np.empty((3, 3, 3))
    for i in range(3):
        direction = frame.coefficients[i]

        def curve(t: float, direction=direction) -> ManifoldPoint:
            return evaluate(imm, x + t * direction)

        for j in range(3):

            def field_j(t: float, i=i, j=j) -> TangentVector:
                if t == 0:
                    return frame.frame.frame[j]
                shifted = stencil.get((i, 1 if t > 0 else -1)) if abs(t) == step else None
                if shifted is None:
                    shifted = align_frame(adapted_frame(frame_at(imm, x + t * frame.coefficients[i])), frame)
                return shifted.frame.frame[j]

            derivative = covariant_derivative_along(curve, field_j, 0.0, step, curve_velocity=e[i])
            omega[i, j] = gram(derivative.coords[None, :].astype(float), e)[0]
    return ConnectionCoeffs(omega)


def _normal_g(frame: AdaptedFrame) -> np.ndarray:
    """gG[i, j, l] = g(G(e_i, e_j), J e_l)."""
    e = frame.coords
    values = g_tensor_arr(e[:, None, :], e[None, :, :])
    return np.einsum("ija,ab,lb->ijl", values, _metric(), j_arr(e))


def _nabla_h_algebraic(h: np.ndarray, omega: np.ndarray, normal_g: np.ndarray) -> np.ndarray:
    transport = normal_g + omega  # g(nabla_perp_{e_i} J e_m, J e_l)
    return (
        np.einsum("jkm,iml->ijkl", h, transport)
        - np.einsum("ijm,mkl->ijkl", omega, h)
        - np.einsum("ikm,jml->ijkl", omega, h)
    )


def nabla_h(
    imm: ImmersionDescriptor,
    chart_point,
    frame: AdaptedFrame,
    step: float = STENCIL_STEP,
    stencil: dict[tuple[int, int], AdaptedFrame] | None = None,
    omega: ConnectionCoeffs | None = None,
) -> tuple[np.ndarray, str]:
    """g((nabla h)(e_i, e_j, e_k), J e_l) and the path used ("algebraic" or "finite-difference").

    nabla_perp_X JY = G(X, Y) + J nabla_X Y turns the definition into
    e_i(h_jk^l) + sum_m [h_jk^m (g(G(e_i, e_m), Je_l) + omega_im^l) - omega_ij^m h_mk^l - omega_ik^m h_jm^l].
    The derivative term is dropped when h is constant across the stencil.
    """
    if stencil is None:
        stencil = frame_stencil(imm, frame, step)
    if omega is None:
        omega = connection_coeffs(imm, chart_point, frame, step, stencil)
    h = _frame_h(imm, frame)
    shifted = {key: _frame_h(imm, value) for key, value in stencil.items()}
    variation = max(float(np.max(np.abs(value - h))) for value in shifted.values())
    result = _nabla_h_algebraic(h, omega.coefficients, _normal_g(frame))
    if variation < CONSTANT_H_TOLERANCE:
        path = "algebraic"
    else:
        path = "finite-difference"
        result = result + _central(shifted, step)
    logging.debug(f"nabla h at {tuple(chart_point)} via the {path} path")
    return result, path


# ---------------------------------------------------------------------------
# per-point bundle
# ---------------------------------------------------------------------------


class FrameTensors:
    """Ambient structure restricted to an adapted frame, as scalar tables."""

    def __init__(self, frame: AdaptedFrame, h: np.ndarray):
        e = frame.coords
        je, pe = j_arr(e), p_arr(e)
        pje = apply(structure("float").pj, e)
        jpe = j_arr(pe)
        self.p = gram(pe, e)  # g(P e_a, e_b)
        self.pj = gram(pje, e)  # g(PJ e_a, e_b)
        self.jp = gram(jpe, e)  # g(JP e_a, e_b)
        self.p_normal = gram(pe, je)  # g(P e_a, J e_m)
        self.pj_normal = gram(pje, je)  # g(PJ e_a, J e_m)
        self.g = _normal_g(frame)

        self.ph = np.einsum("bcm,am->abc", h, self.p_normal)  # g(P e_a, h(e_b, e_c))
        self.pjh = np.einsum("bcm,am->abc", h, self.pj_normal)  # g(PJ e_a, h(e_b, e_c))

        np_y, npj_y = nabla_p_arr(e[:, None, :], e[None, :, :])
        self.nabla_p = np.einsum("xya,ab,zb->xyz", np_y, _metric(), e)  # g((nabla~_x P) e_y, e_z)
        self.nabla_pj = np.einsum("xya,ab,zb->xyz", npj_y, _metric(), e)
        self.nabla_p_h = self.nabla_p + np.einsum("xym,mz->xyz", h, self.pj)
        self.nabla_pj_h = self.nabla_pj - np.einsum("xym,mz->xyz", h, self.p)

        self.p_g = np.einsum("wvm,xm->xwv", self.g, self.p_normal)  # g(P e_x, G(e_w, e_v))
        self.jp_g = np.einsum("wvm,xm->xwv", self.g, self.p)  # g(JP e_x, G(e_w, e_v))

        rxyz = curvature_arr(e[:, None, None, :], e[None, :, None, :], e[None, None, :, :])
        self.curvature = np.einsum("xyza,ab,wb->xyzw", rxyz, _metric(), e)
        self.curvature_normal = np.einsum("xyza,ab,wb->xyzw", rxyz, _metric(), je)
        rxyjz = curvature_arr(e[:, None, None, :], e[None, :, None, :], je[None, None, :, :])
        self.curvature_normal_normal = np.einsum("xyza,ab,wb->xyzw", rxyjz, _metric(), je)


class LagrangianPoint:
    """Everything induced at one chart point, computed once and shared by every check."""

    def __init__(self, descriptor: ImmersionDescriptor, frame: AdaptedFrame, step: float = STENCIL_STEP):
        self.descriptor = descriptor
        self.frame = frame
        self.step = step
        self.chart_point = frame.frame.chart_point
        self.h = SecondFundamentalForm(_frame_h(descriptor, frame))

    @cached_property
    def stencil(self) -> dict[tuple[int, int], AdaptedFrame]:
        return frame_stencil(self.descriptor, self.frame, self.step)

    @cached_property
    def omega(self) -> ConnectionCoeffs:
        return connection_coeffs(self.descriptor, self.chart_point, self.frame, self.step, self.stencil)

    @cached_property
    def _nabla_h(self) -> tuple[np.ndarray, str]:
        return nabla_h(self.descriptor, self.chart_point, self.frame, self.step, self.stencil, self.omega)

    @property
    def nabla_h(self) -> np.ndarray:
        return self._nabla_h[0]

    @property
    def nabla_h_path(self) -> str:
        return self._nabla_h[1]

    @cached_property
    def tensors(self) -> FrameTensors:
        return FrameTensors(self.frame, self.h.coefficients)

    @cached_property
    def neighbours(self) -> dict[tuple[int, int], LagrangianPoint]:
        return {key: LagrangianPoint(self.descriptor, frame, self.step) for key, frame in self.stencil.items()}

    @property
    def totally_geodesic(self) -> bool:
        return self.h.norm() < CONSTANT_H_TOLERANCE

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.frame.theta)

    @property
    def lam(self) -> np.ndarray:
        return np.array(self.frame.lambda_coef)

    @property
    def mu(self) -> np.ndarray:
        return np.array(self.frame.mu_coef)

    @cached_property
    def gauss_curvature(self) -> np.ndarray:
        """R[x, y, z, w] = g(R(e_x, e_y) e_z, e_w) from the Gauss equation."""
        h = self.h.coefficients
        return (
            self.tensors.curvature
            + np.einsum("xwm,yzm->xyzw", h, h)
            - np.einsum("xzm,ywm->xyzw", h, h)
        )

    @cached_property
    def induced_curvature(self) -> np.ndarray:
        return induced_curvature_fd(self)

    @cached_property
    def normal_curvature(self) -> np.ndarray:
        return normal_curvature_fd(self)

    def shape_commutator(self) -> np.ndarray:
        """g([A_{Je_z}, A_{Je_w}] e_x, e_y) stored at [x, y, z, w]."""
        h = self.h.coefficients
        return np.einsum("wxm,zmy->xyzw", h, h) - np.einsum("zxm,wmy->xyzw", h, h)

    def ricci_normal_curvature(self) -> np.ndarray:
        """g(R_perp(e_x, e_y) J e_z, J e_w) from the Ricci equation."""
        return self.tensors.curvature_normal_normal + self.shape_commutator()


def lagrangian_point(imm: ImmersionDescriptor, chart_point, step: float = STENCIL_STEP) -> LagrangianPoint:
    fp = frame_at(imm, chart_point)
    _require_lagrangian(fp, imm.name)
    point = LagrangianPoint(imm, adapted_frame(fp), step)
    symmetry = point.h.symmetry_residual()
    if symmetry > SYMMETRY_TOLERANCE:
        raise ComputationIntegrityError(f"h is not totally symmetric at {tuple(chart_point)} ({symmetry:.3e})")
    return point


def _curvature_from_coefficients(coeffs: np.ndarray, derivative: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """[i, j, k, l] = e_i(c_jk^l) - e_j(c_ik^l) + sum_m (c_jk^m c_im^l - c_ik^m c_jm^l) - sum_m (w_ij^m - w_ji^m) c_mk^l."""
    torsion_free = omega - omega.transpose(1, 0, 2)
    return (
        derivative
        - derivative.transpose(1, 0, 2, 3)
        + np.einsum("jkm,iml->ijkl", coeffs, coeffs)
        - np.einsum("ikm,jml->ijkl", coeffs, coeffs)
        - np.einsum("ijm,mkl->ijkl", torsion_free, coeffs)
    )


def induced_curvature_fd(point: LagrangianPoint) -> np.ndarray:
    """R[i, j, k, l] = g(R(e_i, e_j) e_k, e_l) by differencing omega over aligned neighbouring frames."""
    omega = point.omega.coefficients
    derivative = _central({key: n.omega.coefficients for key, n in point.neighbours.items()}, point.step)
    return _curvature_from_coefficients(omega, derivative, omega)


def normal_curvature_fd(point: LagrangianPoint) -> np.ndarray:
    """g(R_perp(e_i, e_j) J e_k, J e_l) from the normal connection nabla_perp_X JY = G(X, Y) + J nabla_X Y."""

    def transport(p: LagrangianPoint) -> np.ndarray:
        return p.tensors.g + p.omega.coefficients

    derivative = _central({key: transport(n) for key, n in point.neighbours.items()}, point.step)
    return _curvature_from_coefficients(transport(point), derivative, point.omega.coefficients)


# ---------------------------------------------------------------------------
# structure equations
# ---------------------------------------------------------------------------


def gauss_residual(point: LagrangianPoint) -> float:
    return float(np.max(np.abs(point.induced_curvature - point.gauss_curvature)))


def ricci_residual(point: LagrangianPoint) -> float:
    return float(np.max(np.abs(point.normal_curvature - point.ricci_normal_curvature())))


def codazzi_residual(point: LagrangianPoint) -> float:
    nh = point.nabla_h
    return float(np.max(np.abs(nh - nh.transpose(1, 0, 2, 3) - point.tensors.curvature_normal)))


def eq217_residual(point: LagrangianPoint) -> float:
    """g((nabla h)(X,Y,Z), JW) - g((nabla h)(X,Y,W), JZ) - g(h(X,Y), G(W,Z)) on the frame."""
    nh = point.nabla_h
    h_g = np.einsum("xym,wzm->xyzw", point.h.coefficients, point.tensors.g)
    return float(np.max(np.abs(nh - nh.transpose(0, 1, 3, 2) - h_g)))


@dataclass(frozen=True)
class CurvatureReadings:
    """Residuals of the two readings of the last factor of the R / R_perp relation."""

    printed: float  # ... - g(X, Z) g(X, W)
    corrected: float  # ... - g(X, Z) g(Y, W)

    @property
    def surviving(self) -> str:
        return "corrected" if self.corrected <= self.printed else "printed"


def eq216_readings(point: LagrangianPoint) -> CurvatureReadings:
    """Both readings of g(R(X,Y)Z,W) = g(R_perp(X,Y)JZ,JW) + (1/3)(g(X,W)g(Y,Z) - g(X,Z)g(., W)).

    R comes from differencing the induced connection and R_perp from the
    Ricci equation, so neither side is assembled from the relation itself.
    """
    delta = np.eye(3)
    lhs = point.induced_curvature - point.ricci_normal_curvature()
    first = np.einsum("xw,yz->xyzw", delta, delta)
    printed = lhs - (first - np.einsum("xz,xw,y->xyzw", delta, delta, np.ones(3))) / 3
    corrected = lhs - (first - np.einsum("xz,yw->xyzw", delta, delta)) / 3
    return CurvatureReadings(float(np.max(np.abs(printed))), float(np.max(np.abs(corrected))))


def normal_curvature_from_tangent(point: LagrangianPoint) -> np.ndarray:
    """g(R_perp(e_x, e_y) J e_z, J e_w) = R_xyzw - (1/3)(d_xw d_yz - d_xz d_yw) with R from Gauss."""
    delta = np.eye(3)
    return point.gauss_curvature - (
        np.einsum("xw,yz->xyzw", delta, delta) - np.einsum("xz,yw->xyzw", delta, delta)
    ) / 3


@dataclass(frozen=True)
class AngleDerivativeResiduals:
    angle_sum: float  # theta_1 + theta_2 + theta_3 = 0 mod pi
    derivative: float  # e_i(theta_j) = -h_jj^i
    coupling: float  # h_ij^k cos(theta_j - theta_k) = (sqrt3/6 eps_ij^k - omega_ij^k) sin(theta_j - theta_k)


def _theta_derivative(point: LagrangianPoint, stencil: dict[tuple[int, int], AdaptedFrame], step: float) -> np.ndarray:
    theta = point.theta
    shifted = {key: theta + _wrap(np.array(frame.theta) - theta) for key, frame in stencil.items()}
    return _central(shifted, step)


def lemma1_report(source: ImmersionDescriptor | LagrangianPoint, chart_point=None) -> AngleDerivativeResiduals:
    point = source if isinstance(source, LagrangianPoint) else lagrangian_point(source, chart_point)
    h = point.h.coefficients
    theta = point.theta
    d_theta = _theta_derivative(point, point.stencil, point.step)
    if np.max(np.abs(d_theta)) * point.step > 0.1:
        # an angle jumped a branch between stencil points
        step = point.step / 10
        d_theta = _theta_derivative(point, frame_stencil(point.descriptor, point.frame, step), step)
    derivative = float(np.max(np.abs(d_theta + np.einsum("jji->ij", h))))

    omega = point.omega.coefficients
    coupling = 0.0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if j == k:
                    continue
                lhs = h[i, j, k] * math.cos(theta[j] - theta[k])
                rhs = (SQRT3 / 6 * EPSILON[i, j, k] - omega[i, j, k]) * math.sin(theta[j] - theta[k])
                coupling = max(coupling, abs(lhs - rhs))
    return AngleDerivativeResiduals(point.frame.angle_sum_residual(), derivative, coupling)


def eq58_residual(point: LagrangianPoint, lam: float = 0.0) -> float:
    """The (i, i, k, k) instance of the polarised J-isotropy condition for constant-angle frames.

    sum_m [2 sqrt3 h_ki^m eps_mi^k + 12 h_ki^m omega_im^k + sqrt3 h_ki^m eps_ki^m]
    + sin 2(theta_k - theta_i) - 2 lambda, for every i != k.
    """
    h, omega, theta = point.h.coefficients, point.omega.coefficients, point.theta
    worst = 0.0
    for i in range(3):
        for k in range(3):
            if i == k:
                continue
            total = sum(
                2 * SQRT3 * h[k, i, m] * EPSILON[m, i, k]
                + 12 * h[k, i, m] * omega[i, m, k]
                + SQRT3 * h[k, i, m] * EPSILON[k, i, m]
                for m in range(3)
            )
            worst = max(worst, abs(total + math.sin(2 * (theta[k] - theta[i])) - 2 * lam))
    return worst
