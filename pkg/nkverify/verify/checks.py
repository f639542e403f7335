"""Every verification check, registered with the check registry.

Structure checks take stacks of random Lie-coordinate vectors x, y, z with
shape (n, 6) and return the raw identity values, reduced per sample by the
suite. Immersion checks take a PointContext and return a residual, or a
(residual, note) pair; CheckSkipped marks a precondition that does not hold
at the point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from nkverify.dsl.types import ImmersionDescriptor
from nkverify.errors import LambdaUnavailableError
from nkverify.geometry.invariants import (
    CubicMaximum,
    IsotropyReport,
    cubic_closure_residual,
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
)
from nkverify.geometry.lagrangian import (
    AngleDerivativeResiduals,
    FramePoint,
    LagrangianPoint,
    codazzi_residual,
    eq58_residual,
    eq216_readings,
    eq217_residual,
    gauss_residual,
    lagrangian_defect,
    lemma1_report,
    ricci_residual,
)
from nkverify.geometry.structure import (
    backend_of,
    bracket_arr,
    connection_arr,
    curvature_arr,
    curvature_from_connection,
    eq26_rhs,
    g_arr,
    g_tensor_arr,
    j_arr,
    nabla_g_arr,
    nabla_p_arr,
    nabla_p_direct,
    nabla_pj_direct,
    p_arr,
)
from nkverify.verify import registry


class CheckSkipped(Exception):
    pass


def _scalar(values):
    return values[..., None]


##########
# STRUCTURE
##########
@registry.check("eq2.3", "G(X,Y) + G(Y,X) = 0", suite="structure")
def g_skew(x, y, z):
    return g_tensor_arr(x, y) + g_tensor_arr(y, x)


@registry.check("eq2.4", "G(X,JY) + JG(X,Y) = 0 (second term JG(X,Y), not JG(Y,X))", suite="structure")
def g_j_compatible(x, y, z):
    return g_tensor_arr(x, j_arr(y)) + j_arr(g_tensor_arr(x, y))


@registry.check("eq2.5", "g(G(X,Y),Z) + g(G(X,Z),Y) = 0", suite="structure")
def g_metric_skew(x, y, z):
    return _scalar(g_arr(g_tensor_arr(x, y), z) + g_arr(g_tensor_arr(x, z), y))


@registry.check("eq2.6", "(nabla_X G)(Y,Z) = (1/3)(g(Y,JZ)X + g(X,Z)JY - g(X,Y)JZ)", suite="structure")
def nabla_g_closed_form(x, y, z):
    return nabla_g_arr(x, y, z) - eq26_rhs(x, y, z)


@registry.check("eq2.8", "2(nabla_X P)Y = JG(X,PY) + JPG(X,Y)", suite="structure")
def nabla_p_closed_form(x, y, z):
    return nabla_p_arr(x, y)[0] - nabla_p_direct(x, y)


@registry.check("eq2.9", "2(nabla_X PJ)Y = -G(X,PY) + PG(X,Y)", suite="structure")
def nabla_pj_closed_form(x, y, z):
    return nabla_p_arr(x, y)[1] - nabla_pj_direct(x, y)


@registry.check("nearly-kahler", "(nabla_X J)X = 0", suite="structure")
def nearly_kahler(x, y, z):
    return g_tensor_arr(x, x)


@registry.check("eq2.10", "closed-form curvature = connection curvature", suite="structure")
def curvature_closed_form(x, y, z):
    return curvature_arr(x, y, z) - curvature_from_connection(x, y, z)


@registry.check("hermitian", "g(JX,JY) = g(X,Y)", suite="structure")
def hermitian(x, y, z):
    return _scalar(g_arr(j_arr(x), j_arr(y)) - g_arr(x, y))


@registry.check("p-symmetric", "g(PX,Y) = g(X,PY)", suite="structure")
def p_symmetric(x, y, z):
    return _scalar(g_arr(p_arr(x), y) - g_arr(x, p_arr(y)))


@registry.check("p-anticommutes", "PJ + JP = 0", suite="structure")
def p_anticommutes(x, y, z):
    return p_arr(j_arr(x)) + j_arr(p_arr(x))


@registry.check("j-squared", "J^2 = -1", suite="structure")
def j_squared(x, y, z):
    return j_arr(j_arr(x)) + x


@registry.check("torsion", "nabla_X Y - nabla_Y X = [X,Y]", suite="structure")
def torsion(x, y, z):
    return connection_arr(x, y) - connection_arr(y, x) - bracket_arr(x, y)


@registry.check("metricity", "g(nabla_X Y,Z) + g(Y,nabla_X Z) = 0", suite="structure")
def metricity(x, y, z):
    return _scalar(g_arr(connection_arr(x, y), z) + g_arr(y, connection_arr(x, z)))


@registry.check("bianchi", "R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0", suite="structure")
def bianchi(x, y, z):
    return curvature_arr(x, y, z) + curvature_arr(y, z, x) + curvature_arr(z, x, y)


@registry.check("nk-type", "|G(X,Y)|^2 = (1/3)(|X|^2|Y|^2 - g(X,Y)^2 - g(JX,Y)^2)", suite="structure")
def constant_type(x, y, z):
    third = backend_of(x).scalar(Fraction(1, 3))
    gxy = g_tensor_arr(x, y)
    return _scalar(
        g_arr(gxy, gxy) - third * (g_arr(x, x) * g_arr(y, y) - g_arr(x, y) ** 2 - g_arr(j_arr(x), y) ** 2)
    )


##########
# IMMERSION
##########
@dataclass(eq=False)
class PointContext:
    """One sampled chart point and the quantities shared by its checks."""

    descriptor: ImmersionDescriptor
    chart_point: tuple[float, float, float]
    index: int
    seed: int
    frame: FramePoint
    point: LagrangianPoint | None

    @cached_property
    def lemma1(self) -> AngleDerivativeResiduals:
        return lemma1_report(self.point)

    @cached_property
    def mu(self) -> IsotropyReport:
        return isotropy_mu(self.point)

    @cached_property
    def lam(self) -> IsotropyReport:
        return j_isotropy_lambda(self.point)

    @cached_property
    def cubic(self) -> CubicMaximum:
        return maximize_cubic_form(self.point)

    def first_point_only(self) -> None:
        if self.index != 0:
            raise CheckSkipped("evaluated at the first chart point")

    def require_constant_angles(self) -> None:
        if not has_constant_angles(self.point):
            raise CheckSkipped("angle functions are not constant")

    def require_curved(self) -> None:
        if self.point.totally_geodesic:
            raise CheckSkipped("totally geodesic")

    def require_lambda(self) -> float:
        if self.lam.lambda_ is None:
            raise CheckSkipped("not J-isotropic")
        return self.lam.lambda_


@registry.check("lagrangian", "g(Je_i, e_j) = 0", suite="immersion", tolerance="fd", requires_lagrangian=False)
def lagrangian(ctx: PointContext):
    return lagrangian_defect(ctx.frame)


@registry.check("h-symmetry", "h_ij^k totally symmetric", suite="immersion", tolerance="fd")
def h_symmetry(ctx: PointContext):
    return ctx.point.h.symmetry_residual()


@registry.check("minimality", "sum_i h_ii^k = 0", suite="immersion", tolerance="fd")
def minimality(ctx: PointContext):
    return ctx.point.h.minimality_residual()


@registry.check("adapted-frame", "P e_i = cos 2theta_i e_i + sin 2theta_i Je_i", suite="immersion", tolerance="fd")
def adapted(ctx: PointContext):
    return ctx.point.frame.adaptation_residual()


@registry.check("orientation", "sqrt3 JG(e_i, e_j) = eps_ij^k e_k", suite="immersion", tolerance="fd")
def orientation(ctx: PointContext):
    return ctx.point.frame.orientation_residual()


@registry.check("angle-sum", "theta_1 + theta_2 + theta_3 = 0 mod pi", suite="immersion", tolerance="fd")
def angle_sum(ctx: PointContext):
    return ctx.lemma1.angle_sum


@registry.check("lemma1-derivative", "e_i(theta_j) = -h_jj^i", suite="immersion", tolerance="fd")
def angle_derivative(ctx: PointContext):
    return ctx.lemma1.derivative


@registry.check(
    "lemma1-coupling",
    "h_ij^k cos(theta_j - theta_k) = (sqrt3/6 eps_ij^k - omega_ij^k) sin(theta_j - theta_k)",
    suite="immersion",
    tolerance="fd",
)
def angle_coupling(ctx: PointContext):
    return ctx.lemma1.coupling


@registry.check("omega-antisymmetry", "omega_ij^k = -omega_ik^j", suite="immersion", tolerance="fd")
def omega_antisymmetry(ctx: PointContext):
    return ctx.point.omega.antisymmetry_residual()


@registry.check("codazzi", "(nabla h)(X,Y,Z) - (nabla h)(Y,X,Z) = (R(X,Y)Z)^perp", suite="immersion", tolerance="fd")
def codazzi(ctx: PointContext):
    return codazzi_residual(ctx.point)


@registry.check("eq2.17", "g((nabla h)(X,Y,Z),JW) - g((nabla h)(X,Y,W),JZ) = g(h(X,Y),G(W,Z))", suite="immersion", tolerance="fd")
def nabla_h_symmetry(ctx: PointContext):
    return eq217_residual(ctx.point)


@registry.check("gauss-fd", "induced curvature = Gauss equation", suite="immersion", tolerance="fd")
def gauss(ctx: PointContext):
    ctx.first_point_only()
    return gauss_residual(ctx.point)


@registry.check("ricci", "normal curvature = Ricci equation", suite="immersion", tolerance="fd")
def ricci(ctx: PointContext):
    ctx.first_point_only()
    return ricci_residual(ctx.point)


@registry.check("eq2.16", "R(X,Y,Z,W) = R_perp(X,Y,JZ,JW) + (1/3)(g(X,W)g(Y,Z) - g(X,Z)g(Y,W))", suite="immersion", tolerance="fd")
def curvature_relation(ctx: PointContext):
    ctx.first_point_only()
    readings = eq216_readings(ctx.point)
    residual = readings.corrected if readings.surviving == "corrected" else readings.printed
    return residual, f"surviving reading: {readings.surviving}"


@registry.check("j-isotropy", "g((nabla h)(v,v,v),Jv) constant on unit v", suite="immersion", tolerance="fd")
def j_isotropy(ctx: PointContext):
    return ctx.lam.max_deviation


@registry.check("isotropy-theorem", "isotropic iff totally geodesic", suite="immersion", tolerance="fd")
def isotropy_theorem(ctx: PointContext):
    return ctx.point.h.norm() if ctx.mu.mu is not None else 0.0


@registry.check("isotropy-identity", "mu^2 = g(h(x,x),h(y,y)) + 2|h(x,y)|^2 on orthonormal pairs", suite="immersion", tolerance="fd")
def isotropy_identity(ctx: PointContext):
    if ctx.mu.mu is None:
        raise CheckSkipped("not isotropic")
    return ctx.mu.identity_residual


@registry.check("eq4.2", "polarised J-isotropy condition", suite="immersion", tolerance="fd")
def polarised_j_isotropy(ctx: PointContext):
    lam = ctx.require_lambda()
    return polarized_jisotropy_check(ctx.point, lam=lam, seed=ctx.seed)


@registry.check("prop4.2", "differentiated J-isotropy condition with the I tensor", suite="immersion", tolerance="loose")
def differentiated_j_isotropy(ctx: PointContext):
    try:
        return prop42_residual(ctx.point)
    except LambdaUnavailableError as e:
        raise CheckSkipped(str(e)) from e


@registry.check("cubic-critical", "|grad F - 3F v| at the cubic form maximum", suite="immersion", tolerance="fd")
def cubic_critical(ctx: PointContext):
    return max(ctx.cubic.critical_residual, ctx.cubic.diagonal_residual)


@registry.check(
    "sectional-gauss",
    "K(e_i,e_j) = 5/12 + (1/3)(lambda_i lambda_j + mu_i mu_j) - (h_ij^k)^2",
    suite="immersion",
    tolerance="fd",
)
def sectional_gauss(ctx: PointContext):
    ctx.require_constant_angles()
    return sectional_gauss_residual(ctx.point)


@registry.check("eq6.13", "g((nabla_e_i P)e_j,e_k) = (lambda_j - lambda_k)/(2 sqrt3)", suite="immersion", tolerance="fd")
def nabla_p_frame_values(ctx: PointContext):
    return eq613_residual(ctx.point)


@registry.check("eq6.14", "I(e_2,e_1,e_1,e_1,e_3) in closed form", suite="immersion", tolerance="fd")
def bold_i_simplification(ctx: PointContext):
    ctx.require_curved()
    ctx.require_constant_angles()
    return eq614_residual(ctx.point)


@registry.check("eq5.8", "reduced J-parallel condition for constant angles", suite="immersion", tolerance="fd")
def reduced_j_parallel(ctx: PointContext):
    ctx.require_curved()
    ctx.require_constant_angles()
    return eq58_residual(ctx.point, ctx.require_lambda())


@registry.check("eq6.19", "32 (h_12^3)^3 - 6 h_12^3 + 1 = 0", suite="immersion", tolerance="fd")
def cubic_closure(ctx: PointContext):
    ctx.require_curved()
    return cubic_closure_residual(float(ctx.point.h.coefficients[0, 1, 2]))


def frame_values(ctx: PointContext) -> dict:
    """Reported quantities at one chart point."""
    point = ctx.point
    if point is None:
        return {"lagrangian": False}
    h = point.h.coefficients
    values = {
        "lagrangian": True,
        "h123": float(h[0, 1, 2]),
        "h_max": point.h.norm(),
        "theta": [float(t) for t in point.theta],
        "omega_max": float(np.max(np.abs(point.omega.coefficients))),
        "lambda": ctx.lam.lambda_,
        "mu": ctx.mu.mu,
        "sectional_curvature": sectional_curvature(point),
        "cubic_max": ctx.cubic.value,
        "nabla_h_path": point.nabla_h_path,
        "degenerate_angles": point.frame.degenerate,
    }
    return values
