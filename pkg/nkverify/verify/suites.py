from __future__ import annotations

import logging
import os
import time

import numpy as np
import sympy
from joblib import Parallel, delayed

from nkverify.dsl import catalog, catalog_names, load
from nkverify.dsl.types import ImmersionDescriptor
from nkverify.errors import ConfigError, NotLagrangianError, UnknownImmersionError
from nkverify.geometry.backend import get_backend
from nkverify.geometry.invariants import (
    angle_relations_check,
    classification_cubic,
    depressed_cubic_roots,
    sectional_curvature,
)
from nkverify.geometry.lagrangian import LagrangianPoint, frame_at, lagrangian_point
from nkverify.utils import get_config
from nkverify.verify import Check, registry
from nkverify.verify import checks as checks_module
from nkverify.verify.types import (
    AngleRelationsRecord,
    CheckRecord,
    ClassificationRecord,
    CubicRoot,
    Environment,
    ResidualSummary,
    RunConfig,
    VerificationReport,
)

CHART_BOX = 0.4
FLOAT_CHUNK = 1000
EXACT_CHUNK = 10
CLASSIFICATION_ANGLES = (0, sympy.pi / 3, 2 * sympy.pi / 3)
CLASSIFICATION_POLYNOMIAL = (32, 0, -6, 1)


def thread_count(cfg: RunConfig) -> int:
    cap = os.environ.get("NKVERIFY_THREADS")
    threads = cfg.threads or 1
    if cap:
        try:
            threads = min(threads, int(cap)) if cfg.threads else int(cap)
        except ValueError as e:
            raise ConfigError(f"NKVERIFY_THREADS must be an integer, got {cap}") from e
    return max(threads, 1)


def _parallel(cfg: RunConfig) -> Parallel:
    return Parallel(n_jobs=thread_count(cfg), prefer="threads")


def _elapsed(cfg: RunConfig, start: float) -> float | None:
    return round((time.perf_counter() - start) * 1000, 3) if cfg.timing else None


def _summary(residuals: np.ndarray) -> ResidualSummary:
    return ResidualSummary(
        count=len(residuals),
        min=float(np.min(residuals)),
        median=float(np.median(residuals)),
        max=float(np.max(residuals)),
    )


##########
# STRUCTURE
##########
def _chunk_sizes(total: int, size: int) -> list[int]:
    return [min(size, total - start) for start in range(0, total, size)]


def _structure_inputs(seed: np.random.SeedSequence, n: int, exact: bool):
    rng = np.random.default_rng(seed)
    if not exact:
        return tuple(rng.standard_normal((3, n, 6)))
    numerators = rng.integers(-6, 7, size=(3, n, 6))
    denominators = rng.integers(1, 5, size=(3, n, 6))
    values = np.empty((3, n, 6), dtype=object)
    for index in np.ndindex(values.shape):
        values[index] = sympy.Rational(int(numerators[index]), int(denominators[index]))
    return tuple(values)


def _structure_chunk(seed: np.random.SeedSequence, n: int, backend_name: str, ids: list[str]) -> dict[str, np.ndarray]:
    backend = get_backend(backend_name)
    x, y, z = _structure_inputs(seed, n, backend.exact)
    return {check_id: backend.residuals(registry.get(check_id).func(x, y, z), axis=-1) for check_id in ids}


def structure_residuals(cfg: RunConfig, ids: list[str], n: int) -> dict[str, np.ndarray]:
    """Per-sample residuals of the structure checks, chunked with sub-seeds split from the master seed."""
    sizes = _chunk_sizes(n, EXACT_CHUNK if cfg.backend == "exact" else FLOAT_CHUNK)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    results = _parallel(cfg)(
        delayed(_structure_chunk)(seed, size, cfg.backend, ids) for seed, size in zip(seeds, sizes)
    )
    return {check_id: np.concatenate([r[check_id] for r in results]) for check_id in ids}


def _structure_tol(check: Check, cfg: RunConfig) -> float:
    return 0.0 if cfg.backend == "exact" else check.tol(cfg)


def run_structure_suite(cfg: RunConfig) -> VerificationReport:
    start = time.perf_counter()
    n = cfg.sample_count("structure")
    logging.info(f"Running the structure suite on {n} samples ({cfg.backend})")
    ids = registry.ids("structure")
    residuals = structure_residuals(cfg, ids, n)
    records = []
    for check in registry.suite("structure"):
        residual = float(np.max(residuals[check.id]))
        tol = _structure_tol(check, cfg)
        records.append(CheckRecord(id=check.id, anchor=check.anchor, residual=residual, tol=tol, passed=residual <= tol))
    return VerificationReport(
        suite="structure",
        checks=records,
        env=Environment(seed=cfg.seed, samples=n, backend=cfg.backend),
        elapsed_ms=_elapsed(cfg, start),
    )


##########
# IMMERSION
##########
def resolve_immersion(source: str) -> ImmersionDescriptor:
    """A catalog name, a name registered in the config, or a descriptor file path."""
    if source in catalog_names():
        return catalog(source)
    registered = get_config().get_immersion_source(source)
    if registered is not None:
        return load(registered.source)
    if os.path.exists(source):
        return load(source)
    raise UnknownImmersionError(source, catalog_names() + list(get_config().immersions))


def chart_points(cfg: RunConfig, n: int) -> tuple[np.ndarray, list[int]]:
    """Seeded chart points in the chart box and one sub-seed per point."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    points = rng.uniform(-CHART_BOX, CHART_BOX, size=(n, 3))
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(n)]
    return points, seeds


def point_context(descriptor: ImmersionDescriptor, chart_point, index: int, seed: int) -> checks_module.PointContext:
    fp = frame_at(descriptor, chart_point)
    try:
        point = lagrangian_point(descriptor, chart_point)
    except NotLagrangianError:
        logging.info(f"{descriptor.name} is not Lagrangian at {tuple(chart_point)}")
        point = None
    return checks_module.PointContext(descriptor, tuple(float(c) for c in chart_point), index, seed, fp, point)


def _run_check(check: Check, ctx: checks_module.PointContext) -> tuple[float | None, str | None]:
    if check.requires_lagrangian and ctx.point is None:
        return None, "not Lagrangian"
    try:
        outcome = check.func(ctx)
    except checks_module.CheckSkipped as e:
        return None, str(e)
    if isinstance(outcome, tuple):
        return float(outcome[0]), outcome[1]
    return float(outcome), None


def evaluate_point(
    descriptor: ImmersionDescriptor, chart_point, index: int, seed: int, ids: list[str]
) -> tuple[dict[str, tuple[float | None, str | None]], dict]:
    ctx = point_context(descriptor, chart_point, index, seed)
    outcomes = {check_id: _run_check(registry.get(check_id), ctx) for check_id in ids}
    values = checks_module.frame_values(ctx) if index == 0 else {}
    if ctx.point is not None:
        values["totally_geodesic"] = ctx.point.totally_geodesic
        values["degenerate_angles"] = ctx.point.frame.degenerate
    return outcomes, values


def _evaluate_points(cfg: RunConfig, descriptor: ImmersionDescriptor, ids: list[str], n: int):
    points, seeds = chart_points(cfg, n)
    return _parallel(cfg)(
        delayed(evaluate_point)(descriptor, point, index, seed, ids)
        for index, (point, seed) in enumerate(zip(points, seeds))
    )


def _aggregate(check: Check, cfg: RunConfig, outcomes: list[tuple[float | None, str | None]]) -> CheckRecord:
    measured = [(r, note) for r, note in outcomes if r is not None]
    tol = check.tol(cfg)
    if not measured:
        return CheckRecord(id=check.id, anchor=check.anchor, tol=tol, passed=True, skipped=True, note=outcomes[0][1])
    residual = max(r for r, _ in measured)
    return CheckRecord(
        id=check.id,
        anchor=check.anchor,
        residual=residual,
        tol=tol,
        passed=residual <= tol,
        note=measured[0][1],
    )


def _immersion_flags(per_point_values: list[dict]) -> dict:
    lagrangian = all("totally_geodesic" in v for v in per_point_values)
    flags = {"lagrangian_everywhere": lagrangian}
    if lagrangian:
        totally_geodesic = all(v["totally_geodesic"] for v in per_point_values)
        flags["totally_geodesic"] = totally_geodesic
        # two equal angles force a totally geodesic immersion
        flags["degenerate_angles_consistent"] = all(
            v["totally_geodesic"] or not v["degenerate_angles"] for v in per_point_values
        )
    return flags


def run_immersion_report(source: str | ImmersionDescriptor, cfg: RunConfig) -> VerificationReport:
    start = time.perf_counter()
    descriptor = source if isinstance(source, ImmersionDescriptor) else resolve_immersion(source)
    n = cfg.sample_count("immersion")
    logging.info(f"Running the immersion report for {descriptor.name} on {n} chart points")
    ids = registry.ids("immersion")
    results = _evaluate_points(cfg, descriptor, ids, n)
    records = [_aggregate(check, cfg, [r[0][check.id] for r in results]) for check in registry.suite("immersion")]
    values = {**results[0][1], **_immersion_flags([r[1] for r in results])}
    values.pop("degenerate_angles", None)
    return VerificationReport(
        suite=f"immersion:{descriptor.name}",
        checks=records,
        env=Environment(seed=cfg.seed, samples=n, backend=cfg.backend),
        values=values,
        elapsed_ms=_elapsed(cfg, start),
    )


##########
# SAMPLE
##########
def sample(cfg: RunConfig, check_id: str, source: str | None = None) -> VerificationReport:
    """Run one check on cfg.samples draws and summarise the residual distribution."""
    start = time.perf_counter()
    check = registry.get(check_id)
    n = cfg.sample_count("sample")
    if check.suite == "structure":
        residuals = structure_residuals(cfg, [check_id], n)[check_id]
        tol = _structure_tol(check, cfg)
        suite = f"sample:{check_id}"
        note = None
    else:
        if source is None:
            raise ConfigError(f"check {check_id} needs an immersion to sample")
        descriptor = source if isinstance(source, ImmersionDescriptor) else resolve_immersion(source)
        outcomes = [r[0][check_id] for r in _evaluate_points(cfg, descriptor, [check_id], n)]
        residuals = np.array([r for r, _ in outcomes if r is not None])
        tol = check.tol(cfg)
        suite = f"sample:{check_id}:{descriptor.name}"
        note = outcomes[0][1]
    if len(residuals) == 0:
        record = CheckRecord(id=check.id, anchor=check.anchor, tol=tol, passed=True, skipped=True, note=note)
    else:
        summary = _summary(residuals)
        record = CheckRecord(
            id=check.id,
            anchor=check.anchor,
            residual=summary.max,
            tol=tol,
            passed=summary.max <= tol,
            note=note,
            summary=summary,
        )
    return VerificationReport(
        suite=suite,
        checks=[record],
        env=Environment(seed=cfg.seed, samples=n, backend=cfg.backend),
        elapsed_ms=_elapsed(cfg, start),
    )


##########
# CLASSIFY
##########
def _catalog_points(names=("f7", "f8")) -> dict[str, LagrangianPoint]:
    return {name: lagrangian_point(catalog(name), (0.0, 0.0, 0.0)) for name in names}


def classify(cfg: RunConfig) -> ClassificationRecord:
    """Solve the classification cubic, map its roots to curvatures and to the catalog."""
    start = time.perf_counter()
    cubic = classification_cubic(CLASSIFICATION_ANGLES)
    coefficients = [int(c) for c in cubic.polynomial.all_coeffs()]
    closed_form = depressed_cubic_roots(*(float(c) for c in CLASSIFICATION_POLYNOMIAL))
    exact_roots = sorted(cubic.roots.items(), key=lambda item: float(item[0]))
    points = _catalog_points()

    roots = []
    root_gap = 0.0
    curvature_gap = 0.0
    for (value, multiplicity), (exact, exact_multiplicity) in zip(closed_form, exact_roots):
        root_gap = max(root_gap, abs(value - float(exact)), abs(multiplicity - exact_multiplicity))
        curvature = cubic.curvatures[exact]
        match = next(
            (name for name, point in points.items() if abs(point.h.coefficients[0, 1, 2] - value) < cfg.tol_fd),
            None,
        )
        measured = float(points[match].h.coefficients[0, 1, 2]) if match else None
        if match:
            curvature_gap = max(curvature_gap, abs(sectional_curvature(points[match]) - float(curvature)))
        roots.append(
            CubicRoot(
                value=value,
                exact=str(exact),
                multiplicity=multiplicity,
                residual=abs(32 * value**3 - 6 * value + 1),
                curvature=float(curvature),
                curvature_exact=str(curvature),
                immersion=match,
                measured_h123=measured,
            )
        )

    relations = angle_relations_check(CLASSIFICATION_ANGLES, 0)
    relation_residual = max(
        float(abs(sympy.N(value))) for value in (*relations.lambda_residuals, relations.cyclic_sum)
    )
    matched = [r for r in roots if r.immersion is not None]
    checks = [
        _record("cubic-derivation", "cubic derived from the angle triple", CLASSIFICATION_POLYNOMIAL, coefficients, cfg),
        CheckRecord(
            id="cubic-roots",
            anchor="32x^3 - 6x + 1 = 0",
            residual=max(r.residual for r in roots),
            tol=cfg.tol_roots,
            passed=max(r.residual for r in roots) <= cfg.tol_roots,
        ),
        CheckRecord(
            id="closed-form",
            anchor="closed-form roots match the exact roots",
            residual=root_gap,
            tol=cfg.tol_algebraic,
            passed=len(closed_form) == len(exact_roots) and root_gap <= cfg.tol_algebraic,
        ),
        CheckRecord(
            id="catalog-match",
            anchor="every root is realised by a catalog immersion",
            residual=curvature_gap,
            tol=cfg.tol_fd,
            passed=len(matched) == len(roots) and curvature_gap <= cfg.tol_fd,
        ),
        CheckRecord(
            id="angle-relations",
            anchor="lambda = 0 on (0, pi/3, 2pi/3)",
            residual=relation_residual,
            tol=cfg.tol_algebraic,
            passed=relation_residual <= cfg.tol_algebraic,
        ),
    ]
    logging.info(f"Classification cubic roots {[r.exact for r in roots]}")
    return ClassificationRecord(
        polynomial=str(cubic.polynomial.as_expr()),
        coefficients=coefficients,
        roots=roots,
        angle_relations=AngleRelationsRecord(
            theta=[str(t) for t in CLASSIFICATION_ANGLES],
            lambda_residuals=[str(v) for v in relations.lambda_residuals],
            cyclic_sum=str(relations.cyclic_sum),
            product_forms=[str(v) for v in relations.product_forms],
        ),
        checks=checks,
        elapsed_ms=_elapsed(cfg, start),
    )


def _record(check_id: str, anchor: str, expected, actual, cfg: RunConfig) -> CheckRecord:
    if len(expected) != len(actual):
        return CheckRecord(id=check_id, anchor=anchor, residual=float("inf"), tol=cfg.tol_algebraic, passed=False)
    residual = float(max(abs(a - b) for a, b in zip(expected, actual)))
    return CheckRecord(id=check_id, anchor=anchor, residual=residual, tol=cfg.tol_algebraic, passed=residual <= cfg.tol_algebraic)
