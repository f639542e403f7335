from nkverify.verify.types import CheckRecord, ClassificationRecord, VerificationReport


def _status(record: CheckRecord) -> str:
    if record.skipped:
        return "SKIP"
    return "PASS" if record.passed else "FAIL"


# residuals are printed with repr so the text and JSON renderings carry the same digits
def format_record(record: CheckRecord) -> str:
    residual = "-" if record.residual is None else repr(record.residual)
    line = f"  [{_status(record)}] {record.id:<20} residual={residual} tol={record.tol!r}  ({record.anchor})"
    if record.summary is not None:
        s = record.summary
        line += f"\n         n={s.count} min={s.min!r} median={s.median!r} max={s.max!r}"
    if record.note:
        line += f"\n         {record.note}"
    return line


def format_report(report: VerificationReport) -> str:
    lines = [
        f"suite: {report.suite}",
        f"seed: {report.env.seed}  samples: {report.env.samples}  backend: {report.env.backend}",
        "checks:",
    ]
    lines += [format_record(r) for r in report.checks]
    if report.values:
        lines.append("values:")
        lines += [f"  {key}: {value!r}" for key, value in report.values.items()]
    if report.elapsed_ms is not None:
        lines.append(f"elapsed_ms: {report.elapsed_ms!r}")
    lines.append(f"result: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def format_classification(record: ClassificationRecord) -> str:
    lines = [f"polynomial: {record.polynomial} = 0", "roots:"]
    for root in record.roots:
        realised = f" realised by {root.immersion} (h_12^3 = {root.measured_h123!r})" if root.immersion else ""
        lines.append(
            f"  x = {root.exact} (multiplicity {root.multiplicity}, residual {root.residual!r})"
            f" -> K = {root.curvature_exact}{realised}"
        )
    relations = record.angle_relations
    lines.append(f"angle relations on ({', '.join(relations.theta)}):")
    lines.append(f"  lambda residuals: {', '.join(relations.lambda_residuals)}")
    lines.append(f"  cyclic sum: {relations.cyclic_sum}")
    lines.append(f"  product forms: {', '.join(relations.product_forms)}")
    lines.append("checks:")
    lines += [format_record(r) for r in record.checks]
    if record.elapsed_ms is not None:
        lines.append(f"elapsed_ms: {record.elapsed_ms!r}")
    lines.append(f"result: {'PASS' if record.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"
