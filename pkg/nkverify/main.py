import argparse
import json
import logging
import os
import sys

from pydantic import ValidationError

from nkverify.errors import ConfigError, NKVerifyError
from nkverify.utils import get_config
from nkverify.verify import registry
from nkverify.verify.helpers import format_classification, format_report
from nkverify.verify.suites import classify, run_immersion_report, run_structure_suite, sample
from nkverify.verify.types import RunConfig, VerificationReport

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--samples", type=int, help="random draws or chart points")
    common.add_argument("--tol", dest="tol_algebraic", type=float, help="tolerance for algebraic identities")
    common.add_argument("--tol-fd", dest="tol_fd", type=float, help="tolerance for finite-difference checks")
    common.add_argument("--backend", choices=["float", "exact"])
    common.add_argument("--format", choices=["text", "json"])
    common.add_argument("--config", help="YAML or TOML config file")
    common.add_argument("--threads", type=int, help="parallel workers over sample points")
    common.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS)
    common.add_argument("--timing", action="store_const", const=True, help="include wall time in the report")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="nkverify", description="Verifier for Lagrangian submanifolds of the nearly Kaehler S3 x S3")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("structure", parents=[common], help="structure tensor identities")
    immersion = commands.add_parser("immersion", parents=[common], help="per-immersion report")
    immersion.add_argument("source", help="catalog name (f1..f8), registered name or descriptor file")
    commands.add_parser("classify", parents=[common], help="classification cubic and curvatures")
    sampler = commands.add_parser("sample", parents=[common], help="Monte-Carlo run of a single check")
    sampler.add_argument("--check", required=True, help="check id, see `nkverify checks`")
    sampler.add_argument("source", nargs="?", help="immersion for immersion checks")
    commands.add_parser("checks", parents=[common], help="list registered checks")
    commands.add_parser("schema", parents=[common], help="JSON schema of the report")
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    """File values from the config loader, overridden by any flag given on the command line."""
    config = get_config()
    config.clear()
    if args.config:
        path = os.path.abspath(args.config)
        config.load_config_file(os.path.dirname(path), os.path.basename(path))
    else:
        config.load_configs()

    flags = ["seed", "samples", "tol_algebraic", "tol_fd", "backend", "format", "threads", "timing"]
    overrides = {name: getattr(args, name) for name in flags if getattr(args, name) is not None}
    try:
        return RunConfig.model_validate({**config.run, **overrides})
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e


def _emit(report, cfg: RunConfig, text) -> int:
    sys.stdout.write(report.to_json() + "\n" if cfg.format == "json" else text(report))
    return EXIT_PASS if report.passed else EXIT_FAIL


def dispatch(args: argparse.Namespace, cfg: RunConfig) -> int:
    match args.command:
        case "structure":
            return _emit(run_structure_suite(cfg), cfg, format_report)
        case "immersion":
            return _emit(run_immersion_report(args.source, cfg), cfg, format_report)
        case "classify":
            return _emit(classify(cfg), cfg, format_classification)
        case "sample":
            return _emit(sample(cfg, args.check, args.source), cfg, format_report)
        case "checks":
            for check in registry.checks.values():
                sys.stdout.write(f"{check.id:<20} {check.suite:<10} {check.anchor}\n")
            return EXIT_PASS
        case "schema":
            sys.stdout.write(json.dumps(VerificationReport.model_json_schema(by_alias=True), indent=2) + "\n")
            return EXIT_PASS
    raise ConfigError(f"unknown command {args.command}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = args.log_level or os.environ.get("NKVERIFY_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level if level in LOG_LEVELS else "WARNING", stream=sys.stderr, force=True)
    try:
        cfg = run_config(args)
        return dispatch(args, cfg)
    except NKVerifyError as e:
        logging.debug("nkverify failed", exc_info=True)
        sys.stderr.write(f"nkverify: error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
