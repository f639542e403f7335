import json
import os
import subprocess
import sys

import pytest

from nkverify.main import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, main
from nkverify.utils import get_config

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

os.environ["NKVERIFY_CONFIG_FILENAME"] = "test-config.yaml"
os.environ["NKVERIFY_CONFIG_PATH"] = FIXTURES


@pytest.fixture(autouse=True)
def fixture_config(monkeypatch):
    monkeypatch.setenv("NKVERIFY_CONFIG_FILENAME", "test-config.yaml")
    monkeypatch.setenv("NKVERIFY_CONFIG_PATH", FIXTURES)
    monkeypatch.delenv("NKVERIFY_THREADS", raising=False)


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_config_load(capsys):
    code, report = run_json(capsys, "structure")
    assert code == EXIT_PASS
    assert report["env"] == {"seed": 11, "samples": 3, "backend": "float"}
    assert sorted(get_config().immersions) == ["flat-torus", "graph"]


def test_flags_override_config(capsys):
    code, report = run_json(capsys, "structure", "--seed", "4", "--samples", "20")
    assert code == EXIT_PASS
    assert report["env"]["seed"] == 4
    assert report["env"]["samples"] == 20


def test_explicit_config_file(capsys):
    code, report = run_json(capsys, "structure", "--config", os.path.join(FIXTURES, "test-config.toml"), "--samples", "5")
    assert code == EXIT_PASS
    assert report["env"]["seed"] == 5
    assert list(get_config().immersions) == ["flat-torus"]


def test_structure_text(capsys):
    assert main(["structure", "--samples", "50"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.startswith("suite: structure\n")
    assert "result: PASS" in out
    assert "elapsed_ms" not in out


def test_structure_exact(capsys):
    code, report = run_json(capsys, "structure", "--backend", "exact", "--samples", "2")
    assert code == EXIT_PASS
    assert all(c["residual"] == 0.0 for c in report["checks"])


def test_report_is_thread_independent(capsys):
    _, single = run_json(capsys, "structure", "--samples", "2500", "--threads", "1")
    _, several = run_json(capsys, "structure", "--samples", "2500", "--threads", "4")
    assert single == several
    assert single["elapsed_ms"] is None


def test_timing(capsys):
    _, report = run_json(capsys, "structure", "--timing")
    assert report["elapsed_ms"] >= 0


def test_failing_tolerance(capsys):
    code, report = run_json(capsys, "sample", "--check", "eq2.10", "--samples", "100", "--tol", "1e-300")
    assert code == EXIT_FAIL
    assert report["checks"][0]["pass"] is False


def test_immersion_from_registered_name(capsys):
    code, report = run_json(capsys, "immersion", "flat-torus", "--samples", "1")
    assert code in (EXIT_PASS, EXIT_FAIL)
    assert report["suite"] == "immersion:flat"
    assert report["values"]["h123"] == pytest.approx(-0.5, abs=1e-7)
    assert report["values"]["sectional_curvature"] == pytest.approx(0.0, abs=1e-7)


def test_immersion_catalog_member(capsys):
    code, report = run_json(capsys, "immersion", "f7", "--samples", "3")
    assert code == EXIT_PASS, [c["id"] for c in report["checks"] if not c["pass"]]
    assert report["suite"] == "immersion:f7"


@pytest.mark.parametrize("module", ["nkverify.dsl", "nkverify.geometry.lagrangian", "nkverify.verify.suites", "nkverify.main"])
def test_fresh_import(module):
    result = subprocess.run([sys.executable, "-c", f"import {module}"], capture_output=True, text=True, cwd=ROOT)
    assert result.returncode == 0, result.stderr


def test_immersion_not_lagrangian(capsys):
    code, report = run_json(capsys, "immersion", "graph")
    assert code == EXIT_FAIL
    checks = {c["id"]: c for c in report["checks"]}
    assert checks["lagrangian"]["pass"] is False
    assert checks["codazzi"]["skipped"] is True
    assert checks["codazzi"]["note"] == "not Lagrangian"
    assert report["values"]["lagrangian_everywhere"] is False


def test_classify(capsys):
    code, record = run_json(capsys, "classify")
    assert code == EXIT_PASS
    assert record["polynomial"] == "32*x**3 - 6*x + 1"
    assert [r["exact"] for r in record["roots"]] == ["-1/2", "1/4"]
    assert [r["curvature_exact"] for r in record["roots"]] == ["0", "3/16"]


def test_sample(capsys):
    code, report = run_json(capsys, "sample", "--check", "eq2.5", "--samples", "200")
    assert code == EXIT_PASS
    assert report["suite"] == "sample:eq2.5"
    assert report["checks"][0]["summary"]["count"] == 200


def test_checks_and_schema(capsys):
    assert main(["checks"]) == EXIT_PASS
    listing = capsys.readouterr().out
    assert "eq2.5" in listing
    assert "prop4.2" in listing
    assert main(["schema"]) == EXIT_PASS
    schema = json.loads(capsys.readouterr().out)
    assert "checks" in schema["properties"]


@pytest.mark.parametrize(
    "argv,message",
    [
        (["sample", "--check", "eq9.9"], "Check eq9.9 not found"),
        (["sample", "--check", "angle-sum"], "needs an immersion"),
        (["immersion", "nowhere"], "Immersion nowhere not found"),
        (["immersion", os.path.join(FIXTURES, "bad-syntax.imm")], "line 3"),
        (["structure", "--seed", "-1"], "invalid run configuration"),
        (["structure", "--config", os.path.join(FIXTURES, "absent.yaml")], "does not exist"),
    ],
)
def test_input_errors(capsys, argv, message):
    assert main(argv) == EXIT_ERROR
    err = capsys.readouterr().err
    assert err.startswith("nkverify: error: ")
    assert message in err


def test_invalid_run_table(capsys, tmp_path):
    (tmp_path / "nkverify.yaml").write_text("run:\n  backend: interval\n")
    assert main(["structure", "--config", str(tmp_path / "nkverify.yaml")]) == EXIT_ERROR
    assert "invalid run configuration" in capsys.readouterr().err


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        main(["sample"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["structure", "--backend", "interval"])


@pytest.mark.skipif(
    os.environ.get("NKVERIFY_RUN_SLOW_TESTS") != "true",
    reason="NKVERIFY_RUN_SLOW_TESTS envvar was not set to true",
)
@pytest.mark.parametrize("name", [f"f{k}" for k in range(1, 9)])
def test_catalog_acceptance(capsys, name):
    code, report = run_json(capsys, "immersion", name, "--samples", "20", "--seed", "0")
    assert code == EXIT_PASS, [c["id"] for c in report["checks"] if not c["pass"]]
    prop42 = next(c for c in report["checks"] if c["id"] == "prop4.2")
    assert not prop42["skipped"]
    assert prop42["residual"] < 1e-5


@pytest.mark.skipif(
    os.environ.get("NKVERIFY_RUN_SLOW_TESTS") != "true",
    reason="NKVERIFY_RUN_SLOW_TESTS envvar was not set to true",
)
def test_structure_acceptance(capsys):
    code, report = run_json(capsys, "structure", "--samples", "10000", "--seed", "0")
    assert code == EXIT_PASS
    code, report = run_json(capsys, "structure", "--backend", "exact", "--samples", "50")
    assert code == EXIT_PASS
