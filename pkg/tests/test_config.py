import os

import pytest
from pydantic import ValidationError

from nkverify.errors import ConfigError
from nkverify.utils.config import Config
from nkverify.verify.types import RunConfig

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

os.environ["NKVERIFY_CONFIG_FILENAME"] = "test-config.yaml"
os.environ["NKVERIFY_CONFIG_PATH"] = FIXTURES


def test_config_load():
    config = Config()
    config.load_configs()
    assert config.run == {"seed": 11, "samples": 3}
    assert config.config_sources == {"test-config.yaml": ["flat-torus", "graph"]}
    assert config.get_immersion_source("flat-torus").source == os.path.join(FIXTURES, "f8-copy.imm")
    assert config.get_immersion_source("graph").name == "graph"
    assert config.get_immersion_source("f7") is None


def test_config_load_toml():
    config = Config()
    config.load_config_file(FIXTURES, "test-config.toml")
    assert config.run == {"seed": 5, "tol_fd": 1e-5}
    assert list(config.immersions) == ["flat-torus"]


def test_config_clear():
    config = Config()
    config.load_configs()
    config.clear()
    assert config.run == {}
    assert config.immersions == {}


def test_missing_directory_is_ignored(tmp_path):
    config = Config()
    config.load_all_configs(str(tmp_path / "absent"), "nkverify.yaml")
    assert config.immersions == {}
    config.load_all_configs(str(tmp_path), "nkverify.yaml")
    assert config.run == {}


def test_glob_loads_every_match(tmp_path):
    (tmp_path / "a.yaml").write_text("run:\n  seed: 1\nimmersions:\n- name: one\n  source: one.imm\n")
    (tmp_path / "b.yaml").write_text("run:\n  seed: 2\n")
    config = Config()
    config.load_all_configs(str(tmp_path), "*.yaml")
    assert config.run == {"seed": 2}
    assert config.get_immersion_source("one").source == os.path.join(str(tmp_path), "one.imm")


@pytest.mark.parametrize(
    "filename,content",
    [
        ("bad.yaml", "run: [unclosed\n"),
        ("bad.toml", "[run\nseed = 1\n"),
        ("bad.json", "{}"),
        ("list.yaml", "- 1\n- 2\n"),
        ("run.yaml", "run: 3\n"),
        ("entry.yaml", "immersions:\n- name: only-a-name\n"),
    ],
)
def test_invalid_config_files(tmp_path, filename, content):
    (tmp_path / filename).write_text(content)
    with pytest.raises(ConfigError):
        Config().load_config_file(str(tmp_path), filename)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        Config().load_config_file(str(tmp_path), "nkverify.yaml")


def test_run_config_defaults():
    cfg = RunConfig()
    assert cfg.seed == 0
    assert cfg.tol_roots == 1e-14
    assert cfg.sample_count("structure") == 10000
    assert cfg.sample_count("immersion") == 20
    assert cfg.sample_count("sample") == 1000
    assert RunConfig(backend="exact").sample_count("structure") == 50
    assert RunConfig(samples=7).sample_count("immersion") == 7


@pytest.mark.parametrize(
    "values",
    [
        {"seed": -1},
        {"seed": 2**64},
        {"samples": 0},
        {"backend": "interval"},
        {"format": "xml"},
        {"tol_fd": 0},
        {"colour": "blue"},
    ],
)
def test_run_config_validation(values):
    with pytest.raises(ValidationError):
        RunConfig.model_validate(values)
