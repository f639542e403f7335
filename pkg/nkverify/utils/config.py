import glob
import logging
import os

import toml
import yaml

from nkverify.errors import ConfigError


class ImmersionSource:
    name: str
    source: str

    def __init__(self, name: str, source: str):
        self.name = name
        self.source = source

    def __repr__(self):
        return f"ImmersionSource(name={self.name!r}, source={self.source!r})"


class Config:
    immersions: dict[str, ImmersionSource] = {}
    config_sources: dict[str, list] = {}
    run: dict = {}

    def __init__(
        self,
        immersions: dict[str, ImmersionSource] | None = None,
        config_sources: dict[str, list] | None = None,
        run: dict | None = None,
    ):
        self.immersions = immersions if immersions is not None else {}
        self.config_sources = config_sources if config_sources is not None else {}
        self.run = run if run is not None else {}

    def __str__(self):
        return f"Immersions: {self.immersions}, run: {self.run}"

    def load_configs(self, directory=".", filename="nkverify.yaml"):
        # Get the config directory and filename from the environment variables if provided
        env_directory = os.environ.get("NKVERIFY_CONFIG_PATH", directory)
        if env_directory is not None and env_directory != "":
            directory = env_directory
        env_filename = os.environ.get("NKVERIFY_CONFIG_FILENAME", filename)
        if env_filename is not None and env_filename != "":
            filename = env_filename

        self.load_all_configs(directory, filename)

    def clear(self):
        self.immersions = {}
        self.config_sources = {}
        self.run = {}
        logging.info("All immersion registrations have been removed")

    def load_config_file(self, directory: str, config_file: str):
        config_path = os.path.join(directory, config_file)
        if not os.path.exists(config_path):
            raise ConfigError(f"config file {config_path} does not exist")
        with open(config_path) as c:
            try:
                if config_path.endswith(".toml"):
                    loaded_artifact = toml.load(c)
                elif config_path.endswith((".yaml", ".yml")):
                    loaded_artifact = yaml.safe_load(c) or {}
                else:
                    logging.error(f"Unsupported file type: {config_path}")
                    raise ConfigError(f"unsupported config file type: {config_path}")
            except (yaml.YAMLError, toml.TomlDecodeError) as e:
                raise ConfigError(f"could not read {config_path}: {e}") from e

        if not isinstance(loaded_artifact, dict):
            raise ConfigError(f"{config_path} must hold a mapping at the top level")
        self.parse_run(loaded_artifact, config_path)
        self.parse_immersions(loaded_artifact, config_file, directory)

        logging.info("loaded config at {}".format(config_path))

    def load_all_configs(self, directory="", filename="nkverify.yaml"):
        if not os.path.exists(directory):
            logging.info(f"Config directory {directory} does not exist")
            return

        for config_path in sorted(glob.glob(os.path.join(directory, filename))):
            self.load_config_file(directory, os.path.basename(config_path))

    def get_immersion_source(self, name: str) -> ImmersionSource | None:
        if name in self.immersions:
            return self.immersions[name]
        else:
            return None

    def parse_run(self, loaded_artifact, config_path):
        run = loaded_artifact.get("run", {})
        if not isinstance(run, dict):
            raise ConfigError(f"the run table in {config_path} must be a mapping")
        self.run.update(run)

    def parse_immersions(self, loaded_artifact, config_file, directory):
        for m in loaded_artifact.get("immersions", []) or []:
            try:
                name, source = m["name"], m["source"]
            except (KeyError, TypeError) as e:
                raise ConfigError(f"immersion entries in {config_file} need a name and a source") from e
            if not os.path.isabs(source):
                source = os.path.join(directory, source)

            self.immersions[name] = ImmersionSource(name=name, source=source)
            try:
                self.config_sources[config_file].append(name)
            except KeyError:
                self.config_sources[config_file] = [name]
            logging.info("added {} to immersion config".format(name))
