"""
Configuration Loader for the secure-cwpcn engine

Loads network configurations and experiment specs from TOML or YAML files in
the repository ``configs/`` directory (or any explicit path) and validates
them into typed models.
"""

import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import ValidationError

from ..errors import ConfigurationError
from .settings import ExperimentSpec, NetworkConfig, RuntimeSettings

logger = logging.getLogger("secure-cwpcn.config_loader")

SUPPORTED_SUFFIXES = (".toml", ".yaml", ".yml")


def default_configs_directory() -> Path:
    """
    Directory searched for config names when none is given.

    ``CWPCN_CONFIGS_DIR`` wins, then a ``configs/`` directory in the working
    directory, then the one next to a source checkout.
    """
    configured = RuntimeSettings().configs_dir
    if configured:
        return Path(configured)

    local = Path.cwd() / "configs"
    if local.is_dir():
        return local
    return Path(__file__).resolve().parents[3] / "configs"


@dataclass
class ConfigMetadata:
    """Metadata block of a configuration file."""

    name: str
    description: str
    path: Path


class ConfigLoader:
    """
    Loads and caches configuration documents.

    Names are resolved against the configs directory by trying each supported
    suffix; anything that already points to an existing file is used as is.
    A file may hold a network configuration at the top level, or under
    ``[network]`` next to an ``[experiment]`` table.
    """

    def __init__(self, configs_directory: Optional[str] = None):
        """
        Initialize the loader.

        Args:
            configs_directory: Directory holding config files. Defaults to
                ``default_configs_directory()``.
        """
        if configs_directory is None:
            self.configs_directory = default_configs_directory()
        else:
            self.configs_directory = Path(configs_directory)

        self.loaded_documents: Dict[Path, Dict[str, Any]] = {}

    def resolve(self, name_or_path: str) -> Path:
        """
        Find the file behind a config name or path.

        Raises:
            ConfigurationError: If no matching file exists
        """
        candidate = Path(name_or_path)
        if candidate.is_file():
            return candidate

        for base in (self.configs_directory, self.configs_directory / "experiments"):
            for suffix in SUPPORTED_SUFFIXES:
                path = base / f"{name_or_path}{suffix}"
                if path.is_file():
                    return path

        raise ConfigurationError(f"Config file not found: {name_or_path}")

    def load_document(self, name_or_path: str) -> Dict[str, Any]:
        """
        Parse a TOML or YAML file into a dict, caching by resolved path.

        Raises:
            ConfigurationError: If the file is missing or cannot be parsed
        """
        path = self.resolve(name_or_path)
        if path in self.loaded_documents:
            return self.loaded_documents[path]

        try:
            if path.suffix == ".toml":
                with open(path, "rb") as f:
                    document = tomllib.load(f)
            else:
                with open(path, "r", encoding="utf-8") as f:
                    document = yaml.safe_load(f) or {}
        except (tomllib.TOMLDecodeError, yaml.YAMLError) as e:
            logger.error(f"Failed to parse {path}: {e}")
            raise ConfigurationError(f"Error parsing config {path}: {e}") from e

        if not isinstance(document, dict):
            raise ConfigurationError(f"Config {path} must contain a mapping")

        self.loaded_documents[path] = document
        logger.debug(f"Loaded config document {path}")
        return document

    def load_network_config(self, name_or_path: str) -> NetworkConfig:
        """
        Load and validate a network configuration.

        Raises:
            ConfigurationError: If the file is missing or fails validation
        """
        document = self.load_document(name_or_path)
        if "network" in document:
            document = document["network"]
        document = {
            key: value
            for key, value in document.items()
            if key not in ("metadata", "experiment")
        }

        try:
            return NetworkConfig.model_validate(document)
        except ValidationError as e:
            logger.error(f"Invalid network config {name_or_path}: {e}")
            raise ConfigurationError(f"Invalid network config {name_or_path}: {e}") from e

    def load_experiment_spec(self, name_or_path: str) -> ExperimentSpec:
        """
        Load the ``[experiment]`` table of a spec file.

        Raises:
            ConfigurationError: If the table is missing or fails validation
        """
        document = self.load_document(name_or_path)
        if "experiment" not in document:
            raise ConfigurationError(f"No [experiment] table in {name_or_path}")

        try:
            return ExperimentSpec.model_validate(document["experiment"])
        except ValidationError as e:
            logger.error(f"Invalid experiment spec {name_or_path}: {e}")
            raise ConfigurationError(f"Invalid experiment spec {name_or_path}: {e}") from e

    def load_spec_network_overrides(self, name_or_path: str) -> Dict[str, Any]:
        """Return the optional ``[network]`` override table of a spec file."""
        return dict(self.load_document(name_or_path).get("network", {}))

    def get_available_configs(self) -> List[str]:
        """List config names (without suffix) in the configs directory."""
        if not self.configs_directory.exists():
            return []

        return sorted(
            path.stem
            for path in self.configs_directory.iterdir()
            if path.suffix in SUPPORTED_SUFFIXES
        )

    def get_available_experiments(self) -> List[str]:
        """List experiment spec names in ``configs/experiments``."""
        directory = self.configs_directory / "experiments"
        if not directory.exists():
            return []
        return sorted(
            path.stem for path in directory.iterdir() if path.suffix in SUPPORTED_SUFFIXES
        )

    def get_config_metadata(self, name_or_path: str) -> ConfigMetadata:
        """Read the optional ``[metadata]`` table of a config file."""
        path = self.resolve(name_or_path)
        metadata = self.load_document(name_or_path).get("metadata", {})
        return ConfigMetadata(
            name=metadata.get("name", path.stem),
            description=metadata.get("description", ""),
            path=path,
        )


# Global loader instance
config_loader = ConfigLoader()
