"""Configuration models and file loading."""

from .loader import ConfigLoader, config_loader
from .settings import (
    ExperimentSpec,
    GeometryConfig,
    NetworkConfig,
    RuntimeSettings,
    SolverConfig,
)

__all__ = [
    "ConfigLoader",
    "config_loader",
    "ExperimentSpec",
    "GeometryConfig",
    "NetworkConfig",
    "RuntimeSettings",
    "SolverConfig",
]
