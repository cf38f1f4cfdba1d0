"""Experiment sweeps and result persistence."""

from .experiment import RESULT_COLUMNS, ExperimentResult, config_hash, run_experiment

__all__ = ["RESULT_COLUMNS", "ExperimentResult", "config_hash", "run_experiment"]
