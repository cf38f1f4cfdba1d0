"""
Pytest configuration and shared fixtures for secure-cwpcn tests.

Most tests run on a normalized network: unit noise power, path loss switched
off (so every gain is a unit-mean exponential draw) and 10 W transmit powers.
"""

from pathlib import Path

import numpy as np
import pytest

from secure_cwpcn.config.settings import NetworkConfig
from secure_cwpcn.model.channel import FadingState, generate_ensemble
from secure_cwpcn.model.rates import Allocation


@pytest.fixture
def unit_config() -> NetworkConfig:
    """Small normalized network with fast solver settings."""
    return NetworkConfig(
        num_sus=3,
        num_eavs=2,
        chap_power_dbw=10.0,
        p_max_dbw=10.0,
        noise_power_dbw=0.0,
        pathloss_intercept_db=0.0,
        pathloss_exponent_coeff_db=0.0,
        seed=11,
        solver={"max_dual_iters": 20, "search_grid_points": 50},
    )


@pytest.fixture
def normalized_config() -> NetworkConfig:
    """K = 1, N = 1 with unit noise and unit transmit powers, for hand-computed values."""
    return NetworkConfig(
        num_sus=1,
        num_eavs=1,
        chap_power_dbw=0.0,
        p_max_dbw=0.0,
        noise_power_dbw=0.0,
        pathloss_intercept_db=0.0,
        pathloss_exponent_coeff_db=0.0,
    )


@pytest.fixture
def simple_state() -> FadingState:
    """One secondary user and one eavesdropper with round-number gains."""
    return FadingState.from_real_gains(
        h_ss=[2.0], h_sp=[0.5], h_se=[[0.25]], h_pp=1.0, h_pst=[1.0], h_psr=0.5, h_pe=[0.5]
    )


@pytest.fixture
def simple_allocation() -> Allocation:
    """Valid allocation for ``simple_state``: user 1 spends exactly what it harvested."""
    return Allocation(
        tau0=0.5,
        tau1=0.5,
        p0=0.0,
        p1=2.0,
        p_s=np.array([0.0, 1.0]),
        q_s=np.zeros(2),
        scheduled=1,
    )


@pytest.fixture
def unit_states(unit_config):
    """Reproducible ensemble of 30 normalized states."""
    return generate_ensemble(unit_config, 30)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML network config into tmp_path and return its path."""

    def _write(name: str = "net", **fields) -> Path:
        lines = []
        tables = {}
        for key, value in fields.items():
            if isinstance(value, dict):
                tables[key] = value
            else:
                lines.append(f"{key} = {_toml_value(value)}")
        for table, entries in tables.items():
            lines.append(f"\n[{table}]")
            lines.extend(f"{key} = {_toml_value(value)}" for key, value in entries.items())

        path = tmp_path / f"{name}.toml"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return repr(value)


UNIT_NETWORK = {
    "num_sus": 2,
    "num_eavs": 1,
    "chap_power_dbw": 10.0,
    "p_max_dbw": 10.0,
    "noise_power_dbw": 0.0,
    "pathloss_intercept_db": 0.0,
    "pathloss_exponent_coeff_db": 0.0,
    "seed": 3,
}


@pytest.fixture
def unit_network_fields():
    """Field values of a tiny normalized network for config files."""
    return dict(UNIT_NETWORK)
