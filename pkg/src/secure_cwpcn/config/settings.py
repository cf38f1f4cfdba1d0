"""
Typed configuration models for the secure-cwpcn engine.

Network parameters, node geometry, solver tolerances and experiment sweeps
are pydantic models so that every file loaded from ``configs/`` is validated
before a single fading state is drawn. Process-level settings (which config
to load, where to write results) come from the environment or a ``.env``
file through pydantic-settings.
"""

from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..model.channel import dbw_to_watts
from ..model.rates import SecrecyMode

SweepAxis = Literal["delta_eps", "num_sus", "num_eavs"]
Algorithm = Literal["alg1", "greedy", "unknown_csi", "no_coop_baseline"]


class GeometryConfig(BaseModel):
    """Ring radii in meters. Every ring is centered on the primary transmitter."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    prx_inner: float = Field(default=5.0, gt=0)
    prx_outer: float = Field(default=10.0, gt=0)
    node_inner: float = Field(default=10.0, gt=0)
    node_outer: float = Field(default=20.0, gt=0)

    @model_validator(mode="after")
    def _check_rings(self) -> "GeometryConfig":
        # inner == outer is allowed and pins nodes to a circle
        if self.prx_inner > self.prx_outer:
            raise ValueError("prx_inner must not exceed prx_outer")
        if self.node_inner > self.node_outer:
            raise ValueError("node_inner must not exceed node_outer")
        return self


class SolverConfig(BaseModel):
    """Tolerances, iteration caps and step rules of the dual and BCD loops."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    bcd_tol: float = Field(default=1e-6, gt=0)
    bcd_max_iters: int = Field(default=50, ge=1)
    tau1_min: float = Field(default=1e-6, gt=0, lt=0.5)
    eta0: float = Field(default=50.0, ge=0)
    theta0: float = Field(default=10.0, gt=0)
    dual_eps: float = Field(default=1e-3, gt=0)
    max_dual_iters: int = Field(default=200, ge=1)
    eta_greedy: float = Field(default=1e6, gt=0)
    constraint_slack: float = Field(default=0.01, ge=0)
    check_feasibility: bool = True
    # eta0, theta0 and dual_eps in units of the peak eta = 0 secondary rate
    rate_scaled_eta: bool = False
    worst_eavesdropper_rule: bool = False
    collusive_lower_bound: bool = False
    search_grid_points: int = Field(default=100, ge=3)
    search_tol: float = Field(default=1e-6, gt=0)


class NetworkConfig(BaseModel):
    """
    All scalar parameters of one network scenario.

    Powers are given in dBW, as in the simulation setup they come from, and
    exposed in watts through properties.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_sus: int = Field(default=20, ge=1, description="K, actual secondary users")
    num_eavs: int = Field(default=4, ge=1, description="N, eavesdroppers")
    harvest_efficiency: float = Field(default=0.5, gt=0, lt=1, description="lambda")
    target_rate: float = Field(default=0.5, gt=0, description="R, bits/s/Hz")
    chap_power_dbw: float = Field(default=10.0, description="Q")
    p_max_dbw: float = Field(default=10.0, description="P_max")
    noise_power_dbw: float = Field(default=-90.0, description="sigma^2")
    delta_eps: float = Field(default=0.05, ge=0, le=1)
    collusive: bool = False
    fixed_topology: bool = False
    pathloss_intercept_db: float = 30.0
    pathloss_exponent_coeff_db: float = 25.0
    seed: int = Field(default=0, ge=0)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @field_validator("chap_power_dbw", "p_max_dbw", "noise_power_dbw")
    @classmethod
    def _finite_power(cls, value: float) -> float:
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("power levels must be finite dBW values")
        return value

    @property
    def chap_power(self) -> float:
        """Q in watts."""
        return dbw_to_watts(self.chap_power_dbw)

    @property
    def p_max(self) -> float:
        """P_max in watts."""
        return dbw_to_watts(self.p_max_dbw)

    @property
    def noise_power(self) -> float:
        """sigma^2 in watts."""
        return dbw_to_watts(self.noise_power_dbw)

    @property
    def secrecy_mode(self) -> SecrecyMode:
        if not self.collusive:
            return SecrecyMode.NONCOLLUSIVE
        if self.solver.collusive_lower_bound:
            return SecrecyMode.COLLUSIVE_LB
        return SecrecyMode.COLLUSIVE

    def with_updates(self, **updates: Any) -> "NetworkConfig":
        """
        Return a validated copy with top-level fields replaced.

        Nested ``solver`` and ``geometry`` updates may be given as dicts and
        are merged into the current values.

        Example:
            >>> NetworkConfig().with_updates(num_sus=5, solver={"eta0": 1.0})
        """
        data = self.model_dump()
        for key, value in updates.items():
            if key in ("solver", "geometry") and isinstance(value, dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        return NetworkConfig.model_validate(data)

    def with_mode(self, mode: SecrecyMode) -> "NetworkConfig":
        """Return a copy whose collusion flags select the given secrecy mode."""
        return self.with_updates(
            collusive=mode is not SecrecyMode.NONCOLLUSIVE,
            solver={"collusive_lower_bound": mode is SecrecyMode.COLLUSIVE_LB},
        )


class ExperimentSpec(BaseModel):
    """One sweep over a single axis, run for one or more algorithms."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "experiment"
    algorithms: List[Algorithm] = Field(default_factory=lambda: ["alg1"])
    axis: SweepAxis = "delta_eps"
    values: List[float] = Field(default_factory=lambda: [0.05])
    states: int = Field(default=5000, ge=1)
    replicates: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    output: str = "results"
    config: Optional[str] = None
    modes: Optional[List[SecrecyMode]] = None

    @field_validator("algorithms", "values")
    @classmethod
    def _nonempty(cls, value: list) -> list:
        if not value:
            raise ValueError("must not be empty")
        return value

    @field_validator("modes")
    @classmethod
    def _distinct_modes(cls, value: Optional[list]) -> Optional[list]:
        if value is not None and len(set(value)) != len(value):
            raise ValueError("modes must not repeat")
        return value

    @model_validator(mode="after")
    def _integer_axes(self) -> "ExperimentSpec":
        if self.axis in ("num_sus", "num_eavs"):
            for value in self.values:
                if value != int(value) or value < 1:
                    raise ValueError(f"{self.axis} values must be positive integers")
        return self

    def axis_value(self, value: float) -> Any:
        """Cast a sweep value to the type of the config field it replaces."""
        return int(value) if self.axis in ("num_sus", "num_eavs") else float(value)


class RuntimeSettings(BaseSettings):
    """Process-level settings read from CWPCN_* environment variables or .env."""

    model_config = SettingsConfigDict(
        env_prefix="CWPCN_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    config: str = "default"
    output_dir: str = "results"
    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    configs_dir: Optional[str] = None
