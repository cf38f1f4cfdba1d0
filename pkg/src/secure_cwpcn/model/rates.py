"""
Rate, secrecy-rate and outage evaluation.

Everything here is a pure function of a fading state and a set of decision
variables. The ``*_batch`` functions broadcast over leading axes of the power
arrays so that solvers and oracles can score many candidate allocations in
one call; the scalar functions below them are thin wrappers.

Logs are base 2 and rates are in bits/s/Hz. A secrecy rate equal to the
target counts as no outage.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from .channel import FadingState

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.rates")

LN2 = np.log(2.0)


class SecrecyMode(str, Enum):
    """How eavesdroppers combine what they overhear."""

    NONCOLLUSIVE = "noncollusive"
    COLLUSIVE = "collusive"
    COLLUSIVE_LB = "collusive-lb"


def _log2_1p(x):
    return np.log1p(x) / LN2


@dataclass(frozen=True, eq=False)
class Allocation:
    """
    Decision variables of one fading block.

    ``p_s`` and ``q_s`` have length K+1; entry 0 belongs to the virtual user.
    ``scheduled`` is the index of the information-transmitting user, 0 when
    every real user jams.
    """

    tau0: float
    tau1: float
    p0: float
    p1: float
    p_s: np.ndarray
    q_s: np.ndarray
    scheduled: int = 0

    def __post_init__(self):
        for name in ("p_s", "q_s"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        for name in ("tau0", "tau1", "p0", "p1"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "scheduled", int(self.scheduled))

    @classmethod
    def initial(cls, num_sus: int, p_max: float) -> "Allocation":
        """Starting point of block coordinate descent: tau1 = 0.5, p1 = P_max, no SU power."""
        zeros = np.zeros(num_sus + 1)
        return cls(tau0=0.5, tau1=0.5, p0=p_max, p1=p_max, p_s=zeros, q_s=zeros)

    def violations(
        self, state: FadingState, config: "NetworkConfig", tol: float = 1e-9
    ) -> List[str]:
        """
        Check the allocation against the time, power and energy constraints.

        Returns:
            List of human-readable violations, empty when the allocation is valid
        """
        errors = []
        lam, q_chap = config.harvest_efficiency, config.chap_power

        if self.tau0 < -tol or self.tau1 < -tol:
            errors.append("Phase durations must be nonnegative")
        if self.tau0 + self.tau1 > 1 + tol:
            errors.append(f"tau0 + tau1 = {self.tau0 + self.tau1} exceeds 1")
        if self.p0 * self.tau0 + self.p1 * self.tau1 > config.p_max + tol:
            errors.append("Average primary power exceeds P_max")
        if np.any(self.p_s < -tol) or np.any(self.q_s < -tol) or self.p0 < -tol or self.p1 < -tol:
            errors.append("Powers must be nonnegative")
        if np.any(self.p_s * self.q_s > tol):
            errors.append("A secondary user both transmits and jams")

        transmitting = np.flatnonzero(self.p_s > 0)
        if transmitting.size > 1:
            errors.append(f"Users {transmitting.tolist()} transmit information at once")
        elif transmitting.size == 1 and transmitting[0] != self.scheduled:
            errors.append(f"User {transmitting[0]} transmits but {self.scheduled} is scheduled")

        consumed = (self.p_s + self.q_s) * self.tau1
        harvested = lam * (state.h_pst * self.p0 + state.h_ss * q_chap) * self.tau0
        over = np.flatnonzero(consumed > harvested + tol)
        if over.size:
            errors.append(f"Energy causality violated for users {over.tolist()}")

        return errors


@dataclass
class SecrecyReport:
    """Primary rate, eavesdropper rate(s), secrecy rate and outage of one block."""

    pu_rate: float
    eav_rates: np.ndarray = field(repr=False)
    secrecy: float
    outage: int


def su_rate_batch(state: FadingState, tau1, p1, p_s, config: "NetworkConfig") -> np.ndarray:
    """Secondary rate ``tau1 * sum_k log2(1 + p_s h_ss / (sigma^2 + p1 h_psr))``."""
    tau1 = np.asarray(tau1, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p_s = np.asarray(p_s, dtype=float)
    denominator = np.expand_dims(config.noise_power + p1 * state.h_psr, -1)
    return tau1 * _log2_1p(p_s * state.h_ss / denominator).sum(axis=-1)


def _sinrs(state, p1, p_s, q_s, config, mode):
    p1 = np.asarray(p1, dtype=float)
    p_s = np.asarray(p_s, dtype=float)
    q_s = np.asarray(q_s, dtype=float)
    noise = config.noise_power

    pu_sinr = p1 * state.h_pp / (noise + p_s @ state.h_sp)
    # jamming-only bound drops the scheduled user's own signal at the eavesdroppers
    interfering = q_s if mode is SecrecyMode.COLLUSIVE_LB else p_s + q_s
    eav_sinr = np.expand_dims(p1, -1) * state.h_pe / (noise + interfering @ state.h_se)
    return pu_sinr, eav_sinr


def secrecy_batch(
    state: FadingState,
    tau1,
    p1,
    p_s,
    q_s,
    config: "NetworkConfig",
    mode: Optional[SecrecyMode] = None,
) -> np.ndarray:
    """
    Primary secrecy rate with cooperation, broadcast over leading axes.

    Args:
        state: Fading state
        tau1: WIT duration(s)
        p1: Primary WIT power(s)
        p_s: Information powers, trailing axis K+1
        q_s: Jamming powers, trailing axis K+1
        config: Network configuration
        mode: Eavesdropper model, defaults to ``config.secrecy_mode``

    Returns:
        Array of secrecy rates, clamped at 0
    """
    mode = config.secrecy_mode if mode is None else SecrecyMode(mode)
    pu_sinr, eav_sinr = _sinrs(state, p1, p_s, q_s, config, mode)

    if mode is SecrecyMode.NONCOLLUSIVE:
        eav_log = _log2_1p(eav_sinr.max(axis=-1))
    else:
        eav_log = _log2_1p(eav_sinr.sum(axis=-1))

    return np.asarray(tau1, dtype=float) * np.maximum(_log2_1p(pu_sinr) - eav_log, 0.0)


def per_eav_secrecy_batch(
    state: FadingState, tau1, p1, p_s, q_s, config: "NetworkConfig"
) -> np.ndarray:
    """Secrecy against each eavesdropper alone; trailing axis N."""
    pu_sinr, eav_sinr = _sinrs(state, p1, p_s, q_s, config, SecrecyMode.NONCOLLUSIVE)
    tau1 = np.expand_dims(np.asarray(tau1, dtype=float), -1)
    return tau1 * np.maximum(np.expand_dims(_log2_1p(pu_sinr), -1) - _log2_1p(eav_sinr), 0.0)


def objective_batch(
    state: FadingState,
    tau1,
    p1,
    p_s,
    q_s,
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
) -> np.ndarray:
    """Per-state dual objective ``su_rate - eta * outage`` over candidate batches."""
    rate = su_rate_batch(state, tau1, p1, p_s, config)
    secrecy = secrecy_batch(state, tau1, p1, p_s, q_s, config, mode)
    return rate - eta * (secrecy < config.target_rate)


def no_coop_secrecy(
    state: FadingState, config: "NetworkConfig", collusive: Optional[bool] = None
) -> float:
    """
    Secrecy rate of the primary link when it transmits alone at P_max for the whole block.

    Collusive eavesdroppers combine their SNRs by maximum-ratio combining;
    otherwise the strongest one counts.
    """
    collusive = config.collusive if collusive is None else collusive
    p_max, noise = config.p_max, config.noise_power

    pu_log = _log2_1p(p_max * state.h_pp / noise)
    eav_snr = p_max * state.h_pe / noise
    eav_log = _log2_1p(eav_snr.sum() if collusive else eav_snr.max())
    return float(max(pu_log - eav_log, 0.0))


def coop_secrecy(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    mode: Optional[SecrecyMode] = None,
) -> SecrecyReport:
    """
    Evaluate the primary link's rates and secrecy under an allocation.

    In non-collusive mode ``eav_rates`` holds one rate per eavesdropper; in
    the collusive modes it holds the single combined rate.
    """
    mode = config.secrecy_mode if mode is None else SecrecyMode(mode)
    pu_sinr, eav_sinr = _sinrs(state, alloc.p1, alloc.p_s, alloc.q_s, config, mode)

    pu_rate = alloc.tau1 * float(_log2_1p(pu_sinr))
    if mode is SecrecyMode.NONCOLLUSIVE:
        eav_rates = alloc.tau1 * _log2_1p(eav_sinr)
    else:
        eav_rates = np.atleast_1d(alloc.tau1 * _log2_1p(eav_sinr.sum()))

    # same arithmetic as the batch path so outage decisions agree bit for bit
    secrecy = float(
        secrecy_batch(state, alloc.tau1, alloc.p1, alloc.p_s, alloc.q_s, config, mode)
    )
    return SecrecyReport(
        pu_rate=pu_rate,
        eav_rates=eav_rates,
        secrecy=secrecy,
        outage=outage_indicator(secrecy, config.target_rate),
    )


def su_rate(state: FadingState, alloc: Allocation, config: "NetworkConfig") -> float:
    """Secondary rate of one block."""
    return float(su_rate_batch(state, alloc.tau1, alloc.p1, alloc.p_s, config))


def outage_indicator(secrecy: float, target_rate: float) -> int:
    """1 when the secrecy rate falls short of the target, 0 otherwise."""
    return int(secrecy < target_rate)


def per_eav_secrecy(
    state: FadingState, alloc: Allocation, config: "NetworkConfig", n: int
) -> float:
    """
    Secrecy rate against eavesdropper ``n`` alone.

    Raises:
        IndexError: If ``n`` is not a valid eavesdropper index
    """
    if not 0 <= n < state.num_eavs:
        raise IndexError(f"Eavesdropper index {n} out of range for N={state.num_eavs}")
    values = per_eav_secrecy_batch(state, alloc.tau1, alloc.p1, alloc.p_s, alloc.q_s, config)
    return float(values[n])
