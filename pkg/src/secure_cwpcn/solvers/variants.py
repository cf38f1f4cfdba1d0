"""
Variant solvers built on the per-state machinery.

- Greedy: fixes a very large outage penalty instead of running the dual
  loop, which drives the primary outage as low as the protocol allows.
- Unknown eavesdropper CSI: schedules the user with the best link to the
  access point, spends every harvested joule and picks tau1 by a 1-D search.
  It never reads an eavesdropper gain.
- No cooperation: the primary link alone, used as the reference curve.
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from ..model.channel import FadingState
from ..model.rates import Allocation, SecrecyMode, coop_secrecy, su_rate
from ..utils.parallel import worker_pool
from ..utils.search import maximize_bounded
from .bcd import PerStateSolution
from .ensemble import (
    DualTrace,
    EnsembleSolution,
    ensemble_means,
    estimate_eps_p,
    solve_ensemble,
)

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.variants")


@dataclass(frozen=True)
class GreedyConfig:
    """
    Fixed penalty weight of the greedy solver.

    Zero is accepted and reduces the greedy solver to plain rate maximization.
    """

    eta_greedy: float = 1e6
    mode: Optional[SecrecyMode] = None

    def __post_init__(self):
        if self.eta_greedy < 0:
            raise ValueError(f"eta_greedy must be nonnegative, got {self.eta_greedy}")


def _with_mode(config: "NetworkConfig", mode: Optional[SecrecyMode]) -> "NetworkConfig":
    return config if mode is None else config.with_mode(SecrecyMode(mode))


def run_greedy(
    states: Sequence[FadingState],
    config: "NetworkConfig",
    greedy_config: Optional[GreedyConfig] = None,
    workers: int = 1,
) -> EnsembleSolution:
    """
    Solve every state at a fixed, very large penalty; no dual iteration.

    Args:
        states: Fading ensemble
        config: Network configuration
        greedy_config: Penalty weight and mode, defaults to
            ``GreedyConfig(config.solver.eta_greedy)``
        workers: Worker processes for the per-state solves

    Returns:
        EnsembleSolution whose ``eps_0`` is reported for reference only
    """
    if greedy_config is None:
        greedy_config = GreedyConfig(eta_greedy=config.solver.eta_greedy)
    config = _with_mode(config, greedy_config.mode)

    eps_p = estimate_eps_p(states, config)
    solutions = solve_ensemble(states, config, greedy_config.eta_greedy, workers=workers)
    rate, outage = ensemble_means(solutions)

    trace = DualTrace(converged=True)
    trace.record(0, greedy_config.eta_greedy, outage, max(eps_p - config.delta_eps, 0.0), rate)
    logger.info(
        f"Greedy run over {len(states)} states: rate={rate:.6g}, eps_ps={outage:.4f}, "
        f"eps_p={eps_p:.4f}"
    )
    return EnsembleSolution(
        per_state=solutions,
        ergodic_su_rate=rate,
        eps_ps=outage,
        eps_p=eps_p,
        eps_0=max(eps_p - config.delta_eps, 0.0),
        trace=trace,
        eta=greedy_config.eta_greedy,
    )


def unknown_csi_objective(tau1, gain: float, h_psr: float, config: "NetworkConfig") -> np.ndarray:
    """
    Secondary rate of the blind scheme as a function of tau1.

    ``tau1 log2(1 + lambda h^2 Q (1 - tau1) / (sigma^2 tau1 + P_max h_psr))``,
    defined as 0 at both ends of [0, 1].
    """
    tau1 = np.asarray(tau1, dtype=float)
    lam, q_chap = config.harvest_efficiency, config.chap_power
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = lam * gain**2 * q_chap * (1.0 - tau1) / (
            config.noise_power * tau1 + config.p_max * h_psr
        )
        value = tau1 * np.log1p(sinr) / np.log(2.0)
    return np.where((tau1 > 0) & (tau1 < 1), value, 0.0)


def solve_unknown_csi(state: FadingState, config: "NetworkConfig") -> PerStateSolution:
    """
    Allocate one state without eavesdropper CSI.

    The user with the largest ``h_ss`` transmits, all others jam, and every
    user spends all of the energy harvested from the access point. The
    primary transmitter stays silent during WPT and spends its whole budget
    in WIT. Outage is evaluated afterwards with the true eavesdropper gains.
    """
    lam, q_chap, p_max = config.harvest_efficiency, config.chap_power, config.p_max
    zeros = np.zeros(state.num_sus + 1)

    if not np.any(state.h_ss[1:] > 0):
        alloc = Allocation(tau0=0.0, tau1=1.0, p0=0.0, p1=p_max, p_s=zeros, q_s=zeros)
    else:
        scheduled = 1 + int(np.argmax(state.h_ss[1:]))
        solver = config.solver
        tau1, _ = maximize_bounded(
            partial(
                unknown_csi_objective,
                gain=float(state.h_ss[scheduled]),
                h_psr=state.h_psr,
                config=config,
            ),
            0.0,
            1.0,
            solver.search_grid_points,
            solver.search_tol,
        )
        # the rate vanishes at tau1 = 0 but p1 = P_max / tau1 does not exist there
        tau1 = max(tau1, solver.tau1_min)
        tau0 = 1.0 - tau1
        spend = lam * state.h_ss * q_chap * tau0 / tau1

        p_s = zeros.copy()
        p_s[scheduled] = spend[scheduled]
        q_s = spend.copy()
        q_s[scheduled] = 0.0
        alloc = Allocation(
            tau0=tau0, tau1=tau1, p0=0.0, p1=p_max / tau1, p_s=p_s, q_s=q_s, scheduled=scheduled
        )

    report = coop_secrecy(state, alloc, config)
    rate = su_rate(state, alloc, config)
    return PerStateSolution(
        allocation=alloc,
        dual_value=rate,
        su_rate=rate,
        secrecy=report.secrecy,
        outage=report.outage,
        bcd_iterations=0,
    )


def run_unknown_csi(
    states: Sequence[FadingState], config: "NetworkConfig", workers: int = 1
) -> EnsembleSolution:
    """Apply the blind scheme to every state of an ensemble."""
    eps_p = estimate_eps_p(states, config)
    with worker_pool(workers) as pmap:
        solutions = pmap(partial(solve_unknown_csi, config=config), states)
    rate, outage = ensemble_means(solutions)

    eps_0 = max(eps_p - config.delta_eps, 0.0)
    trace = DualTrace(converged=True)
    trace.record(0, 0.0, outage, eps_0, rate)
    return EnsembleSolution(
        per_state=solutions,
        ergodic_su_rate=rate,
        eps_ps=outage,
        eps_p=eps_p,
        eps_0=eps_0,
        trace=trace,
    )


def run_no_cooperation(states: Sequence[FadingState], config: "NetworkConfig") -> EnsembleSolution:
    """Reference point: no secondary traffic, outage equals the no-cooperation outage."""
    eps_p = estimate_eps_p(states, config)
    eps_0 = max(eps_p - config.delta_eps, 0.0)
    trace = DualTrace(converged=True)
    trace.record(0, 0.0, eps_p, eps_0, 0.0)
    return EnsembleSolution(
        per_state=[], ergodic_su_rate=0.0, eps_ps=eps_p, eps_p=eps_p, eps_0=eps_0, trace=trace
    )
