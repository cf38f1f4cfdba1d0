"""
Per-state solver: block coordinate descent on the dual subproblem.

For a fixed multiplier eta, every fading state contributes
``su_rate - eta * outage`` to the dual function. The blocks are visited in a
fixed order (scheduling and SU powers, then tau1, then p1) until the
objective stops improving. Each accepted step never lowers the objective.
"""

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Tuple

from ..model.channel import FadingState
from ..model.rates import (
    Allocation,
    SecrecyMode,
    coop_secrecy,
    objective_batch,
    su_rate,
)
from .subproblems import schedule_and_powers, update_p1, update_tau1

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.bcd")


@dataclass(frozen=True, eq=False)
class PerStateSolution:
    """
    Full allocation of one fading state and what it achieves.

    Attributes:
        allocation: Reconstructed allocation with tau0 + tau1 = 1 and the
            primary power budget used in full
        dual_value: Per-state dual objective at the solving eta
        su_rate: Secondary rate, bits/s/Hz
        secrecy: Primary secrecy rate, bits/s/Hz
        outage: 1 if secrecy fell short of the target
        bcd_iterations: Number of BCD passes
        converged: False if the pass cap was hit first
        objective_history: Objective after every pass, starting with the initial point
    """

    allocation: Allocation
    dual_value: float
    su_rate: float
    secrecy: float
    outage: int
    bcd_iterations: int
    converged: bool = True
    objective_history: Tuple[float, ...] = ()


def per_state_objective(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
) -> float:
    """Dual objective of one state: ``su_rate - eta * outage``."""
    return float(
        objective_batch(state, alloc.tau1, alloc.p1, alloc.p_s, alloc.q_s, config, eta, mode)
    )


def reconstruct_allocation(
    alloc: Allocation, tau1: float, p1: float, config: "NetworkConfig"
) -> Allocation:
    """
    Set the primary variables and rebuild tau0 and p0 from them.

    ``tau0 = 1 - tau1`` and ``p0 = (P_max - p1 tau1) / (1 - tau1)``. When
    tau1 = 1 nothing is harvested, no secondary user can transmit, and the
    whole budget goes to WIT: ``p0 = 0`` and ``p1 = P_max``.
    """
    tau0 = 1.0 - tau1
    if tau0 > 0:
        p0 = max(config.p_max - p1 * tau1, 0.0) / tau0
    else:
        p0, p1 = 0.0, config.p_max
    return replace(alloc, tau0=tau0, tau1=tau1, p0=p0, p1=p1)


def solve_per_state(
    state: FadingState,
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
) -> PerStateSolution:
    """
    Maximize the per-state dual objective by block coordinate descent.

    Args:
        state: Fading state
        config: Network configuration (tolerance, pass cap, mode flags)
        eta: Outage penalty weight, nonnegative
        mode: Eavesdropper model, defaults to ``config.secrecy_mode``

    Returns:
        PerStateSolution; always feasible, the all-jamming allocation in the
        worst case
    """
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")

    mode = config.secrecy_mode if mode is None else SecrecyMode(mode)
    solver = config.solver

    alloc = reconstruct_allocation(
        Allocation.initial(state.num_sus, config.p_max), 0.5, config.p_max, config
    )
    value = per_state_objective(state, alloc, config, eta, mode)
    history = [value]

    def step(proposal: Allocation) -> None:
        nonlocal alloc, value
        proposed = per_state_objective(state, proposal, config, eta, mode)
        if proposed > value:
            alloc, value = proposal, proposed

    converged = False
    iterations = 0
    for iterations in range(1, solver.bcd_max_iters + 1):
        step(schedule_and_powers(state, alloc, config, eta, mode))
        step(reconstruct_allocation(alloc, update_tau1(state, alloc, config), alloc.p1, config))
        step(
            reconstruct_allocation(
                alloc, alloc.tau1, update_p1(state, alloc, config, eta, mode), config
            )
        )
        history.append(value)
        if history[-1] - history[-2] < solver.bcd_tol:
            converged = True
            break

    if not converged:
        logger.debug(f"BCD hit the pass cap of {solver.bcd_max_iters} at eta={eta}")

    # the primary alone for the whole block is always feasible
    no_coop = reconstruct_allocation(
        Allocation.initial(state.num_sus, config.p_max), 1.0, config.p_max, config
    )
    no_coop_value = per_state_objective(state, no_coop, config, eta, mode)
    if no_coop_value > value:
        logger.debug(f"No cooperation beats BCD at eta={eta}: {no_coop_value} > {value}")
        alloc, value = no_coop, no_coop_value
        history.append(value)

    report = coop_secrecy(state, alloc, config, mode)
    return PerStateSolution(
        allocation=alloc,
        dual_value=value,
        su_rate=su_rate(state, alloc, config),
        secrecy=report.secrecy,
        outage=report.outage,
        bcd_iterations=iterations,
        converged=converged,
        objective_history=tuple(history),
    )


def interchange_gap(
    state: FadingState,
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
) -> float:
    """
    Objective of the candidate-set solver minus that of the per-eavesdropper rule.

    Nonzero values mark states where picking the worst eavesdropper's own
    optimum does not solve the true max-over-eavesdroppers problem.
    """
    exact_config = config.with_updates(solver={"worst_eavesdropper_rule": False})
    literal_config = config.with_updates(solver={"worst_eavesdropper_rule": True})
    exact = solve_per_state(state, exact_config, eta, mode)
    literal = solve_per_state(state, literal_config, eta, mode)
    return exact.dual_value - literal.dual_value
