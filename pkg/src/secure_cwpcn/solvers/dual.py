"""
Dual controller: subgradient iteration on the outage multiplier.

The ensemble outage constraint ``E{outage} <= eps_0`` is relaxed with a
multiplier eta. Each iteration solves every state at the current eta and
moves eta along the constraint violation, projected onto eta >= 0. The same
ensemble is used for the no-cooperation outage, so eps_0 and the achieved
outage are measured on identical channels.
"""

import logging
import math
from typing import TYPE_CHECKING, Optional, Sequence

from ..errors import InfeasibleProblemError
from ..model.channel import FadingState
from ..model.rates import SecrecyMode
from .ensemble import (
    DualTrace,
    EnsembleSolution,
    ensemble_means,
    estimate_eps_p,
    solve_ensemble,
)
from .variants import GreedyConfig, run_greedy

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.dual")

__all__ = ["check_feasibility", "estimate_eps_p", "rate_scale", "run_dual", "step_size"]


def step_size(theta0: float, t: int) -> float:
    """Diminishing step ``theta0 / sqrt(t + 1)``."""
    return theta0 / math.sqrt(t + 1)


def check_feasibility(
    states: Sequence[FadingState], config: "NetworkConfig", workers: int = 1
) -> float:
    """
    Smallest outage the protocol reaches on this ensemble.

    Runs the greedy solver at ``config.solver.eta_greedy``; the problem is
    feasible iff the returned value does not exceed eps_0.
    """
    greedy = run_greedy(states, config, GreedyConfig(eta_greedy=config.solver.eta_greedy), workers)
    return greedy.eps_ps


def rate_scale(
    states: Sequence[FadingState], config: "NetworkConfig", workers: int = 1
) -> float:
    """
    Largest per-state secondary rate with no outage penalty.

    One unit of outage costs eta in rate, so eta0, theta0 and dual_eps are
    read in multiples of this value when ``solver.rate_scaled_eta`` is set.
    Falls back to 1.0 when no state yields a positive rate.
    """
    solutions = solve_ensemble(states, config, 0.0, workers=workers)
    scale = max((s.su_rate for s in solutions), default=0.0)
    return scale if scale > 0 else 1.0


def run_dual(
    states: Sequence[FadingState],
    config: "NetworkConfig",
    mode: Optional[SecrecyMode] = None,
    workers: int = 1,
) -> EnsembleSolution:
    """
    Maximize the ergodic secondary rate subject to the primary outage target.

    Args:
        states: Fading ensemble, shared by the outage estimate and the solves
        config: Network configuration with dual step rule and tolerances
        mode: Eavesdropper model, overrides the collusion flags of ``config``
        workers: Worker processes for the per-state solves

    Returns:
        EnsembleSolution at the last evaluated multiplier

    Raises:
        InfeasibleProblemError: If eps_0 < 0 or the greedy probe cannot reach eps_0
    """
    if not states:
        raise ValueError("run_dual needs at least one fading state")
    if mode is not None:
        config = config.with_mode(SecrecyMode(mode))
    solver = config.solver

    eps_p = estimate_eps_p(states, config)
    eps_0 = eps_p - config.delta_eps
    if eps_0 < 0:
        logger.error(f"Requested reduction {config.delta_eps} exceeds eps_p={eps_p:.4f}")
        raise InfeasibleProblemError(
            f"Required outage reduction {config.delta_eps} exceeds eps_p={eps_p:.4f}",
            eps_p=eps_p,
            eps_0=eps_0,
        )

    if solver.check_feasibility:
        min_eps = check_feasibility(states, config, workers)
        if min_eps > eps_0:
            logger.error(f"Smallest reachable outage {min_eps:.4f} exceeds eps_0={eps_0:.4f}")
            raise InfeasibleProblemError(
                f"Smallest reachable outage {min_eps:.4f} exceeds target {eps_0:.4f}",
                eps_p=eps_p,
                eps_0=eps_0,
                min_eps_ps=min_eps,
            )

    scale = 1.0
    if solver.rate_scaled_eta:
        scale = rate_scale(states, config, workers)
        logger.info(f"Multiplier scale set to the peak secondary rate {scale:.6g}")

    trace = DualTrace()
    eta = solver.eta0 * scale
    solutions = []
    rate = outage = 0.0
    for t in range(solver.max_dual_iters):
        solutions = solve_ensemble(states, config, eta, workers=workers)
        rate, outage = ensemble_means(solutions)
        trace.record(t, eta, outage, eps_0, rate)
        trace.iterations = t + 1
        logger.info(
            f"Dual iteration {t}: eta={eta:.6g}, mean outage={outage:.4f}, "
            f"eps_0={eps_0:.4f}, rate={rate:.6g}"
        )

        next_eta = max(0.0, eta - scale * step_size(solver.theta0, t) * (eps_0 - outage))
        if abs(next_eta - eta) <= solver.dual_eps * scale:
            trace.converged = True
            trace.eta_history.append(next_eta)
            break
        eta = next_eta

    if not trace.converged:
        logger.warning(
            f"Dual iteration stopped at the cap of {solver.max_dual_iters} without converging"
        )

    solution = EnsembleSolution(
        per_state=solutions,
        ergodic_su_rate=rate,
        eps_ps=outage,
        eps_p=eps_p,
        eps_0=eps_0,
        trace=trace,
        eta=eta,
    )
    if solution.constraint_violated(solver.constraint_slack):
        logger.warning(
            f"Achieved outage {outage:.4f} exceeds eps_0={eps_0:.4f} by more than "
            f"{solver.constraint_slack}"
        )
    return solution
