"""
Ensemble-level results shared by the dual controller and the variant solvers.
"""

import math
from dataclasses import dataclass, field
from functools import partial
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from ..model.channel import FadingState
from ..model.rates import SecrecyMode, no_coop_secrecy, outage_indicator
from ..utils.parallel import worker_pool
from .bcd import PerStateSolution, solve_per_state

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

DUAL_LOG_COLUMNS = ["t", "eta", "mean_outage", "eps_0", "ergodic_rate"]


@dataclass
class DualTrace:
    """Multiplier trajectory and per-iteration ensemble statistics."""

    eta_history: List[float] = field(default_factory=list)
    violation_history: List[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    records: List[Dict[str, float]] = field(default_factory=list)

    def record(self, t: int, eta: float, mean_outage: float, eps_0: float, rate: float) -> None:
        self.eta_history.append(eta)
        self.violation_history.append(mean_outage - eps_0)
        self.records.append(
            {"t": t, "eta": eta, "mean_outage": mean_outage, "eps_0": eps_0, "ergodic_rate": rate}
        )

    def to_frame(self) -> pd.DataFrame:
        """Iteration log as a DataFrame with the frozen dual-log columns."""
        return pd.DataFrame(self.records, columns=DUAL_LOG_COLUMNS)


@dataclass
class EnsembleSolution:
    """Solutions of every state in an ensemble plus the aggregate metrics."""

    per_state: List[PerStateSolution]
    ergodic_su_rate: float
    eps_ps: float
    eps_p: float
    eps_0: float
    trace: DualTrace
    eta: float = 0.0

    @property
    def residual(self) -> float:
        """Achieved outage minus the target."""
        return self.eps_ps - self.eps_0

    def constraint_violated(self, slack: float) -> bool:
        return self.residual > slack


def solve_ensemble(
    states: Sequence[FadingState],
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
    workers: int = 1,
) -> List[PerStateSolution]:
    """Solve every state at one multiplier value, preserving state order."""
    solve = partial(solve_per_state, config=config, eta=eta, mode=mode)
    with worker_pool(workers) as pmap:
        return pmap(solve, states)


def estimate_eps_p(states: Sequence[FadingState], config: "NetworkConfig") -> float:
    """
    Fraction of states whose secrecy without cooperation falls below the target.

    Eavesdroppers collude or not according to ``config.collusive``.
    """
    if not states:
        raise ValueError("estimate_eps_p needs at least one fading state")
    outages = (
        outage_indicator(no_coop_secrecy(state, config), config.target_rate) for state in states
    )
    return math.fsum(outages) / len(states)


def ensemble_means(solutions: Sequence[PerStateSolution]) -> Tuple[float, float]:
    """Mean secondary rate and mean outage, summed in state order."""
    count = len(solutions)
    rate = math.fsum(s.su_rate for s in solutions) / count
    outage = math.fsum(s.outage for s in solutions) / count
    return rate, outage
