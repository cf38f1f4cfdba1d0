"""Per-state, ensemble and variant solvers."""

from .bcd import (
    PerStateSolution,
    interchange_gap,
    per_state_objective,
    reconstruct_allocation,
    solve_per_state,
)
from .dual import check_feasibility, run_dual
from .ensemble import DualTrace, EnsembleSolution, estimate_eps_p, solve_ensemble
from .subproblems import (
    PowerCaps,
    SecrecyQuadratic,
    power_caps,
    schedule_and_powers,
    secrecy_quadratic,
    update_p1,
    update_su_power,
    update_tau1,
)
from .variants import (
    GreedyConfig,
    run_greedy,
    run_no_cooperation,
    run_unknown_csi,
    solve_unknown_csi,
    unknown_csi_objective,
)

__all__ = [
    "PerStateSolution",
    "interchange_gap",
    "per_state_objective",
    "reconstruct_allocation",
    "solve_per_state",
    "check_feasibility",
    "run_dual",
    "DualTrace",
    "EnsembleSolution",
    "estimate_eps_p",
    "solve_ensemble",
    "PowerCaps",
    "SecrecyQuadratic",
    "power_caps",
    "schedule_and_powers",
    "secrecy_quadratic",
    "update_p1",
    "update_su_power",
    "update_tau1",
    "GreedyConfig",
    "run_greedy",
    "run_no_cooperation",
    "run_unknown_csi",
    "solve_unknown_csi",
    "unknown_csi_objective",
]
