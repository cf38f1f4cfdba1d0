"""
Brute-force and closed-form references for the solvers.

The grid oracles re-derive every feasibility limit from the time, power and
energy constraints directly and score points with ``model.rates`` only; they
share no code with ``solvers``. ``run_oracle_suite`` is the one place where
both sides meet: it draws random instances and counts every case where a
solver lands below its oracle by more than the grid can resolve.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Any, Dict, Optional

import numpy as np
from scipy.integrate import quad

from .errors import OracleDimensionError
from .model.channel import FadingState, generate_ensemble
from .model.rates import (
    Allocation,
    SecrecyMode,
    objective_batch,
    per_eav_secrecy_batch,
    su_rate_batch,
)

if TYPE_CHECKING:
    from .config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.oracles")

MIN_GRID_POINTS = 1000
EXHAUSTIVE_MAX_SUS = 2
EXHAUSTIVE_MAX_EAVS = 2
BCD_RELATIVE_GAP = 0.02


@dataclass(frozen=True)
class GridResult:
    """Best grid point, its objective, and the largest rate jump between neighbours."""

    argmax: float
    value: float
    slack: float


@dataclass(frozen=True, eq=False)
class ExhaustiveResult:
    """Global grid optimum of the per-state problem for a tiny network."""

    tau1: float
    p1: float
    p_s: np.ndarray
    scheduled: int
    value: float


def _budget_caps(state: FadingState, config: "NetworkConfig", tau1, p1) -> np.ndarray:
    # energy left for each user once the primary spends p1 for tau1 and the
    # rest of its budget in WPT; trailing axis K+1, virtual user pinned to 0
    lam, p_max, q_chap = config.harvest_efficiency, config.p_max, config.chap_power
    tau1 = np.expand_dims(np.asarray(tau1, dtype=float), -1)
    p1 = np.expand_dims(np.asarray(p1, dtype=float), -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        harvested = lam * (state.h_pst * (p_max - p1 * tau1) + state.h_ss * q_chap * (1.0 - tau1))
        caps = np.where(tau1 < 1, np.maximum(harvested / tau1, 0.0), 0.0)
    caps = np.array(caps, dtype=float)
    caps[..., 0] = 0.0
    return caps


def _energy_feasible(state, config, tau1, p1, spent, tol=1e-12) -> np.ndarray:
    lam, p_max, q_chap = config.harvest_efficiency, config.p_max, config.chap_power
    tau1 = np.expand_dims(np.asarray(tau1, dtype=float), -1)
    p1 = np.expand_dims(np.asarray(p1, dtype=float), -1)
    budget = p1 * tau1 <= p_max * (1.0 + tol)
    harvested = lam * (state.h_pst * (p_max - p1 * tau1) + state.h_ss * q_chap * (1.0 - tau1))
    consumed = spent * tau1
    causal = np.all((consumed <= harvested + tol * np.abs(harvested) + tol)[..., 1:], axis=-1)
    return budget[..., 0] & causal


def _pick(
    grid: np.ndarray, values: np.ndarray, rates: np.ndarray, feasible: np.ndarray
) -> GridResult:
    values = np.where(feasible, values, -np.inf)
    best = int(np.argmax(values))
    usable = rates[feasible]
    slack = float(np.max(np.abs(np.diff(usable)))) if usable.size > 1 else 0.0
    return GridResult(argmax=float(grid[best]), value=float(values[best]), slack=slack + 1e-9)


def _check_points(points: int) -> None:
    if points < MIN_GRID_POINTS:
        raise ValueError(f"Grid oracles need at least {MIN_GRID_POINTS} points, got {points}")


def search_tau1(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    points: int = 10_000,
    mode: Optional[SecrecyMode] = None,
) -> GridResult:
    """Grid search of the WIT duration with every other variable fixed."""
    _check_points(points)
    grid = np.linspace(0.0, 1.0, points)
    spent = alloc.p_s + alloc.q_s
    feasible = _energy_feasible(state, config, grid, alloc.p1, spent)
    values = objective_batch(state, grid, alloc.p1, alloc.p_s, alloc.q_s, config, eta, mode)
    rates = su_rate_batch(state, grid, alloc.p1, alloc.p_s, config)
    return _pick(grid, values, rates, feasible)


def search_p1(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    points: int = 10_000,
    mode: Optional[SecrecyMode] = None,
) -> GridResult:
    """Grid search of the primary WIT power over ``[0, P_max / tau1]``."""
    _check_points(points)
    grid = np.linspace(0.0, config.p_max / alloc.tau1, points)
    spent = alloc.p_s + alloc.q_s
    feasible = _energy_feasible(state, config, alloc.tau1, grid, spent)
    p_s, q_s = alloc.p_s[None, :], alloc.q_s[None, :]
    values = objective_batch(state, alloc.tau1, grid, p_s, q_s, config, eta, mode)
    rates = su_rate_batch(state, alloc.tau1, grid, p_s, config)
    return _pick(grid, values, rates, feasible)


def search_ps(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    k_tilde: int,
    points: int = 10_000,
    mode: Optional[SecrecyMode] = None,
) -> GridResult:
    """Grid search of user ``k_tilde``'s information power while every other user jams at its cap."""
    _check_points(points)
    caps = _budget_caps(state, config, alloc.tau1, alloc.p1)
    if k_tilde == 0 or caps[k_tilde] <= 0:
        value = score_su_power(state, alloc, config, eta, k_tilde, 0.0, mode)
        return GridResult(argmax=0.0, value=value, slack=1e-9)

    grid = np.linspace(0.0, caps[k_tilde], points)
    p_s = np.zeros((points, caps.size))
    p_s[:, k_tilde] = grid
    q_s = caps.copy()
    q_s[k_tilde] = 0.0
    values = objective_batch(state, alloc.tau1, alloc.p1, p_s, q_s[None, :], config, eta, mode)
    rates = su_rate_batch(state, alloc.tau1, alloc.p1, p_s, config)
    return _pick(grid, values, rates, np.ones(points, dtype=bool))


def score_su_power(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    k_tilde: int,
    power: float,
    mode: Optional[SecrecyMode] = None,
) -> float:
    """Objective of scheduling ``k_tilde`` at ``power`` with the other users jamming at their caps."""
    caps = _budget_caps(state, config, alloc.tau1, alloc.p1)
    p_s = np.zeros_like(caps)
    p_s[k_tilde] = power
    q_s = caps.copy()
    q_s[k_tilde] = 0.0
    return float(objective_batch(state, alloc.tau1, alloc.p1, p_s, q_s, config, eta, mode))


def grid_tau1(state, alloc, config, eta, points: int = 10_000, mode=None) -> float:
    """Best WIT duration on a uniform grid of [0, 1], infeasible points excluded."""
    return search_tau1(state, alloc, config, eta, points, mode).argmax


def grid_p1(state, alloc, config, eta, points: int = 10_000, mode=None) -> float:
    """Best primary WIT power on a uniform grid, infeasible points excluded."""
    return search_p1(state, alloc, config, eta, points, mode).argmax


def grid_ps(state, alloc, config, eta, k_tilde: int, points: int = 10_000, mode=None) -> float:
    """Best information power of ``k_tilde`` on a uniform grid of ``[0, cap]``."""
    return search_ps(state, alloc, config, eta, k_tilde, points, mode).argmax


def exhaustive_small(
    state: FadingState,
    config: "NetworkConfig",
    eta: float,
    resolution: int = 60,
    mode: Optional[SecrecyMode] = None,
) -> ExhaustiveResult:
    """
    Global optimum of the per-state problem over a full product grid.

    tau1 runs over ``resolution`` interior points of (0, 1), p1 over
    ``[0, P_max / tau1]`` and the scheduled user's power over ``[0, cap]``;
    every unscheduled user jams at its cap.

    Raises:
        OracleDimensionError: If K > 2 or N > 2
    """
    if state.num_sus > EXHAUSTIVE_MAX_SUS or state.num_eavs > EXHAUSTIVE_MAX_EAVS:
        raise OracleDimensionError(
            f"Exhaustive search supports K <= {EXHAUSTIVE_MAX_SUS} and N <= {EXHAUSTIVE_MAX_EAVS}, "
            f"got K={state.num_sus}, N={state.num_eavs}"
        )

    size = state.num_sus + 1
    share = np.linspace(0.0, 1.0, resolution)
    tau1 = ((np.arange(resolution) + 1.0) / (resolution + 1.0))[:, None, None]
    p1 = share[None, :, None] * config.p_max / tau1
    caps = _budget_caps(state, config, tau1, p1)

    best: Optional[ExhaustiveResult] = None
    for k in range(size):
        fractions = share if k > 0 else np.zeros(1)
        p_s = np.zeros(caps.shape[:2] + (fractions.size, size))
        p_s[..., k] = fractions[None, None, :] * caps[..., k]
        q_s = caps.copy()
        q_s[..., k] = 0.0

        values = objective_batch(state, tau1, p1, p_s, q_s, config, eta, mode)
        i, j, m = np.unravel_index(int(np.argmax(values)), values.shape)
        value = float(values[i, j, m])
        if best is None or value > best.value:
            best = ExhaustiveResult(
                tau1=float(tau1[i, 0, 0]),
                p1=float(p1[i, j, 0]),
                p_s=p_s[i, j, m].copy(),
                scheduled=k,
                value=value,
            )
    return best


def analytic_eps_p(a: float, b: float, target_rate: float) -> float:
    """
    Outage without cooperation for one eavesdropper under unit-mean exponential fading.

    Args:
        a: Mean SNR of the primary link
        b: Mean SNR of the eavesdropper link
        target_rate: Secrecy target R in bits/s/Hz

    Returns:
        ``1 - exp(-(2^R - 1) / a) / (1 + 2^R b / a)``
    """
    if a <= 0 or b < 0:
        raise ValueError(f"Mean SNRs must satisfy a > 0 and b >= 0, got a={a}, b={b}")
    ratio = 2.0**target_rate
    return 1.0 - math.exp(-(ratio - 1.0) / a) / (1.0 + ratio * b / a)


def integrated_eps_p(a: float, b: float, target_rate: float) -> float:
    """Same quantity as ``analytic_eps_p``, integrated numerically over the eavesdropper SNR."""
    if a <= 0 or b < 0:
        raise ValueError(f"Mean SNRs must satisfy a > 0 and b >= 0, got a={a}, b={b}")
    ratio = 2.0**target_rate

    def conditional_outage(y: float) -> float:
        return (1.0 - math.exp(-(ratio * (1.0 + b * y) - 1.0) / a)) * math.exp(-y)

    value, _ = quad(conditional_outage, 0.0, math.inf)
    return float(value)


@dataclass
class OracleReport:
    """Violation counts of one oracle consistency run."""

    instances: int
    tau1_violations: int = 0
    p1_violations: int = 0
    ps_violations: int = 0
    quadratic_mismatches: int = 0
    quadratic_points: int = 0
    bcd_instances: int = 0
    bcd_within: int = 0

    @property
    def bcd_within_share(self) -> float:
        return self.bcd_within / self.bcd_instances if self.bcd_instances else 1.0

    @property
    def violations(self) -> int:
        return (
            self.tau1_violations
            + self.p1_violations
            + self.ps_violations
            + self.quadratic_mismatches
        )

    def passed(self, min_share: float = 0.9) -> bool:
        return self.violations == 0 and self.bcd_within_share >= min_share

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["bcd_within_share"] = self.bcd_within_share
        return data


def random_allocation(
    state: FadingState, config: "NetworkConfig", rng: np.random.Generator
) -> Allocation:
    """
    Feasible allocation with a random time split, primary power and user roles.

    One random real user transmits a random share of its cap, the others jam a
    random share of theirs.
    """
    tau1 = float(rng.uniform(0.05, 0.95))
    p1 = float(rng.uniform(0.0, 1.0)) * config.p_max / tau1
    caps = _budget_caps(state, config, tau1, p1)

    scheduled = int(rng.integers(1, state.num_sus + 1))
    shares = rng.uniform(0.0, 1.0, size=caps.size)
    p_s = np.zeros_like(caps)
    p_s[scheduled] = shares[scheduled] * caps[scheduled]
    q_s = shares * caps
    q_s[scheduled] = 0.0

    tau0 = 1.0 - tau1
    p0 = (config.p_max - p1 * tau1) / tau0
    return Allocation(tau0=tau0, tau1=tau1, p0=p0, p1=p1, p_s=p_s, q_s=q_s, scheduled=scheduled)


def _quadratic_sign_mismatches(state, alloc, config, coefficients, k, n, rng, samples=8):
    caps = _budget_caps(state, config, alloc.tau1, alloc.p1)
    points = list(rng.uniform(0.0, max(caps[k], 0.0), size=samples))
    for root in (coefficients.x1, coefficients.x2):
        if root is not None and np.isfinite(root):
            points.extend([root * (1 - 1e-6), root * (1 + 1e-6)])

    mismatches = checked = 0
    q_s = caps.copy()
    q_s[k] = 0.0
    for x in points:
        if x < 0:
            continue
        p_s = np.zeros_like(caps)
        p_s[k] = x
        secrecy = per_eav_secrecy_batch(state, alloc.tau1, alloc.p1, p_s, q_s, config)[n]
        quadratic = float(coefficients.evaluate(x))
        scale = abs(coefficients.A) * x * x + abs(coefficients.B) * x + abs(coefficients.C)
        checked += 1
        if abs(quadratic) <= 1e-9 * scale:
            continue
        if (secrecy >= config.target_rate) != (quadratic <= 0):
            mismatches += 1
    return mismatches, checked


def run_oracle_suite(
    config: "NetworkConfig",
    instances: int = 1000,
    grid_points: int = 10_000,
    rng: Optional[np.random.Generator] = None,
    bcd_instances: int = 200,
    resolution: int = 60,
    eta_max: float = 5.0,
) -> OracleReport:
    """
    Compare every subproblem update and the full per-state solver with their oracles.

    Args:
        config: Network configuration for the subproblem instances
        instances: Random (state, allocation, eta) triples per subproblem
        grid_points: Resolution of the 1-D grid oracles
        rng: Generator for allocations and eta, seeded from ``config.seed`` if omitted
        bcd_instances: States of the K = 1, N = 1 network checked against the exhaustive grid
        resolution: Points per axis of the exhaustive grid
        eta_max: Upper end of the uniform penalty draw

    Returns:
        OracleReport with violation counts and the share of states where BCD
        came within 2% of the exhaustive optimum
    """
    # imported here so the oracles above stay free of solver code
    from .solvers.bcd import solve_per_state
    from .solvers.subproblems import secrecy_quadratic, update_p1, update_su_power, update_tau1

    rng = np.random.default_rng([config.seed, 2]) if rng is None else rng
    mode = config.secrecy_mode
    report = OracleReport(instances=instances)

    for state in generate_ensemble(config, instances):
        alloc = random_allocation(state, config, rng)
        eta = float(rng.uniform(0.0, eta_max))

        tau1 = update_tau1(state, alloc, config)
        oracle = search_tau1(state, alloc, config, eta, grid_points, mode)
        value = float(objective_batch(state, tau1, alloc.p1, alloc.p_s, alloc.q_s, config, eta, mode))
        report.tau1_violations += int(value < oracle.value - oracle.slack)

        p1 = update_p1(state, alloc, config, eta, mode)
        oracle = search_p1(state, alloc, config, eta, grid_points, mode)
        value = float(objective_batch(state, alloc.tau1, p1, alloc.p_s, alloc.q_s, config, eta, mode))
        report.p1_violations += int(value < oracle.value - oracle.slack)

        k = alloc.scheduled
        power = update_su_power(state, alloc, config, eta, k, mode)
        oracle = search_ps(state, alloc, config, eta, k, grid_points, mode)
        value = score_su_power(state, alloc, config, eta, k, power, mode)
        report.ps_violations += int(value < oracle.value - oracle.slack)

        n = int(rng.integers(state.num_eavs))
        coefficients = secrecy_quadratic(state, alloc, config, k, n)
        mismatches, checked = _quadratic_sign_mismatches(
            state, alloc, config, coefficients, k, n, rng
        )
        report.quadratic_mismatches += mismatches
        report.quadratic_points += checked

    small = config.with_updates(num_sus=1, num_eavs=1)
    for state in generate_ensemble(small, bcd_instances, seed=config.seed + 1):
        eta = float(rng.uniform(0.0, eta_max))
        solution = solve_per_state(state, small, eta)
        best = exhaustive_small(state, small, eta, resolution)
        report.bcd_instances += 1
        report.bcd_within += int(
            solution.dual_value >= best.value - BCD_RELATIVE_GAP * abs(best.value) - 1e-12
        )

    logger.info(
        f"Oracle suite: {report.violations} violations over {instances} instances, "
        f"BCD within 2% on {report.bcd_within_share:.1%} of {report.bcd_instances} states"
    )
    return report
