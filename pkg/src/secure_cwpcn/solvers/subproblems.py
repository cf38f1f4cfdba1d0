"""
Single-block updates used inside block coordinate descent.

Each update fixes all but one block of variables of the per-state dual
problem and returns the best value of the free block:

- ``update_tau1``: WIT duration, pushed to the largest feasible value
- ``update_p1``: primary WIT power, chosen among secrecy thresholds
- ``update_su_power`` / ``schedule_and_powers``: information power of each
  candidate user with every other user jamming at its energy cap, then the
  scheduling decision

The secrecy constraint of the primary link turns each power subproblem into
"increasing (or decreasing) rate minus a step penalty". The optimum is
therefore always one of a few boundary points; the updates enumerate those
points and score them with the exact objective from ``model.rates``.
"""

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from ..model.channel import FadingState
from ..model.rates import (
    Allocation,
    SecrecyMode,
    objective_batch,
    per_eav_secrecy_batch,
    su_rate_batch,
)
from ..utils.search import maximize_bounded, upper_boundary

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.subproblems")

# relative step that moves a threshold candidate strictly inside its feasible side
THRESHOLD_NUDGE = 1e-9


@dataclass(frozen=True)
class SecrecyQuadratic:
    """
    Quadratic ``A x^2 + B x + C <= 0`` equivalent to per-eavesdropper secrecy >= R.

    ``x`` is the information power of the scheduled user; the roots are
    ``None`` when the discriminant is negative or the quadratic degenerates.
    """

    A: float
    B: float
    C: float
    disc: float
    x1: Optional[float]
    x2: Optional[float]

    def evaluate(self, x):
        return self.A * np.square(x) + self.B * np.asarray(x) + self.C


@dataclass(frozen=True, eq=False)
class PowerCaps:
    """
    Upper limits of the power variables at the current (tau1, p1).

    ``ps_bar`` and ``qs_bar`` come from the same energy budget: a user spends
    it either on information or on jamming, never both.
    """

    p1_bar: float
    ps_bar: np.ndarray
    qs_bar: np.ndarray


def _resolve_mode(config: "NetworkConfig", mode: Optional[SecrecyMode]) -> SecrecyMode:
    return config.secrecy_mode if mode is None else SecrecyMode(mode)


def rate_ratio(config: "NetworkConfig", tau1: float) -> float:
    """``2^(R/tau1)``; infinite when tau1 is too small for any secrecy."""
    if tau1 <= 0:
        return float("inf")
    with np.errstate(over="ignore"):
        return float(np.exp2(config.target_rate / tau1))


def energy_caps(
    state: FadingState, config: "NetworkConfig", tau1: float, p1: float
) -> np.ndarray:
    """
    Largest ``p_s + q_s`` each user can spend during WIT.

    Uses the full-budget identities ``p0 tau0 = P_max - p1 tau1`` and
    ``tau0 = 1 - tau1``; all caps are zero when ``tau1 >= 1``.
    """
    caps = np.zeros(state.num_sus + 1)
    if tau1 >= 1:
        return caps

    lam, p_max, q_chap = config.harvest_efficiency, config.p_max, config.chap_power
    caps = lam * (state.h_pst * p_max + state.h_ss * q_chap) / tau1 - lam * (
        state.h_pst * p1 + state.h_ss * q_chap
    )
    caps = np.maximum(caps, 0.0)
    caps[0] = 0.0
    return caps


def p1_cap(
    state: FadingState,
    config: "NetworkConfig",
    tau1: float,
    p_s: np.ndarray,
    q_s: np.ndarray,
) -> float:
    """Upper limit of p1 from the average power budget and every user's energy causality."""
    lam, p_max, q_chap = config.harvest_efficiency, config.p_max, config.chap_power
    bar = p_max / tau1

    h_pst, h_ss = state.h_pst[1:], state.h_ss[1:]
    spent = (p_s + q_s)[1:]
    reachable = h_pst > 0
    if np.any(reachable):
        headroom = (
            lam * h_pst * p_max + lam * h_ss * q_chap - (lam * h_ss * q_chap + spent) * tau1
        )
        bar = min(bar, float(np.min(headroom[reachable] / (lam * h_pst[reachable] * tau1))))

    return max(bar, 0.0)


def power_caps(state: FadingState, alloc: Allocation, config: "NetworkConfig") -> PowerCaps:
    """Collect p̄1, p̄_s and q̄_s at the allocation's current time split."""
    caps = energy_caps(state, config, alloc.tau1, alloc.p1)
    return PowerCaps(
        p1_bar=p1_cap(state, config, alloc.tau1, alloc.p_s, alloc.q_s),
        ps_bar=caps,
        qs_bar=caps.copy(),
    )


def update_tau1(state: FadingState, alloc: Allocation, config: "NetworkConfig") -> float:
    """
    Largest WIT duration allowed by the power budget and energy causality.

    Both the secondary rate and the secrecy rate grow with tau1, so the block
    objective is maximized at the supremum of the feasible interval. The
    result is clamped to ``[tau1_min, 1]``; the upper end is ``1 - tau1_min``
    whenever some user spends power, since nothing is harvested at tau0 = 0.
    """
    lam, p_max, q_chap = config.harvest_efficiency, config.p_max, config.chap_power
    tau1_min = config.solver.tau1_min

    bound = 1.0 if alloc.p1 <= 0 else min(1.0, p_max / alloc.p1)

    spent = (alloc.p_s + alloc.q_s)[1:]
    h_pst, h_ss = state.h_pst[1:], state.h_ss[1:]
    numerator = lam * (h_pst * p_max + h_ss * q_chap)
    denominator = spent + lam * h_pst * alloc.p1 + lam * h_ss * q_chap
    binding = denominator > 0
    if np.any(binding):
        bound = min(bound, float(np.min(numerator[binding] / denominator[binding])))

    upper = 1.0 if not np.any(spent > 0) else 1.0 - tau1_min
    return float(np.clip(bound, tau1_min, upper))


def p1_thresholds(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    mode: Optional[SecrecyMode] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Secrecy thresholds on p1.

    Secrecy against eavesdropper n holds iff ``W_n p1 >= 2^(R/tau1) - 1``. In
    the collusive modes there is a single combined ``W``.

    Returns:
        Tuple of (W, thresholds); thresholds are infinite where ``W <= 0``
    """
    mode = _resolve_mode(config, mode)
    ratio = rate_ratio(config, alloc.tau1)
    noise = config.noise_power
    count = state.num_eavs if mode is SecrecyMode.NONCOLLUSIVE else 1

    if not np.isfinite(ratio):
        return np.full(count, -np.inf), np.full(count, np.inf)

    a = state.h_pp / (noise + alloc.p_s @ state.h_sp)
    interfering = alloc.q_s if mode is SecrecyMode.COLLUSIVE_LB else alloc.p_s + alloc.q_s
    b = state.h_pe / (noise + interfering @ state.h_se)

    w = a - ratio * b if mode is SecrecyMode.NONCOLLUSIVE else np.array([a - ratio * b.sum()])
    with np.errstate(divide="ignore"):
        thresholds = np.where(w > 0, (ratio - 1.0) / np.where(w > 0, w, 1.0), np.inf)
    return w, thresholds


def update_p1(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
) -> float:
    """
    Best primary WIT power for fixed tau1 and secondary powers.

    The secondary rate falls with p1 while outage switches off once p1
    clears every threshold, so the optimum is 0 or the largest threshold.
    Candidates are scored with the true objective; ties go to the smaller p1.

    Returns:
        p1 in ``[0, p1_bar]``
    """
    mode = _resolve_mode(config, mode)
    p1_bar = p1_cap(state, config, alloc.tau1, alloc.p_s, alloc.q_s)
    w, thresholds = p1_thresholds(state, alloc, config, mode)
    nudged = np.minimum(thresholds * (1.0 + THRESHOLD_NUDGE), p1_bar)
    reachable = thresholds <= p1_bar

    if config.solver.worst_eavesdropper_rule and mode is SecrecyMode.NONCOLLUSIVE:
        return _p1_per_eavesdropper_rule(state, alloc, config, eta, nudged, reachable)

    candidates = [0.0, min(alloc.p1, p1_bar)]
    candidates.extend(nudged[reachable].tolist())
    if np.all(w > 0) and np.all(reachable):
        candidates.append(float(nudged.max()))

    candidates = np.unique(np.asarray(candidates))
    values = objective_batch(
        state, alloc.tau1, candidates, alloc.p_s[None, :], alloc.q_s[None, :], config, eta, mode
    )
    return float(candidates[int(np.argmax(values))])


def _p1_per_eavesdropper_rule(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    nudged: np.ndarray,
    reachable: np.ndarray,
) -> float:
    # literal n* rule: best p1 against each eavesdropper alone, then the
    # eavesdropper whose own optimum scores lowest
    def rate(p1):
        return su_rate_batch(state, alloc.tau1, p1, alloc.p_s[None, :], config)

    floor = float(rate(np.array([0.0]))[0]) - eta
    per_n = np.where(reachable & (rate(nudged) >= floor), nudged, 0.0)

    secrecy = per_eav_secrecy_batch(
        state, alloc.tau1, per_n, alloc.p_s[None, :], alloc.q_s[None, :], config
    )
    outage_n = np.diagonal(secrecy) < config.target_rate
    scores = rate(per_n) - eta * outage_n
    return float(per_n[int(np.argmin(scores))])


def _quadratic_coefficients(
    state: FadingState,
    config: "NetworkConfig",
    tau1: float,
    p1: float,
    caps: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients for every (scheduled user, eavesdropper) pair, shape (K+1, N)."""
    ratio = rate_ratio(config, tau1)
    noise = config.noise_power
    size = state.num_sus + 1

    jamming = caps[:, None] * state.h_se
    # row k: jamming from every user except k
    others = (1.0 - np.eye(size)) @ jamming
    d = noise + others

    h_sp = state.h_sp[:, None]
    h_se = state.h_se
    h_pe = state.h_pe[None, :]
    pu_term = noise + p1 * state.h_pp

    a = (ratio - 1.0) * h_sp * h_se
    b = ratio * (noise * h_se + h_sp * (d + p1 * h_pe)) - pu_term * h_se - d * h_sp
    c = ratio * noise * (d + p1 * h_pe) - pu_term * d
    return a, b, c


def _solution_intervals(
    a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solution set of ``a x^2 + b x + c <= 0`` as an interval per entry.

    ``a`` is never negative. Empty sets come back as ``lo > hi``.
    """
    lo = np.full(a.shape, -np.inf)
    hi = np.full(a.shape, np.inf)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        return np.full(a.shape, np.inf), np.full(a.shape, -np.inf)

    quadratic = a > 0
    disc = b * b - 4.0 * a * c
    real = quadratic & (disc >= 0)
    sq = np.sqrt(np.where(real, disc, 0.0))
    # cancellation-free root pair
    q = -0.5 * (b + np.copysign(sq, b))
    safe_q = np.where(q != 0, q, 1.0)
    safe_a = np.where(quadratic, a, 1.0)
    r1 = np.where(q != 0, q / safe_a, 0.0)
    r2 = np.where(q != 0, c / safe_q, 0.0)
    lo = np.where(real, np.minimum(r1, r2), lo)
    hi = np.where(real, np.maximum(r1, r2), hi)

    empty = (quadratic & (disc < 0)) | (~quadratic & (b == 0) & (c > 0))
    safe_b = np.where(b != 0, b, 1.0)
    linear_root = -c / safe_b
    hi = np.where(~quadratic & (b > 0), linear_root, hi)
    lo = np.where(~quadratic & (b < 0), linear_root, lo)

    lo = np.where(empty, np.inf, lo)
    hi = np.where(empty, -np.inf, hi)
    return lo, hi


def secrecy_quadratic(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    k_tilde: int,
    n: int,
) -> SecrecyQuadratic:
    """
    Quadratic in the scheduled user's power that encodes secrecy >= R against eavesdropper n.

    The other users jam at their energy caps for the allocation's (tau1, p1).
    """
    caps = energy_caps(state, config, alloc.tau1, alloc.p1)
    a, b, c = _quadratic_coefficients(state, config, alloc.tau1, alloc.p1, caps)
    A, B, C = float(a[k_tilde, n]), float(b[k_tilde, n]), float(c[k_tilde, n])
    disc = B * B - 4.0 * A * C

    x1 = x2 = None
    if A > 0 and disc >= 0:
        lo, hi = _solution_intervals(np.array([A]), np.array([B]), np.array([C]))
        x1, x2 = float(lo[0]), float(hi[0])
    return SecrecyQuadratic(A=A, B=B, C=C, disc=disc, x1=x1, x2=x2)


def _inward(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    upper = np.asarray(upper, dtype=float)
    with np.errstate(invalid="ignore"):
        width = np.where(np.isfinite(upper) & np.isfinite(lower), upper - lower, 0.0)
    return np.where(np.isfinite(upper), upper - THRESHOLD_NUDGE * np.maximum(width, 0.0), upper)


def _lower_bound_intervals(state, config, tau1, p1, caps):
    # jamming-only bound: the eavesdropper rate no longer depends on the
    # scheduled user's power, leaving one linear condition on it
    ratio = rate_ratio(config, tau1)
    noise = config.noise_power
    size = state.num_sus + 1
    lo = np.full(size, -np.inf)
    hi = np.full(size, np.inf)
    if not np.isfinite(ratio):
        return np.full(size, np.inf), np.full(size, -np.inf)

    others = (1.0 - np.eye(size)) @ (caps[:, None] * state.h_se)
    leaked = (p1 * state.h_pe / (noise + others)).sum(axis=1)
    needed = ratio * (1.0 + leaked) - 1.0
    signal = p1 * state.h_pp

    for k in range(size):
        if needed[k] <= 0:
            continue
        if state.h_sp[k] > 0 and signal > 0:
            hi[k] = (signal / needed[k] - noise) / state.h_sp[k]
        elif signal / noise < needed[k]:
            lo[k], hi[k] = np.inf, -np.inf
    return lo, hi


def _collusive_candidates(state, config, tau1, p1, caps) -> List[List[float]]:
    # exact collusive secrecy has no closed form in the scheduled power:
    # maximize the secrecy margin, then walk to the largest feasible power
    solver = config.solver
    noise = config.noise_power
    size = state.num_sus + 1
    jamming = caps[:, None] * state.h_se
    extra: List[List[float]] = [[] for _ in range(size)]

    for k in range(1, size):
        if caps[k] <= 0:
            continue
        others = jamming.sum(axis=0) - jamming[k]

        def margin(x, k=k, others=others):
            x = np.asarray(x, dtype=float)
            pu = p1 * state.h_pp / (noise + x * state.h_sp[k])
            eav = (p1 * state.h_pe / (noise + others + np.multiply.outer(x, state.h_se[k]))).sum(-1)
            return np.log1p(pu) / np.log(2.0) - np.log1p(eav) / np.log(2.0) - config.target_rate / tau1

        peak_x, peak_value = maximize_bounded(
            margin, 0.0, float(caps[k]), solver.search_grid_points, solver.search_tol
        )
        if peak_value < 0:
            continue
        extra[k].append(peak_x)
        boundary = upper_boundary(margin, peak_x, float(caps[k]), solver.search_grid_points)
        if boundary is not None:
            safe, root = boundary
            extra[k].extend([safe, root - THRESHOLD_NUDGE * (root - safe)])
    return extra


def _su_power_candidates(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    caps: np.ndarray,
    mode: SecrecyMode,
) -> np.ndarray:
    """Candidate information powers, one row per scheduled user, clipped to [0, cap]."""
    size = state.num_sus + 1
    tau1, p1 = alloc.tau1, alloc.p1
    columns = [caps, np.zeros(size)]

    incumbent = np.zeros(size)
    incumbent[alloc.scheduled] = alloc.p_s[alloc.scheduled]
    columns.append(incumbent)

    if mode is SecrecyMode.COLLUSIVE:
        extra = _collusive_candidates(state, config, tau1, p1, caps)
        width = max((len(row) for row in extra), default=0)
        for j in range(width):
            columns.append(np.array([row[j] if j < len(row) else 0.0 for row in extra]))
    else:
        if mode is SecrecyMode.NONCOLLUSIVE:
            a, b, c = _quadratic_coefficients(state, config, tau1, p1, caps)
            lo_n, hi_n = _solution_intervals(a, b, c)
            lower, upper = lo_n.max(axis=1), hi_n.min(axis=1)
            # each eavesdropper's own upper root, then the tightest one
            per_n_lower = np.clip(lo_n, 0.0, caps[:, None])
            per_n = np.clip(_inward(hi_n, per_n_lower), 0.0, caps[:, None])
            per_n = np.where(lo_n <= hi_n, per_n, 0.0)
            columns.extend(per_n.T)
            columns.append(np.where(np.all(lo_n <= hi_n, axis=1), per_n.min(axis=1), 0.0))
        else:
            lower, upper = _lower_bound_intervals(state, config, tau1, p1, caps)

        lower = np.maximum(lower, 0.0)
        upper = np.minimum(upper, caps)
        feasible = lower <= upper
        columns.append(np.where(feasible, _inward(upper, lower), 0.0))
        columns.append(np.where(feasible, lower, 0.0))

    candidates = np.column_stack(columns)
    return np.clip(np.nan_to_num(candidates, nan=0.0, posinf=0.0, neginf=0.0), 0.0, caps[:, None])


def _worst_eavesdropper_powers(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    caps: np.ndarray,
) -> np.ndarray:
    # literal per-eavesdropper rule with the n* selection, non-collusive only
    size = state.num_sus + 1
    tau1, p1 = alloc.tau1, alloc.p1
    a, b, c = _quadratic_coefficients(state, config, tau1, p1, caps)
    lo_n, hi_n = _solution_intervals(a, b, c)
    x2 = _inward(hi_n, np.maximum(lo_n, 0.0))
    sinr_scale = state.h_ss[:, None] / (config.noise_power + p1 * state.h_psr)

    def rate(x):
        # x has one row per scheduled user
        return tau1 * np.log1p(x * sinr_scale) / np.log(2.0)

    cap_rate = rate(np.broadcast_to(caps[:, None], x2.shape))
    with np.errstate(invalid="ignore"):
        usable = (
            (lo_n <= hi_n)
            & (x2 >= 0)
            & (x2 <= caps[:, None])
            & (rate(np.clip(x2, 0.0, caps[:, None])) >= cap_rate - eta)
        )
    per_n = np.where(usable, x2, caps[:, None])
    per_n_rate = rate(per_n)

    jammers = caps[None, :] * (1.0 - np.eye(size))
    chosen = np.zeros(size)
    for k in range(1, size):
        p_s = np.zeros((state.num_eavs, size))
        p_s[:, k] = per_n[k]
        secrecy = per_eav_secrecy_batch(state, tau1, p1, p_s, jammers[k][None, :], config)
        outage_n = np.diagonal(secrecy) < config.target_rate
        scores = per_n_rate[k] - eta * outage_n
        chosen[k] = per_n[k, int(np.argmin(scores))]
    return chosen[:, None]


def _score_candidates(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    caps: np.ndarray,
    candidates: np.ndarray,
    mode: SecrecyMode,
) -> np.ndarray:
    size = state.num_sus + 1
    count = candidates.shape[1]
    p_s = np.zeros((size, count, size))
    p_s[np.arange(size), :, np.arange(size)] = candidates
    q_s = (caps[None, :] * (1.0 - np.eye(size)))[:, None, :]
    return objective_batch(state, alloc.tau1, alloc.p1, p_s, q_s, config, eta, mode)


def _best_powers(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    mode: SecrecyMode,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Best power and its objective for every candidate scheduled user."""
    caps = energy_caps(state, config, alloc.tau1, alloc.p1)
    if config.solver.worst_eavesdropper_rule and mode is SecrecyMode.NONCOLLUSIVE:
        candidates = _worst_eavesdropper_powers(state, alloc, config, eta, caps)
    else:
        candidates = _su_power_candidates(state, alloc, config, caps, mode)

    values = _score_candidates(state, alloc, config, eta, caps, candidates, mode)
    best = np.argmax(values, axis=1)
    rows = np.arange(candidates.shape[0])
    return candidates[rows, best], values[rows, best], caps


def update_su_power(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    k_tilde: int,
    mode: Optional[SecrecyMode] = None,
) -> float:
    """
    Best information power of user ``k_tilde`` with every other user jamming at its cap.

    Returns:
        Power in ``[0, p̄_s^k_tilde]``; 0 for the virtual user
    """
    mode = _resolve_mode(config, mode)
    powers, _, _ = _best_powers(state, alloc, config, eta, mode)
    return float(powers[k_tilde])


def schedule_and_powers(
    state: FadingState,
    alloc: Allocation,
    config: "NetworkConfig",
    eta: float,
    mode: Optional[SecrecyMode] = None,
) -> Allocation:
    """
    Solve every user's power subproblem and schedule the best one.

    Ties in the objective go to the lowest index, so the virtual user wins
    when no real user helps. The scheduled user stops jamming; every other
    user jams at its energy cap.
    """
    mode = _resolve_mode(config, mode)
    powers, values, caps = _best_powers(state, alloc, config, eta, mode)
    scheduled = int(np.argmax(values))

    p_s = np.zeros_like(caps)
    p_s[scheduled] = powers[scheduled]
    q_s = caps.copy()
    q_s[scheduled] = 0.0

    logger.debug(
        f"Scheduled user {scheduled} with p_s={powers[scheduled]:.4g} "
        f"(objective {values[scheduled]:.6g})"
    )
    return replace(alloc, p_s=p_s, q_s=q_s, scheduled=scheduled)
