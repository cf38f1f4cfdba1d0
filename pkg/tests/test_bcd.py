"""
Unit tests for the per-state block coordinate descent solver.
"""

import numpy as np
import pytest

from secure_cwpcn.model.channel import FadingState
from secure_cwpcn.model.rates import (
    Allocation,
    SecrecyMode,
    no_coop_secrecy,
    outage_indicator,
)
from secure_cwpcn.solvers.bcd import (
    interchange_gap,
    per_state_objective,
    reconstruct_allocation,
    solve_per_state,
)


@pytest.mark.unit
class TestReconstruct:
    """Test cases for rebuilding tau0 and p0 from the primary variables."""

    def test_budget_used_in_full(self, normalized_config):
        """Test p0 tau0 + p1 tau1 = P_max and tau0 + tau1 = 1."""
        alloc = reconstruct_allocation(Allocation.initial(1, 1.0), 0.25, 2.0, normalized_config)
        assert alloc.tau0 == pytest.approx(0.75)
        assert alloc.p0 * alloc.tau0 + alloc.p1 * alloc.tau1 == pytest.approx(1.0)

    def test_whole_block_in_wit(self, normalized_config):
        """Test that tau1 = 1 leaves nothing for WET and spends the budget in WIT."""
        alloc = reconstruct_allocation(Allocation.initial(1, 1.0), 1.0, 0.0, normalized_config)
        assert alloc.tau0 == 0.0
        assert alloc.p0 == 0.0
        assert alloc.p1 == 1.0


@pytest.mark.unit
class TestSolvePerState:
    """Test cases for solve_per_state."""

    @pytest.mark.parametrize("eta", [0.0, 1.0, 50.0])
    def test_objective_never_decreases(self, unit_states, unit_config, eta):
        """Test that the objective after each pass is at least the previous one."""
        for state in unit_states[:10]:
            solution = solve_per_state(state, unit_config, eta)
            assert np.all(np.diff(solution.objective_history) >= 0)
            assert solution.dual_value == solution.objective_history[-1]

    def test_allocation_is_valid(self, unit_states, unit_config):
        """Test that every returned allocation satisfies all constraints."""
        p_max = unit_config.p_max
        for state in unit_states:
            solution = solve_per_state(state, unit_config, 5.0)
            alloc = solution.allocation
            assert alloc.tau0 + alloc.tau1 == pytest.approx(1.0, abs=1e-9)
            assert alloc.p0 * alloc.tau0 + alloc.p1 * alloc.tau1 == pytest.approx(p_max, rel=1e-9)
            assert alloc.violations(state, unit_config) == []

    def test_reported_metrics_match_allocation(self, unit_states, unit_config):
        """Test that the dual value is su_rate - eta * outage of the returned allocation."""
        state = unit_states[0]
        solution = solve_per_state(state, unit_config, 5.0)
        assert solution.dual_value == pytest.approx(
            per_state_objective(state, solution.allocation, unit_config, 5.0)
        )
        assert solution.dual_value == pytest.approx(solution.su_rate - 5.0 * solution.outage)
        assert solution.outage == int(solution.secrecy < unit_config.target_rate)

    def test_negative_eta_rejected(self, unit_states, unit_config):
        """Test that a negative multiplier raises ValueError."""
        with pytest.raises(ValueError):
            solve_per_state(unit_states[0], unit_config, -1.0)

    def test_deterministic(self, unit_states, unit_config):
        """Test that repeated solves give identical allocations."""
        first = solve_per_state(unit_states[3], unit_config, 5.0)
        second = solve_per_state(unit_states[3], unit_config, 5.0)
        assert first.dual_value == second.dual_value
        assert np.array_equal(first.allocation.p_s, second.allocation.p_s)
        assert first.allocation.tau1 == second.allocation.tau1

    def test_no_penalty_silences_primary_in_wit(self, unit_states, unit_config):
        """Test that with eta = 0 the primary transmits nothing during WIT."""
        for state in unit_states[:10]:
            alloc = solve_per_state(state, unit_config, 0.0).allocation
            assert alloc.p1 == 0.0 or alloc.tau0 == 0.0

    def test_pass_cap(self, unit_states, unit_config):
        """Test that a single-pass cap is honored."""
        config = unit_config.with_updates(solver={"bcd_max_iters": 1, "bcd_tol": 1e6})
        solution = solve_per_state(unit_states[0], config, 5.0)
        assert solution.bcd_iterations == 1

    @pytest.mark.parametrize("mode", list(SecrecyMode))
    def test_every_mode(self, unit_states, unit_config, mode):
        """Test that every eavesdropper model yields a valid allocation."""
        for state in unit_states[:5]:
            solution = solve_per_state(state, unit_config, 5.0, mode)
            assert solution.allocation.violations(state, unit_config) == []
            assert solution.su_rate >= 0.0


@pytest.mark.unit
class TestNoCooperationFallback:
    """Test cases for states where cooperating cannot beat the primary alone."""

    def test_no_harvesting_users_reach_no_cooperation_outage(self, normalized_config):
        """Test that users with h_ss = 0 leave the primary out of outage when it can be."""
        config = normalized_config.with_updates(num_sus=2)
        state = FadingState.from_real_gains(
            h_ss=[0.0, 0.0],
            h_sp=[0.3, 0.6],
            h_se=[[0.5], [0.2]],
            h_pp=8.0,
            h_pst=[1.0, 0.7],
            h_psr=0.4,
            h_pe=[4.0],
        )
        assert no_coop_secrecy(state, config) >= config.target_rate

        solution = solve_per_state(state, config, 50.0)

        assert solution.outage == 0
        assert solution.su_rate == 0.0
        assert solution.dual_value == 0.0
        assert solution.allocation.violations(state, config) == []
        assert np.all(np.diff(solution.objective_history) >= 0)

    def test_large_penalty_never_worse_than_no_cooperation(self, unit_states, unit_config):
        """Test that a saturating eta never leaves a state in outage that no cooperation avoids."""
        for state in unit_states:
            solution = solve_per_state(state, unit_config, 1e6)
            alone = outage_indicator(no_coop_secrecy(state, unit_config), unit_config.target_rate)
            assert solution.outage <= alone
            assert solution.allocation.violations(state, unit_config) == []


@pytest.mark.unit
class TestInterchangeGap:
    """Test cases for the scheduling-rule comparison."""

    def test_gap_is_finite(self, unit_states, unit_config):
        """Test that the gap between both power rules is a finite number."""
        gap = interchange_gap(unit_states[0], unit_config, 5.0)
        assert np.isfinite(gap)
