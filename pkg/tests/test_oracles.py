"""
Tests for the grid, exhaustive and closed-form reference oracles.
"""

import numpy as np
import pytest

from secure_cwpcn.errors import OracleDimensionError
from secure_cwpcn.model.channel import FadingState, generate_ensemble
from secure_cwpcn.model.rates import Allocation
from secure_cwpcn.oracles import (
    OracleReport,
    analytic_eps_p,
    exhaustive_small,
    grid_p1,
    grid_ps,
    grid_tau1,
    integrated_eps_p,
    random_allocation,
    run_oracle_suite,
)
from secure_cwpcn.solvers.subproblems import energy_caps


@pytest.fixture
def small_config(unit_config):
    return unit_config.with_updates(num_sus=1, num_eavs=1)


@pytest.mark.unit
class TestClosedForm:
    """Test cases for the no-cooperation outage formula."""

    def test_no_eavesdropper_signal(self):
        """Test that b = 0 leaves only the primary link's own outage."""
        assert analytic_eps_p(4.0, 0.0, 1.0) == pytest.approx(1.0 - np.exp(-0.25))

    def test_strong_primary(self):
        """Test that a very strong primary link almost never fails."""
        assert analytic_eps_p(1e9, 0.0, 0.5) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("a, b, rate", [(10.0, 1.0, 0.5), (2.0, 3.0, 1.0), (100.0, 0.1, 2.0)])
    def test_integration_agrees(self, a, b, rate):
        """Test that numerical integration reproduces the closed form."""
        assert integrated_eps_p(a, b, rate) == pytest.approx(analytic_eps_p(a, b, rate), rel=1e-6)

    @pytest.mark.parametrize("a, b", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_invalid_snr(self, a, b):
        """Test that nonpositive a or negative b raises ValueError."""
        with pytest.raises(ValueError):
            analytic_eps_p(a, b, 0.5)
        with pytest.raises(ValueError):
            integrated_eps_p(a, b, 0.5)


@pytest.mark.unit
class TestGridOracles:
    """Test cases for the one-dimensional grid oracles."""

    def test_too_few_points(self, simple_state, simple_allocation, normalized_config):
        """Test that grids below 1000 points are refused."""
        with pytest.raises(ValueError):
            grid_tau1(simple_state, simple_allocation, normalized_config, 1.0, points=999)

    def test_tau1_excludes_infeasible_points(self, simple_state, normalized_config):
        """Test that an enormous p1 leaves only tau1 = 0 feasible."""
        alloc = Allocation(
            tau0=0.5, tau1=0.5, p0=0.0, p1=1e12, p_s=np.zeros(2), q_s=np.zeros(2)
        )
        assert grid_tau1(simple_state, alloc, normalized_config, 1.0, points=1000) == 0.0

    def test_p1_without_penalty(self, simple_state, simple_allocation, normalized_config):
        """Test that with eta = 0 the grid keeps the primary silent."""
        assert grid_p1(simple_state, simple_allocation, normalized_config, 0.0, points=1000) == 0.0

    def test_ps_without_penalty(self, simple_state, simple_allocation, normalized_config):
        """Test that with eta = 0 the grid spends the whole cap."""
        cap = energy_caps(
            simple_state, normalized_config, simple_allocation.tau1, simple_allocation.p1
        )[1]
        power = grid_ps(simple_state, simple_allocation, normalized_config, 0.0, 1, points=1000)
        assert power == pytest.approx(cap)

    def test_ps_virtual_user(self, simple_state, simple_allocation, normalized_config):
        """Test that the virtual user gets zero power."""
        assert grid_ps(simple_state, simple_allocation, normalized_config, 1.0, 0, points=1000) == 0.0


@pytest.mark.unit
class TestExhaustive:
    """Test cases for the product-grid oracle."""

    def test_rejects_large_networks(self, unit_states, unit_config):
        """Test that K > 2 raises OracleDimensionError."""
        with pytest.raises(OracleDimensionError):
            exhaustive_small(unit_states[0], unit_config, 1.0, resolution=5)

    def test_zero_gain_network(self, normalized_config):
        """Test that without secondary links the optimum rate is zero."""
        state = FadingState.from_real_gains(
            h_ss=[0.0], h_sp=[0.1], h_se=[[0.1]], h_pp=1.0, h_pst=[1.0], h_psr=0.1, h_pe=[0.1]
        )
        assert exhaustive_small(state, normalized_config, 0.0, resolution=10).value == 0.0

    def test_result_is_on_the_grid(self, small_config):
        """Test that the optimum respects time, budget and scheduling limits."""
        for state in generate_ensemble(small_config, 5):
            result = exhaustive_small(state, small_config, 2.0, resolution=15)
            assert 0.0 < result.tau1 < 1.0
            assert result.p1 * result.tau1 <= small_config.p_max * (1 + 1e-12)
            assert np.count_nonzero(result.p_s) <= 1
            if np.count_nonzero(result.p_s):
                assert int(np.flatnonzero(result.p_s)[0]) == result.scheduled
            assert result.value >= -2.0


@pytest.mark.unit
class TestSuite:
    """Test cases for the oracle consistency run."""

    def test_random_allocation_is_valid(self, unit_states, unit_config, rng):
        """Test that random instances satisfy every constraint."""
        for state in unit_states[:10]:
            alloc = random_allocation(state, unit_config, rng)
            assert alloc.violations(state, unit_config) == []
            assert alloc.scheduled >= 1

    def test_report_pass_rule(self):
        """Test that passing needs zero violations and enough BCD agreement."""
        assert OracleReport(instances=1, bcd_instances=10, bcd_within=9).passed(0.9)
        assert not OracleReport(instances=1, bcd_instances=10, bcd_within=8).passed(0.9)
        assert not OracleReport(instances=1, p1_violations=1).passed(0.9)
        assert OracleReport(instances=1).to_dict()["bcd_within_share"] == 1.0

    @pytest.mark.integration
    def test_solvers_never_lose_to_the_grid(self, unit_config):
        """Test that no subproblem update is beaten by its grid oracle."""
        report = run_oracle_suite(
            unit_config, instances=20, grid_points=1000, bcd_instances=5, resolution=20
        )
        assert report.instances == 20
        assert report.tau1_violations == 0
        assert report.p1_violations == 0
        assert report.ps_violations == 0
        assert report.quadratic_mismatches == 0
        assert report.quadratic_points > 0
        assert report.bcd_instances == 5
