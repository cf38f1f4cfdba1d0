"""
Unit tests for rate, secrecy-rate and outage evaluation.
"""

from dataclasses import replace

import numpy as np
import pytest

from secure_cwpcn.model.channel import FadingState
from secure_cwpcn.model.rates import (
    Allocation,
    SecrecyMode,
    coop_secrecy,
    no_coop_secrecy,
    objective_batch,
    outage_indicator,
    per_eav_secrecy,
    secrecy_batch,
    su_rate,
)


@pytest.fixture
def two_eav_state():
    return FadingState.from_real_gains(
        h_ss=[1.0, 0.8],
        h_sp=[0.3, 0.2],
        h_se=[[0.4, 0.1], [0.2, 0.6]],
        h_pp=1.5,
        h_pst=[1.0, 0.7],
        h_psr=0.2,
        h_pe=[0.3, 0.5],
    )


@pytest.fixture
def jamming_allocation():
    return Allocation(
        tau0=0.4,
        tau1=0.6,
        p0=0.5,
        p1=1.0,
        p_s=np.array([0.0, 0.5, 0.0]),
        q_s=np.array([0.0, 0.0, 0.7]),
        scheduled=1,
    )


@pytest.mark.unit
class TestSecondaryRate:
    """Test cases for the secondary rate."""

    def test_hand_computed_rate(self, simple_state, simple_allocation, normalized_config):
        """Test tau1 log2(1 + p_s h_ss / (sigma^2 + p1 h_psr)) on round numbers."""
        # 0.5 * log2(1 + 1 * 2 / (1 + 2 * 0.5)) = 0.5
        assert su_rate(simple_state, simple_allocation, normalized_config) == pytest.approx(0.5)

    def test_zero_power_zero_rate(self, simple_state, simple_allocation, normalized_config):
        """Test that no information power yields zero rate."""
        alloc = replace(simple_allocation, p_s=np.zeros(2))
        assert su_rate(simple_state, alloc, normalized_config) == 0.0


@pytest.mark.unit
class TestSecrecy:
    """Test cases for the primary secrecy rate."""

    def test_hand_computed_secrecy(self, simple_state, simple_allocation, normalized_config):
        """Test the cooperative secrecy rate against a hand computation."""
        report = coop_secrecy(simple_state, simple_allocation, normalized_config)

        pu_sinr = 2.0 * 1.0 / (1.0 + 1.0 * 0.5)
        eav_sinr = 2.0 * 0.5 / (1.0 + 1.0 * 0.25)
        expected = 0.5 * np.log2((1 + pu_sinr) / (1 + eav_sinr))
        assert report.secrecy == pytest.approx(expected)
        assert report.pu_rate == pytest.approx(0.5 * np.log2(1 + pu_sinr))
        assert report.outage == 1

    def test_no_coop_secrecy(self, simple_state, normalized_config):
        """Test log2(1 + P h_pp / sigma^2) - log2(1 + P h_pe / sigma^2)."""
        expected = np.log2(2.0) - np.log2(1.5)
        assert no_coop_secrecy(simple_state, normalized_config) == pytest.approx(expected)

    def test_no_coop_collusive_sums_snrs(self, two_eav_state, unit_config):
        """Test that colluding eavesdroppers combine their SNRs."""
        config = unit_config.with_updates(p_max_dbw=0.0)
        expected = np.log2(1 + 1.5) - np.log2(1 + 0.3 + 0.5)
        assert no_coop_secrecy(two_eav_state, config, collusive=True) == pytest.approx(expected)
        assert no_coop_secrecy(two_eav_state, config, collusive=False) == pytest.approx(
            np.log2(2.5) - np.log2(1.5)
        )

    def test_secrecy_clamped_at_zero(self, simple_state, simple_allocation, normalized_config):
        """Test that a stronger eavesdropper gives zero, not negative, secrecy."""
        strong = FadingState.from_real_gains(
            h_ss=[2.0], h_sp=[0.5], h_se=[[0.25]], h_pp=0.1, h_pst=[1.0], h_psr=0.5, h_pe=[5.0]
        )
        report = coop_secrecy(strong, simple_allocation, normalized_config)
        assert report.secrecy == 0.0
        assert report.outage == 1

    def test_collusion_never_helps_the_primary(self, two_eav_state, jamming_allocation, unit_config):
        """Test that secrecy against colluding eavesdroppers is no larger."""
        alone = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.NONCOLLUSIVE)
        joint = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.COLLUSIVE)
        assert joint.secrecy <= alone.secrecy

    def test_lower_bound_mode_is_pessimistic(self, two_eav_state, jamming_allocation, unit_config):
        """Test that ignoring the scheduled user's interference at the eavesdroppers lowers secrecy."""
        exact = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.COLLUSIVE)
        bound = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.COLLUSIVE_LB)
        assert bound.secrecy <= exact.secrecy

    def test_eav_rates_per_mode(self, two_eav_state, jamming_allocation, unit_config):
        """Test one eavesdropper rate per eavesdropper, or one combined rate."""
        alone = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.NONCOLLUSIVE)
        joint = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.COLLUSIVE)
        assert alone.eav_rates.shape == (2,)
        assert joint.eav_rates.shape == (1,)

    def test_worst_eavesdropper_sets_secrecy(self, two_eav_state, jamming_allocation, unit_config):
        """Test that non-collusive secrecy is the minimum per-eavesdropper secrecy."""
        per_eav = [per_eav_secrecy(two_eav_state, jamming_allocation, unit_config, n) for n in range(2)]
        report = coop_secrecy(two_eav_state, jamming_allocation, unit_config, SecrecyMode.NONCOLLUSIVE)
        assert report.secrecy == pytest.approx(min(per_eav))

    @pytest.mark.parametrize("n", [-1, 2])
    def test_per_eav_index_out_of_range(self, two_eav_state, jamming_allocation, unit_config, n):
        """Test that an invalid eavesdropper index raises IndexError."""
        with pytest.raises(IndexError):
            per_eav_secrecy(two_eav_state, jamming_allocation, unit_config, n)

    def test_batch_matches_scalar(self, two_eav_state, jamming_allocation, unit_config):
        """Test that broadcasting over candidate rows agrees with the scalar path."""
        p_s = np.stack([jamming_allocation.p_s, jamming_allocation.p_s * 2])
        batch = secrecy_batch(
            two_eav_state, jamming_allocation.tau1, jamming_allocation.p1, p_s,
            jamming_allocation.q_s, unit_config,
        )
        scalar = coop_secrecy(two_eav_state, jamming_allocation, unit_config).secrecy
        assert batch.shape == (2,)
        assert batch[0] == pytest.approx(scalar)


@pytest.mark.unit
class TestOutage:
    """Test cases for the outage indicator and objective."""

    def test_equal_to_target_is_not_outage(self):
        """Test that meeting the target exactly counts as success."""
        assert outage_indicator(0.5, 0.5) == 0
        assert outage_indicator(0.4999, 0.5) == 1

    def test_objective_penalizes_outage(self, simple_state, simple_allocation, normalized_config):
        """Test su_rate - eta * outage."""
        value = objective_batch(
            simple_state, simple_allocation.tau1, simple_allocation.p1, simple_allocation.p_s,
            simple_allocation.q_s, normalized_config, eta=3.0,
        )
        assert float(value) == pytest.approx(0.5 - 3.0)


@pytest.mark.unit
class TestAllocation:
    """Test cases for allocation validation."""

    def test_valid_allocation(self, simple_state, simple_allocation, normalized_config):
        """Test that a budget-tight allocation passes every check."""
        assert simple_allocation.violations(simple_state, normalized_config) == []

    def test_time_overrun(self, simple_state, simple_allocation, normalized_config):
        """Test that tau0 + tau1 > 1 is reported."""
        alloc = replace(simple_allocation, tau0=0.6)
        errors = alloc.violations(simple_state, normalized_config)
        assert any("tau0 + tau1" in error for error in errors)

    def test_transmit_and_jam(self, simple_state, simple_allocation, normalized_config):
        """Test that a user both transmitting and jamming is reported."""
        alloc = replace(simple_allocation, q_s=np.array([0.0, 0.1]))
        errors = alloc.violations(simple_state, normalized_config)
        assert any("both transmits and jams" in error for error in errors)

    def test_energy_causality(self, simple_state, simple_allocation, normalized_config):
        """Test that spending more than was harvested is reported."""
        alloc = replace(simple_allocation, p_s=np.array([0.0, 1.5]))
        errors = alloc.violations(simple_state, normalized_config)
        assert any("Energy causality" in error for error in errors)

    def test_power_budget(self, simple_state, simple_allocation, normalized_config):
        """Test that exceeding the average primary power is reported."""
        alloc = replace(simple_allocation, p1=3.0)
        errors = alloc.violations(simple_state, normalized_config)
        assert any("P_max" in error for error in errors)

    def test_initial_allocation(self):
        """Test the starting point of block coordinate descent."""
        alloc = Allocation.initial(3, 10.0)
        assert alloc.tau1 == 0.5
        assert alloc.p1 == 10.0
        assert alloc.p_s.shape == (4,)
        assert not alloc.p_s.flags.writeable
