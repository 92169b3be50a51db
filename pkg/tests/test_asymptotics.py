from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_irreducible
from streamharvest import (
    ArgumentError,
    Certainty,
    GroupedAllocation,
    Model,
    asymptotic_biomass_strategy,
    asymptotic_limits,
    asymptotic_yield_strategy,
    effective_net_flow,
    straight_stream,
    straight_stream_matrix,
    three_one_one,
)


def oracle_flow(A, c):
    n = len(c)
    return np.array([sum(A[i][j] / c[j] - A[j][i] / c[i] for j in range(n) if j != i) for i in range(n)])


class TestNetFlow:
    def test_straight_stream(self):
        np.testing.assert_array_equal(effective_net_flow(straight_stream(3, 1.0, 2.0, 5.0, 1.0)).I, [-2, 0, 2])

    def test_three_one_one(self):
        report = effective_net_flow(three_one_one(1.0, 2.0, 5.0, 1.0))
        np.testing.assert_array_equal(report.I, [-2, -2, -2, 4, 2])
        assert report.ranking[0] == 3

    def test_two_patch_unequal_competition(self):
        m = Model([1.0, 1.0], [1.0, 2.0], [[0, 1], [2, 0]])
        np.testing.assert_allclose(effective_net_flow(m).I, [-1.5, 1.5])

    def test_ties_rank_lower_index_first(self):
        report = effective_net_flow(three_one_one(1.0, 2.0, 5.0, 1.0))
        assert report.ranking.tolist() == [3, 4, 0, 1, 2]

    def test_matches_loop_oracle(self, rng):
        for _ in range(20):
            m = random_irreducible(rng, int(rng.integers(2, 7)))
            np.testing.assert_allclose(effective_net_flow(m).I, oracle_flow(m.A, m.c), rtol=1e-12, atol=1e-12)


class TestStrategies:
    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_biomass_lead_is_outlet(self, n):
        advice = asymptotic_biomass_strategy(straight_stream(n, 1.0, 2.0, 100.0, 1.0), 4.0)
        assert advice.lead_patch == n - 1
        assert advice.certainty is Certainty.CERTIFIED

    def test_biomass_lead_on_tree_is_junction(self):
        assert asymptotic_biomass_strategy(three_one_one(1.0, 2.0, 100.0, 1.0), 4.0).lead_patch == 3

    def test_biomass_group_is_strongest_competition(self):
        m = Model(np.ones(3), [2.0, 2.0, 1.0], straight_stream_matrix(3, 1.0, 2.0))
        advice = asymptotic_biomass_strategy(m, 1.0)
        I = effective_net_flow(m).I
        assert advice.candidate_group == (0, 1)
        assert advice.lead_patch == int(np.argmax(I[:2]))

    def test_yield_certified_when_advection_strong(self):
        advice = asymptotic_yield_strategy(straight_stream(4, 1.0, 9.0, 100.0, 1.0), 4.0)
        assert advice.certainty is Certainty.CERTIFIED and advice.lead_patch == 3

    def test_yield_bound_when_advection_weak(self):
        advice = asymptotic_yield_strategy(straight_stream(4, 1.0, 7.0, 100.0, 1.0), 4.0)
        assert advice.certainty is Certainty.GAP_CONDITION_FAILED
        assert advice.lead_patch == 3
        assert advice.lead_effort_lower_bound == pytest.approx(1.0)

    def test_yield_group_is_weakest_competition(self):
        m = Model(np.ones(3), [1.0, 1.0, 2.0], straight_stream_matrix(3, 1.0, 2.0))
        assert asymptotic_yield_strategy(m, 1.0).candidate_group == (0, 1)

    def test_net_flow_tie_is_reported(self):
        m = Model(np.ones(2), [1.0, 1.0], [[0, 1], [1, 0]])
        advice = asymptotic_biomass_strategy(m, 1.0)
        assert advice.co_leaders == (0, 1)
        assert advice.certainty is Certainty.GAP_CONDITION_FAILED


class TestLimits:
    def test_two_group_biomass(self):
        m = Model(np.ones(3), [2.0, 2.0, 1.0], straight_stream_matrix(3, 1.0, 2.0))
        a = GroupedAllocation.two_group(3, (0, 1), 0.3, [0, 0, 1], [0.5, 0.5, 0])
        assert asymptotic_limits(m, a, "biomass", 1.0) == pytest.approx(-0.5)
        assert asymptotic_limits(m, a, "yield", 1.0) == pytest.approx(0.5)

    def test_within_biomass(self):
        # lead flow 4, other member flow 2 with full weight: H * (-4 + 2)
        m = three_one_one(1.0, 2.0, 1.0, 1.0)
        a = GroupedAllocation.within(5, range(5), 3, 0.2, [0, 0, 0, 0, 1])
        assert asymptotic_limits(m, a, "biomass", 3.0) == pytest.approx(-6.0)

    def test_within_yield_at_zero_share(self):
        m = straight_stream(3, 1.0, 9.0, 1.0, 1.0)
        H = 4.0
        a = GroupedAllocation.within(3, (0, 1, 2), 2, 0.0, [0, 1, 0])
        I = effective_net_flow(m).I
        value = asymptotic_limits(m, a, "yield", H)
        assert value == pytest.approx(2 * H - I[2] + I[1])
        # gap 9 > 2H/c = 8, so the limit is negative
        assert value < 0

    def test_group_with_mixed_competition_rejected(self):
        m = Model(np.ones(3), [1.0, 2.0, 1.0], straight_stream_matrix(3, 1.0, 2.0))
        a = GroupedAllocation.two_group(3, (0, 1), 0.3, [0, 0, 1], [0.5, 0.5, 0])
        with pytest.raises(ArgumentError):
            asymptotic_limits(m, a, "biomass", 1.0)

    def test_allocation_validation(self):
        with pytest.raises(ArgumentError):
            GroupedAllocation.two_group(3, (0, 1), 0.3, [0.5, 0, 0.5], [0.5, 0.5, 0])
        with pytest.raises(ArgumentError):
            GroupedAllocation.within(3, (0, 1, 2), 2, 1.5, [0.5, 0.5, 0])

    def test_efforts_sum_to_budget(self):
        a = GroupedAllocation.within(5, range(5), 3, 0.5, [0.1, 0.2, 0.3, 0, 0.4])
        h = a.allocation(4.0).h
        assert h.sum() == pytest.approx(4.0) and h[3] == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 9))
def test_net_flow_sums_to_zero(seed, n):
    m = random_irreducible(np.random.default_rng(seed), n)
    assert abs(effective_net_flow(m).I.sum()) <= 1e-12
