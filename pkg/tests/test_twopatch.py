from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import oracle_equilibrium
from streamharvest import (
    ArgumentError,
    DomainError,
    Regime,
    TwoPatchScenario,
    UnsupportedCaseError,
    biomass_derivative,
    classify_biomass,
    classify_yield,
    persistence_sufficient,
    persistent_for_all_theta,
    solve_equilibrium,
    thresholds,
    tie_biomass,
    yield_derivative,
)
from streamharvest.optimize import objective_values

GRID5 = (0.0, 0.25, 0.5, 0.75, 1.0)


def fig1(r, c=1.0):
    return TwoPatchScenario.homogeneous(r, c, 1.0, 7.0, 4.0)


def fd(s, theta, objective, step=1e-4):
    hs = np.array([s.efforts(theta + step), s.efforts(theta - step)])
    v = objective_values(s.model, hs, objective)
    return (v[0] - v[1]) / (2 * step)


class TestScenario:
    def test_rejects_nonpositive(self):
        with pytest.raises(ArgumentError):
            TwoPatchScenario.homogeneous(1.0, 1.0, 1.0, 0.0, 4.0)

    def test_allocation(self):
        a = fig1(5.0).allocation(0.25)
        np.testing.assert_allclose(a.h, [1.0, 3.0])
        with pytest.raises(ArgumentError):
            fig1(5.0).allocation(1.5)


class TestThresholds:
    def test_figure1_values(self):
        th = thresholds(fig1(10.0))
        assert th.r_crit == pytest.approx(32 / 9, rel=1e-14)
        assert th.r_m == pytest.approx(6.8123, abs=5e-5)
        assert th.r_M == pytest.approx(15.1877, abs=5e-5)
        assert th.r_tie == 11.0

    def test_figure2_values(self):
        th = thresholds(TwoPatchScenario.homogeneous(3.0, 1.0, 1.0, 3.0, 4.0))
        assert th.r_crit == pytest.approx(3.2)
        assert th.r_tie == pytest.approx(7.0)

    def test_small_budget_limit(self):
        th = thresholds(TwoPatchScenario.homogeneous(3.0, 1.0, 1.5, 2.0, 1e-12))
        for v in (th.r_m, th.r_M, th.r_tie):
            assert v == pytest.approx(5.0, abs=1e-10)

    def test_homogeneous_weighted_growth_is_r(self):
        assert thresholds(fig1(9.5)).w == pytest.approx(9.5, rel=1e-14)

    def test_sufficient_condition_implies_persistence(self, rng):
        for _ in range(50):
            d, q, H = rng.uniform(0.2, 3), rng.uniform(0.2, 6), rng.uniform(0.5, 5)
            s = TwoPatchScenario.homogeneous(rng.uniform(0, 10), 1.0, d, q, H)
            if persistence_sufficient(s):
                assert persistent_for_all_theta(s)


class TestDerivatives:
    @pytest.mark.parametrize("theta", GRID5)
    def test_large_growth_decreasing(self, theta):
        assert biomass_derivative(fig1(17.0), theta) < 0

    @pytest.mark.parametrize("theta", GRID5)
    def test_small_growth_increasing(self, theta):
        assert biomass_derivative(fig1(5.0), theta) > 0

    @pytest.mark.parametrize("theta", (0.0, 0.5, 1.0))
    def test_strong_advection_yield_decreasing(self, theta):
        s = TwoPatchScenario.homogeneous(17.0, 1.0, 1.0, 8.0, 4.0)
        assert thresholds(s).r_M == pytest.approx(16.0)
        assert yield_derivative(s, theta) < 0

    @pytest.mark.parametrize("theta", (0.5, 0.9))
    def test_upper_half_yield_decreasing(self, theta):
        assert yield_derivative(fig1(17.0), theta) < 0

    def test_finite_difference_oracle(self, rng):
        checked = 0
        while checked < 30:
            s = TwoPatchScenario.homogeneous(rng.uniform(1, 25), rng.uniform(0.5, 2), rng.uniform(0.2, 3),
                                             rng.uniform(0.2, 8), rng.uniform(0.5, 5))
            if not persistent_for_all_theta(s):
                continue
            checked += 1
            theta = rng.uniform(0.01, 0.99)
            assert biomass_derivative(s, theta) == pytest.approx(fd(s, theta, "biomass"), rel=1e-4)
            assert yield_derivative(s, theta) == pytest.approx(fd(s, theta, "yield"), rel=1e-4)

    def test_heterogeneous_biomass_derivative(self):
        s = TwoPatchScenario(9.0, 6.0, 1.0, 1.5, 1.0, 2.0, 3.0)
        assert biomass_derivative(s, 0.4) == pytest.approx(fd(s, 0.4, "biomass"), rel=1e-4)

    def test_heterogeneous_yield_unsupported(self):
        with pytest.raises(UnsupportedCaseError):
            yield_derivative(TwoPatchScenario(9.0, 6.0, 1.0, 1.0, 1.0, 2.0, 3.0), 0.4)

    def test_extinct_scenario_is_domain_error(self):
        s = TwoPatchScenario.homogeneous(1.0, 1.0, 1.0, 3.0, 4.0)
        with pytest.raises(DomainError):
            biomass_derivative(s, 0.0)


class TestClassifyBiomass:
    def test_downstream_only(self):
        v = classify_biomass(fig1(17.0))
        assert v.regime is Regime.DOWNSTREAM_ONLY and v.theta_star == 0.0

    def test_upstream_only(self):
        v = classify_biomass(fig1(5.0))
        assert v.regime is Regime.UPSTREAM_ONLY and v.theta_star == 1.0

    def test_boundary_resolved_downstream(self):
        v = classify_biomass(fig1(13.0))
        assert v.regime is Regime.BOUNDARY_EITHER and v.theta_star == 0.0

    def test_boundary_resolved_upstream(self):
        v = classify_biomass(fig1(9.0))
        assert v.regime is Regime.BOUNDARY_EITHER and v.theta_star == 1.0

    def test_tie_reports_both(self):
        v = classify_biomass(fig1(11.0))
        assert v.co_optimal == (0.0, 1.0)

    def test_unequal_competition_unsupported(self):
        with pytest.raises(UnsupportedCaseError):
            classify_biomass(TwoPatchScenario(9.0, 9.0, 1.0, 2.0, 1.0, 7.0, 4.0))

    def test_not_persistent(self):
        with pytest.raises(DomainError):
            classify_biomass(fig1(2.0))

    def test_verdicts_agree_with_oracle_boundaries(self):
        for r in np.linspace(7.0, 15.0, 9):
            if r == 11.0:
                continue
            s = fig1(r)
            m0 = oracle_equilibrium(s.model, s.efforts(0.0)).sum()
            m1 = oracle_equilibrium(s.model, s.efforts(1.0)).sum()
            assert classify_biomass(s).theta_star == (0.0 if m0 > m1 else 1.0)


class TestTie:
    def test_hand_solved(self):
        m0, m1 = tie_biomass(fig1(11.0))
        assert m0 == pytest.approx(15.0, rel=1e-12) and m1 == pytest.approx(15.0, rel=1e-12)

    def test_competition_scaling(self):
        m0, m1 = tie_biomass(fig1(11.0, c=4.0))
        assert m0 == pytest.approx(15.0 / 4.0, rel=1e-12) and m1 == pytest.approx(15.0 / 4.0, rel=1e-12)

    def test_other_instance(self):
        m0, m1 = tie_biomass(TwoPatchScenario.homogeneous(10.0, 1.0, 2.0, 5.0, 2.0))
        assert abs(m0 - m1) <= 1e-8 * m0

    def test_off_tie_rejected(self):
        with pytest.raises(DomainError):
            tie_biomass(fig1(12.0))


class TestClassifyYield:
    def test_downstream_only(self):
        v = classify_yield(TwoPatchScenario.homogeneous(17.0, 1.0, 1.0, 8.0, 4.0))
        assert v.regime is Regime.DOWNSTREAM_ONLY and v.theta_star == 0.0

    def test_interior(self):
        v = classify_yield(TwoPatchScenario.homogeneous(3.0, 1.0, 1.0, 3.0, 4.0))
        assert v.regime is Regime.INTERIOR_OR_UNKNOWN
        assert v.theta_star == pytest.approx(0.66, abs=0.03)

    def test_small_growth_optimum_just_below_one(self):
        # the yield derivative is negative at theta=1 here, so the maximizer
        # sits slightly inside the interval (see the acceptance notes)
        s = TwoPatchScenario.homogeneous(1.0, 1.0, 1.0, 3.0, 4.0)
        v = classify_yield(s)
        assert v.theta_star == pytest.approx(0.99696, abs=1e-4)
        assert yield_derivative(s, 1.0) < 0
        y = objective_values(s.model, np.array([s.efforts(0.997), s.efforts(1.0)]), "yield")
        assert y[0] > y[1] > 0

    def test_bound_attached_above_r_M(self):
        v = classify_yield(fig1(17.0))
        assert v.theta_bound == ("<", 0.5)
        assert v.theta_star < 0.5


@settings(max_examples=30, deadline=None)
@given(d=st.floats(0.2, 3.0), q=st.floats(0.2, 8.0), H=st.floats(0.5, 6.0), c=st.floats(0.3, 3.0))
def test_boundary_order_follows_tie_rate(d, q, H, c):
    r_tie = 2 * d + q + H / 2
    for factor in (0.95, 1.05):
        s = TwoPatchScenario.homogeneous(factor * r_tie, c, d, q, H)
        e0 = solve_equilibrium(s.model, s.efforts(0.0))
        e1 = solve_equilibrium(s.model, s.efforts(1.0))
        assume(e0.persistent and e1.persistent)
        assert math.copysign(1, e0.biomass - e1.biomass) == math.copysign(1, factor - 1)
