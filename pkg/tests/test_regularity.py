"""Metric increase sampling, descent constants, and the error bound."""

import numpy as np
import pytest

from rvopt.cones import Cone
from rvopt.errors import PreconditionError
from rvopt.firstorder import PolyhedralSet
from rvopt.regularity import (check_metric_increase, cq_sigma,
                              estimate_increase_bound, verify_error_bound)
from rvopt.scenarios import ScenarioMap

from conftest import shifted_pair_scenarios

CONE = Cone.orthant(2)
PLANE = PolyhedralSet.whole_space(2)


def identity_scenario():
    return ScenarioMap(mats=np.eye(2), offsets=np.zeros((1, 2)))


class TestMetricIncrease:
    """For one identity scenario against the plane orthant the largest
    workable rate is 1 + 1/sqrt(2) ~ 1.707: the step budget r must cover
    the enlarged ball alpha r around the image along the worst axis."""

    def test_moderate_rates_pass(self):
        for alpha in (1.2, 1.5, 1.7):
            rep = check_metric_increase(identity_scenario(), CONE, PLANE,
                                        [0.0, 0.0], alpha, 0.5)
            assert rep.passed, alpha
            assert rep.witness is None

    def test_rates_beyond_the_threshold_fail(self):
        for alpha in (1.75, 5.0):
            rep = check_metric_increase(identity_scenario(), CONE, PLANE,
                                        [0.0, 0.0], alpha, 0.5)
            assert not rep.passed
            probe, r = rep.witness
            assert r > 0.0 and probe.shape == (2,)

    def test_pass_set_is_monotone_in_alpha(self):
        """Once a rate fails, every larger rate fails too."""
        outcomes = [check_metric_increase(identity_scenario(), CONE, PLANE,
                                          [0.0, 0.0], a, 0.5).passed
                    for a in (1.2, 1.5, 1.7, 1.75, 2.5, 5.0)]
        seen_failure = False
        for ok in outcomes:
            if not ok:
                seen_failure = True
            assert not (seen_failure and ok)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            check_metric_increase(identity_scenario(), CONE, PLANE,
                                  [0.0, 0.0], 1.0, 0.5)
        with pytest.raises(PreconditionError):
            check_metric_increase(identity_scenario(), CONE, PLANE,
                                  [0.0, 0.0], 1.5, 0.0)
        box = PolyhedralSet.box([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(PreconditionError, match="outside the region"):
            check_metric_increase(identity_scenario(), CONE, box,
                                  [5.0, 5.0], 1.5, 0.5)


class TestIncreaseEstimate:
    def test_shifted_pair_estimate_frozen(self):
        """Bisection lands just under the theoretical threshold."""
        est = estimate_increase_bound(shifted_pair_scenarios(), CONE, PLANE,
                                      [0.25, 1.0], 0.5, seed=0)
        assert est == pytest.approx(1.704046875, abs=1e-12)
        assert 1.3 <= est <= 1.0 + 1.0 / np.sqrt(2.0) + 1e-9

    def test_boxed_corner_has_no_bound(self):
        """At the top corner of the box no step direction can absorb the
        enlarged image ball, so no rate above 1 is certifiable."""
        box = PolyhedralSet.box([0.0, 0.0], [2.0, 2.0])
        est = estimate_increase_bound(shifted_pair_scenarios(), CONE, box,
                                      [2.0, 2.0], 0.5, seed=0)
        assert est is None


class TestDescentConstant:
    def test_sigma_from_rate(self):
        assert cq_sigma(1.5) == pytest.approx(0.5)
        assert cq_sigma(2.0) == pytest.approx(1.0)

    def test_rejects_unusable_rates(self):
        with pytest.raises(PreconditionError):
            cq_sigma(1.0)
        with pytest.raises(PreconditionError):
            cq_sigma(None)


class TestErrorBound:
    smap = shifted_pair_scenarios()

    def test_holds_on_the_feasible_boundary(self):
        rep = verify_error_bound(self.smap, CONE, PLANE, [1.0, 0.0],
                                 sigma=0.9, radius=0.5, resolution=41)
        assert rep.passed
        assert rep.max_violation == pytest.approx(-0.05, abs=1e-9)
        assert rep.slack == pytest.approx(0.05)
        assert rep.witness is None

    def test_overconfident_sigma_fails(self):
        rep = verify_error_bound(self.smap, CONE, PLANE, [1.0, 0.0],
                                 sigma=100.0, radius=0.5, resolution=41)
        assert not rep.passed
        assert rep.max_violation == pytest.approx(0.1975, abs=1e-9)
        np.testing.assert_allclose(rep.witness, [1.0, -0.25])

    def test_certified_sigma_chain(self):
        """The estimated rate minus one is a working descent constant."""
        est = estimate_increase_bound(self.smap, CONE, PLANE, [0.25, 1.0],
                                      0.5, seed=0)
        rep = verify_error_bound(self.smap, CONE, PLANE, [0.25, 1.0],
                                 cq_sigma(est), radius=0.5, resolution=101)
        assert rep.passed

    def test_feasible_points_have_zero_gap(self):
        """On feasible lattice points both sides of the bound vanish."""
        pts = np.array([[x1, x2] for x1 in np.linspace(0.5, 1.0, 6)
                        for x2 in np.linspace(0.0, 0.5, 6)])
        phi = self.smap.merit_many(CONE, pts)
        np.testing.assert_allclose(phi, np.zeros(len(pts)), atol=1e-12)

    def test_sigma_must_be_positive(self):
        with pytest.raises(PreconditionError):
            verify_error_bound(self.smap, CONE, PLANE, [1.0, 0.0],
                               sigma=0.0, radius=0.5)

    def test_needs_feasible_lattice_points(self):
        far = [-50.0, -50.0]
        with pytest.raises(PreconditionError, match="no feasible lattice"):
            verify_error_bound(self.smap, CONE, PLANE, far,
                               sigma=0.5, radius=0.5, resolution=11)
