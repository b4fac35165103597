"""Two-phase simplex on hand instances and certified random programs."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rvopt.simplex import (INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram,
                           LpResult, feasibility, solve_lp)


def certified_instance(rng, n, m):
    """Build an LP whose optimum is known from a constructed dual pair.

    Pick x* >= 0 and y* >= 0 with complementary supports, set
    b = A x* + slack (slack zero where y* > 0) and c = s - A^T y*
    (s zero where x* > 0).  The pair (x*, y*) then satisfies the KKT
    system of  min c.x  s.t.  A x <= b, x >= 0,  so the optimal value is
    c . x* = -b . y* by strong duality.
    """
    a = rng.standard_normal((m, n))
    x_star = np.where(rng.random(n) < 0.6, rng.random(n) + 0.1, 0.0)
    y_star = np.where(rng.random(m) < 0.6, rng.random(m) + 0.1, 0.0)
    slack = np.where(y_star > 0, 0.0, rng.random(m) + 0.1)
    s = np.where(x_star > 0, 0.0, rng.random(n) + 0.1)
    b = a @ x_star + slack
    c = s - a.T @ y_star
    lp = LinearProgram(c=c, a_ub=a, b_ub=b)
    return lp, float(c @ x_star)


class TestHandInstances:
    def test_two_constraint_optimum(self):
        """min -x1-x2 s.t. x1+2x2 <= 4, 3x1+x2 <= 6 => (1.6, 1.2)."""
        lp = LinearProgram(c=[-1.0, -1.0],
                           a_ub=[[1.0, 2.0], [3.0, 1.0]],
                           b_ub=[4.0, 6.0])
        res = solve_lp(lp)
        assert res.status == OPTIMAL
        assert_allclose(res.x, [1.6, 1.2], atol=1e-9)
        assert res.value == pytest.approx(-2.8, abs=1e-9)

    def test_equality_constraint(self):
        # min x1 + x2 on the segment x1 + x2 = 1, x >= 0
        lp = LinearProgram(c=[1.0, 1.0], a_eq=[[1.0, 1.0]], b_eq=[1.0])
        res = solve_lp(lp)
        assert res.status == OPTIMAL
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_free_variable(self):
        lp = LinearProgram(c=[1.0], a_ub=[[-1.0]], b_ub=[2.0],
                           nonneg=np.array([False]))
        res = solve_lp(lp)
        assert res.status == OPTIMAL
        assert res.x[0] == pytest.approx(-2.0, abs=1e-10)

    def test_infeasible(self):
        """x >= 0 with x <= -1 has a positive phase-one optimum."""
        lp = LinearProgram(c=[1.0], a_ub=[[1.0]], b_ub=[-1.0])
        res = solve_lp(lp)
        assert res.status == INFEASIBLE
        assert res.phase_one > 1e-8

    def test_unbounded_returns_ray(self):
        lp = LinearProgram(c=[-1.0, 0.0], a_ub=[[0.0, 1.0]], b_ub=[1.0])
        res = solve_lp(lp)
        assert res.status == UNBOUNDED
        ray = res.ray
        assert ray is not None and ray[0] > 0
        # moving along the ray stays feasible and improves the objective
        base = np.zeros(2)
        far = base + 1000.0 * ray
        assert np.all(lp.a_ub @ far <= lp.b_ub + 1e-9)
        assert lp.c @ ray < 0

    def test_degenerate_rhs(self):
        # Bland's rule must leave the degenerate vertex without cycling
        lp = LinearProgram(c=[-1.0, -1.0],
                           a_ub=[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                           b_ub=[1.0, 1.0, 1.0])
        res = solve_lp(lp)
        assert res.status == OPTIMAL
        assert res.value == pytest.approx(-1.0, abs=1e-9)


class TestRandomCertified:
    def test_matches_constructed_optimum(self):
        rng = np.random.default_rng(11)
        for trial in range(60):
            n = int(rng.integers(2, 7))
            m = int(rng.integers(2, 7))
            lp, target = certified_instance(rng, n, m)
            res = solve_lp(lp)
            assert res.status == OPTIMAL, f"trial {trial}"
            assert res.value == pytest.approx(target, abs=1e-8)
            assert res.residual_ub <= 1e-8
            assert res.complementarity <= 1e-7

    def test_value_consistent_with_solution(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            lp, _ = certified_instance(rng, 4, 5)
            res = solve_lp(lp)
            assert res.value == pytest.approx(float(lp.c @ res.x), abs=1e-10)


class TestFeasibility:
    def test_reports_feasible_point(self):
        lp = LinearProgram(c=np.zeros(2), a_eq=[[1.0, 1.0]], b_eq=[1.0])
        res = feasibility(lp)
        assert res.status == OPTIMAL
        assert res.x @ np.ones(2) == pytest.approx(1.0, abs=1e-9)

    def test_detects_infeasible_system(self):
        lp = LinearProgram(c=np.zeros(2), a_eq=[[1.0, 1.0], [1.0, 1.0]],
                           b_eq=[1.0, 2.0])
        assert feasibility(lp).status == INFEASIBLE

    def test_monotone_under_row_removal(self):
        """Dropping an inequality never destroys feasibility."""
        rng = np.random.default_rng(13)
        for _ in range(20):
            lp, _ = certified_instance(rng, 3, 5)
            assert feasibility(lp).status == OPTIMAL
            sub = LinearProgram(c=lp.c, a_ub=lp.a_ub[:-1], b_ub=lp.b_ub[:-1])
            assert feasibility(sub).status == OPTIMAL

    def test_empty_program(self):
        res = solve_lp(LinearProgram(c=np.zeros(0)))
        assert res.status == OPTIMAL and res.value == 0.0


class TestValidation:
    def test_column_mismatch(self):
        from rvopt.errors import DimensionError
        with pytest.raises(DimensionError):
            LinearProgram(c=[1.0, 2.0], a_ub=[[1.0, 2.0, 3.0]], b_ub=[1.0])

    def test_rhs_mismatch(self):
        from rvopt.errors import DimensionError
        with pytest.raises(DimensionError):
            LinearProgram(c=[1.0], a_ub=[[1.0]], b_ub=[1.0, 2.0])

    def test_result_defaults(self):
        res = LpResult(status=INFEASIBLE)
        assert res.x is None and np.isnan(res.value)
