"""Brute-force lattice oracles: Pareto scans, penalization transfer, and a
derivative-free descent solver.

These are the ground-truth side of the package: dominance is decided by
exhaustive pairwise comparison on a lattice, so the first-order
certificates can be cross-validated against something that involves no
calculus.  Dominance uses the interior of the ordering cone with a small
absolute margin; efficiency uses the punctured cone, so the efficient set
is always contained in the weakly efficient set.
"""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cones import ORTHANT, Cone
from .errors import PreconditionError
from .problem import Problem
from .sampling import grid_points

DOMINANCE_MARGIN = 1e-9


def _order_rows(cone: Cone) -> np.ndarray:
    if cone.kind == ORTHANT:
        return np.eye(cone.dim)
    return np.array(cone.rows)


def strictly_dominates(cone: Cone, fx, fy, margin: float = DOMINANCE_MARGIN) -> bool:
    """True when fy improves on fx into the interior of the cone:
    fx - fy lies in int(cone) with the given margin."""
    gap = np.asarray(fx, dtype=float) - np.asarray(fy, dtype=float)
    return bool(np.min(_order_rows(cone) @ gap) >= margin)


@dataclass(frozen=True)
class GridScan:
    """Lattice scan of a problem over a box."""

    lo: np.ndarray
    hi: np.ndarray
    resolution: tuple
    points: np.ndarray
    values: np.ndarray
    merit: np.ndarray
    feasible: np.ndarray
    weak_efficient: np.ndarray
    efficient: np.ndarray
    dominance_count: np.ndarray

    def to_csv(self, path) -> None:
        n, m = self.points.shape[1], self.values.shape[1]
        header = [f"x{i + 1}" for i in range(n)] + ["merit", "feasible",
                                                    "weak_efficient", "efficient",
                                                    "dominance_count"] \
            + [f"f{k + 1}" for k in range(m)]
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for i in range(self.points.shape[0]):
                writer.writerow([*map(float, self.points[i]), float(self.merit[i]),
                                 int(self.feasible[i]), int(self.weak_efficient[i]),
                                 int(self.efficient[i]), int(self.dominance_count[i]),
                                 *map(float, self.values[i])])


def grid_scan(problem: Problem, lo, hi, resolution,
              feas_tol: float = 1e-9, margin: float = DOMINANCE_MARGIN,
              constrained: bool = True) -> GridScan:
    """Feasibility, weak efficiency, and efficiency masks on a lattice.

    With ``constrained=False`` the scenario constraint is ignored and
    feasibility means region membership only (used by penalization
    transfer).  Given masks F (feasible) and values f, a point is weakly
    efficient when no feasible lattice point improves on it into the
    interior of the ordering cone, and efficient when no other feasible
    lattice point improves into the punctured cone.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    if np.isscalar(resolution) or np.ndim(resolution) == 0:
        res_tuple = (int(resolution),) * lo.size
    else:
        res_tuple = tuple(int(r) for r in resolution)
    if min(res_tuple) < 3:
        raise PreconditionError("grid resolution must be at least 3 per axis")
    if np.prod(res_tuple) > 1_000_000:
        raise PreconditionError("grid exceeds the 1e6 point cap")
    pts = grid_points(lo, hi, resolution)

    values = np.array([problem.objective.value(p) for p in pts])
    phi = problem.merit_many(pts)
    in_region = np.array([problem.region.contains(p, tol=feas_tol) for p in pts])
    feasible = in_region & ((phi <= feas_tol) if constrained else True)

    rows = _order_rows(problem.ordering_cone)
    proj = values @ rows.T                     # row values in the dual pairing
    feas_idx = np.flatnonzero(feasible)
    n_pts = pts.shape[0]
    weak = np.zeros(n_pts, dtype=bool)
    eff = np.zeros(n_pts, dtype=bool)
    dom_count = np.zeros(n_pts, dtype=int)

    if feas_idx.size:
        feas_proj = proj[feas_idx]
        feas_vals = values[feas_idx]
        for i in range(n_pts):
            gap = proj[i][None, :] - feas_proj
            strict = np.all(gap >= margin, axis=1)
            dom_count[i] = int(np.sum(strict))
            if not feasible[i]:
                continue
            weak[i] = not np.any(strict)
            weak_gap = np.all(gap >= -margin, axis=1)
            nonzero = np.linalg.norm(values[i][None, :] - feas_vals, axis=1) > margin
            eff[i] = not np.any(weak_gap & nonzero)
    return GridScan(lo=lo, hi=hi, resolution=res_tuple, points=pts,
                    values=values, merit=phi, feasible=feasible,
                    weak_efficient=weak, efficient=eff,
                    dominance_count=dom_count)


# ===== penalization ======================================================


@dataclass(frozen=True)
class PenalizedObjective:
    """f(x) + (ell / sigma) merit(x) e  over the bare region."""

    problem: Problem
    ell: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise PreconditionError("penalization needs sigma > 0")
        if self.ell < 0.0:
            raise PreconditionError("penalty weight must be nonnegative")
        if self.ell == 0.0:
            warnings.warn("penalization with ell = 0 is degenerate", stacklevel=3)

    def value(self, x) -> np.ndarray:
        prob = self.problem
        return prob.objective.value(x) \
            + (self.ell / self.sigma) * prob.merit(x) * prob.direction

    def value_many(self, points) -> np.ndarray:
        prob = self.problem
        base = np.array([prob.objective.value(p) for p in points])
        phi = prob.merit_many(points)
        return base + (self.ell / self.sigma) * phi[:, None] * prob.direction[None, :]


def build_penalized(problem: Problem, ell: float, sigma: float,
                    lipschitz_floor: float | None = None) -> PenalizedObjective:
    """Penalized objective; warns when ell is below a known order-Lipschitz
    floor, since the transfer argument then has no backing."""
    if lipschitz_floor is not None and ell < lipschitz_floor:
        warnings.warn("ell is below the order-Lipschitz estimate; "
                      "penalization transfer is not guaranteed", stacklevel=2)
    return PenalizedObjective(problem=problem, ell=ell, sigma=sigma)


@dataclass(frozen=True)
class TransferReport:
    passed: bool
    dominator: np.ndarray | None
    ell: float
    sigma: float


def check_penalization_transfer(problem: Problem, x, ell: float, sigma: float,
                                lo, hi, resolution,
                                margin: float = DOMINANCE_MARGIN,
                                feas_tol: float = 1e-9) -> TransferReport:
    """Does the reference point stay weakly efficient when the constraint is
    replaced by the merit penalty?

    Precondition: the point is weakly efficient for the constrained lattice
    scan.  The check then drops the constraint, keeps the region, and looks
    for a lattice point whose penalized value improves on the reference
    into the interior of the ordering cone.
    """
    x = np.asarray(x, dtype=float).ravel()
    constrained = grid_scan(problem, lo, hi, resolution, feas_tol=feas_tol,
                            margin=margin)
    fx = problem.objective.value(x)
    if not problem.feasible(x, tol=feas_tol):
        raise PreconditionError("reference point is not feasible")
    for j in np.flatnonzero(constrained.feasible):
        if strictly_dominates(problem.ordering_cone, fx, constrained.values[j],
                              margin):
            raise PreconditionError("reference point is not weakly efficient "
                                    "on the constrained lattice")

    pen = build_penalized(problem, ell, sigma)
    pen_ref = pen.value(x)
    region_mask = np.array([problem.region.contains(p, tol=feas_tol)
                            for p in constrained.points])
    pen_vals = pen.value_many(constrained.points[region_mask])
    for row, point in zip(pen_vals, constrained.points[region_mask]):
        if strictly_dominates(problem.ordering_cone, pen_ref, row, margin):
            return TransferReport(passed=False, dominator=point, ell=ell,
                                  sigma=sigma)
    return TransferReport(passed=True, dominator=None, ell=ell, sigma=sigma)


# ===== descent solver ====================================================


@dataclass(frozen=True)
class DescentResult:
    x: np.ndarray
    value: float
    trace: tuple
    evaluations: int
    stalled: bool


def descent_solve(problem: Problem, start, weights, ell: float, sigma: float,
                  budget: int = 4000, initial_step: float = 0.5,
                  step_tol: float = 1e-9) -> DescentResult:
    """Projected coordinate pattern search on the weighted penalized scalar
    w . [f(x) + (ell/sigma) merit(x) e]  over the region.

    Coordinate steps with a halving schedule; the trace of accepted values
    is monotone nonincreasing.  Runs until the step drops below tolerance
    or the budget is spent; the stall flag is set when the budget ran out
    with no decrease over the last three step levels.
    """
    weights = np.asarray(weights, dtype=float).ravel()
    if float(weights @ problem.direction) <= 0.0:
        raise PreconditionError("weights must pair positively with the "
                                "interior direction")
    pen = build_penalized(problem, ell, sigma)

    def scalar(p):
        return float(weights @ pen.value(p))

    x = problem.region.project(np.asarray(start, dtype=float).ravel())
    if budget <= 0:
        return DescentResult(x=x, value=scalar(x), trace=((x.copy(),
                             scalar(x)),), evaluations=0, stalled=True)
    evals = 1
    best = scalar(x)
    trace = [(x.copy(), best)]
    step = initial_step
    idle_levels = 0
    while step >= step_tol and evals < budget:
        best_cand, best_val = None, best
        for i in range(x.size):
            for sign in (1.0, -1.0):
                if evals >= budget:
                    break
                cand = x.copy()
                cand[i] += sign * step
                cand = problem.region.project(cand)
                val = scalar(cand)
                evals += 1
                if val < best_val - 1e-15:
                    best_cand, best_val = cand, val
            if evals >= budget:
                break
        if best_cand is not None:
            x, best = best_cand, best_val
            trace.append((x.copy(), best))
            idle_levels = 0
        else:
            step *= 0.5
            idle_levels += 1
    stalled = evals >= budget and step >= step_tol and idle_levels >= 3
    return DescentResult(x=x, value=best, trace=tuple(trace),
                         evaluations=evals, stalled=stalled)


@dataclass(frozen=True)
class RefutationResult:
    witness: np.ndarray | None
    searched: int
    note: str


def refute_efficiency(problem: Problem, x, lo, hi, resolution,
                      margin: float = DOMINANCE_MARGIN,
                      feas_tol: float = 1e-9) -> RefutationResult:
    """Search the lattice for a feasible point strictly dominating the
    reference.  An infeasible reference yields no witness, flagged as such."""
    x = np.asarray(x, dtype=float).ravel()
    if not problem.feasible(x, tol=feas_tol):
        return RefutationResult(witness=None, searched=0,
                                note="reference point infeasible")
    scan = grid_scan(problem, lo, hi, resolution, feas_tol=feas_tol, margin=margin)
    fx = problem.objective.value(x)
    best_idx, best_gap = None, -np.inf
    rows = _order_rows(problem.ordering_cone)
    for j in np.flatnonzero(scan.feasible):
        gap = float(np.min(rows @ (fx - scan.values[j])))
        if gap >= margin and gap > best_gap:
            best_idx, best_gap = j, gap
    if best_idx is None:
        return RefutationResult(witness=None, searched=int(np.sum(scan.feasible)),
                                note="no dominating lattice point")
    return RefutationResult(witness=scan.points[best_idx],
                            searched=int(np.sum(scan.feasible)),
                            note="dominating witness found")
