"""The optimization problem container and its validation rules.

A problem bundles a vector objective ordered by a solid cone, an ambient
polyhedral region, and an uncertain cone constraint given by a finite
scenario family:  feasible points are those whose whole scenario image
lies in the constraint cone.  Validation enforces the structural facts
the certificates rely on: an ordering cone with nonempty interior, a
nontrivial constraint cone, and coherent dimensions.  The distinguished
interior direction used for penalization defaults to a normalized
interior witness of the ordering cone.
"""

from dataclasses import dataclass, replace

import numpy as np

from .cones import HALFSPACES, ORTHANT, RAYS, Cone
from .errors import ValidationError
from .firstorder import Fan, Objective, PolyhedralSet, fan_from_scenarios
from .scenarios import ScenarioMap
from .simplex import LinearProgram, OPTIMAL, solve_lp

INTERIOR_WITNESS_TOL = 1e-8


def interior_witness(cone: Cone):
    """A unit interior point of the cone and its interiority margin.

    Returns (witness, margin); margin <= 0 means the interior is empty.
    """
    if cone.kind == ORTHANT:
        e = np.ones(cone.dim) / np.sqrt(cone.dim)
        return e, float(np.min(e))
    if cone.kind != HALFSPACES:
        raise ValidationError("interior witness needs an orthant or halfspace cone")
    rows = cone.rows
    if rows.shape[0] == 0:
        e = np.zeros(cone.dim)
        e[0] = 1.0
        return e, 1.0
    # max t  s.t.  rows z >= t, |z_i| <= 1
    dim = cone.dim
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    a_ub = np.vstack([
        np.hstack([-rows, np.ones((rows.shape[0], 1))]),
        np.hstack([np.eye(dim), np.zeros((dim, 1))]),
        np.hstack([-np.eye(dim), np.zeros((dim, 1))]),
    ])
    b_ub = np.concatenate([np.zeros(rows.shape[0]), np.ones(2 * dim)])
    res = solve_lp(LinearProgram(c=c, a_ub=a_ub, b_ub=b_ub,
                                 nonneg=np.zeros(dim + 1, dtype=bool)))
    if res.status != OPTIMAL:
        return np.zeros(dim), 0.0
    z, t = res.x[:dim], float(res.x[dim])
    norm = float(np.linalg.norm(z))
    if t <= INTERIOR_WITNESS_TOL or norm < 1e-12:
        return np.zeros(dim), min(t, 0.0)
    return z / norm, t / norm


@dataclass(frozen=True)
class Problem:
    """A robust vector optimization instance; see the module docstring."""

    objective: Objective
    ordering_cone: Cone
    constraint_cone: Cone
    region: PolyhedralSet
    scenarios: ScenarioMap
    direction: np.ndarray | None = None
    fan_override: Fan | None = None

    def __post_init__(self):
        obj, k_cone, c_cone = self.objective, self.ordering_cone, self.constraint_cone
        n = obj.domain_dim
        if self.region.dim != n:
            raise ValidationError("s: dimension differs from the objective domain")
        if self.scenarios.domain_dim != n:
            raise ValidationError("scenarios: domain dimension differs from the objective")
        if k_cone.dim != obj.image_dim:
            raise ValidationError("k: dimension differs from the objective image")
        if c_cone.dim != self.scenarios.image_dim:
            raise ValidationError("c: dimension differs from the scenario image")
        if k_cone.kind == RAYS:
            raise ValidationError("k: ordering cone needs an orthant or halfspace "
                                  "representation")
        if c_cone.kind == RAYS and c_cone.gens.shape[0] == 0:
            raise ValidationError("c: constraint cone must differ from {0}")
        if self.fan_override is not None:
            fan = self.fan_override
            if fan.domain_dim != n or fan.image_dim != c_cone.dim:
                raise ValidationError("fan: bundle shape does not match the instance")

        witness, margin = interior_witness(k_cone)
        if margin <= INTERIOR_WITNESS_TOL:
            raise ValidationError("k: ordering cone has empty interior")
        if self.direction is None:
            object.__setattr__(self, "direction", witness)
        else:
            e = np.asarray(self.direction, dtype=float).ravel()
            if e.size != k_cone.dim:
                raise ValidationError("e: dimension differs from the ordering cone")
            if np.linalg.norm(e) > 1.0 + 1e-9:
                raise ValidationError("e: must lie in the unit ball")
            if not k_cone.interior_contains(e, margin=1e-9):
                raise ValidationError("e: must lie in the interior of k")
            object.__setattr__(self, "direction", e)

    # ----- convenience ----------------------------------------------------

    @property
    def domain_dim(self) -> int:
        return self.objective.domain_dim

    def merit(self, x) -> float:
        return self.scenarios.merit(self.constraint_cone, x)

    def merit_many(self, points) -> np.ndarray:
        return self.scenarios.merit_many(self.constraint_cone, points)

    def feasible(self, x, tol: float = 1e-9) -> bool:
        """Membership in Solv = region  intersect  {merit <= tol}."""
        return self.region.contains(x, tol=tol) and self.merit(x) <= tol

    def fan(self) -> Fan:
        return self.fan_override if self.fan_override is not None \
            else fan_from_scenarios(self.scenarios)

    def with_region(self, region: PolyhedralSet) -> "Problem":
        return replace(self, region=region)
