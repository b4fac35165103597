"""First-order geometry: ambient sets, tangent and normal cones, slopes,
upper subgradient candidates, and matrix-bundle fans.

Tangent cones of polyhedral sets are computed from active constraints at
the reference point; normal cones are their negative duals, generated by
the outward normals of the active constraints.  Descent strength of a
scalar function is estimated by the strong slope, sampled on shrinking
shells and therefore a lower estimate of the true slope.

A fan is a positively homogeneous convex-valued map generated by a matrix
bundle: H(u) = conv{L_1 u, ..., L_p u}.  For finite affine scenario
families the bundle of scenario matrices is an exact outer prederivative
of the constraint map, which ``check_outer_prederivative`` verifies by
sampling.
"""

from dataclasses import dataclass

import numpy as np

from .cones import Cone
from .errors import DimensionError, PreconditionError
from .sampling import ball_points, sphere_directions
from .scenarios import PointCloud, ScenarioMap

ACTIVE_TOL = 1e-7


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


# ===== ambient sets ======================================================


@dataclass(frozen=True)
class PolyhedralSet:
    """A box or a finite intersection of halfspaces {x : a_j . x <= b_j}."""

    kind: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    a: np.ndarray | None = None
    b: np.ndarray | None = None

    @classmethod
    def box(cls, lo, hi) -> "PolyhedralSet":
        lo = np.asarray(lo, dtype=float).ravel()
        hi = np.asarray(hi, dtype=float).ravel()
        if lo.size != hi.size:
            raise DimensionError("box bounds disagree on dimension")
        if np.any(lo > hi):
            raise ValueError("box has lo > hi")
        return cls(kind="box", lo=_readonly(lo), hi=_readonly(hi))

    @classmethod
    def halfspaces(cls, a, b) -> "PolyhedralSet":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if a.shape[0] != b.size:
            raise DimensionError("halfspace matrix and rhs disagree on rows")
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms < 1e-12):
            raise ValueError("halfspace row is zero")
        return cls(kind="halfspaces", a=_readonly(a / norms[:, None]),
                   b=_readonly(b / norms))

    @classmethod
    def whole_space(cls, dim: int) -> "PolyhedralSet":
        return cls.box(np.full(dim, -np.inf), np.full(dim, np.inf))

    @property
    def dim(self) -> int:
        return self.lo.size if self.kind == "box" else self.a.shape[1]

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.dim:
            raise DimensionError(f"expected dim {self.dim}")
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        return bool(np.max(self.a @ x - self.b) <= tol)

    def project(self, x) -> np.ndarray:
        """Euclidean projection; Dykstra sweeps for halfspace intersections."""
        x = np.asarray(x, dtype=float).ravel()
        if self.kind == "box":
            return np.clip(x, self.lo, self.hi)
        from .cones import PROJECTION_BUDGET, PROJECTION_TOL
        from .errors import ConvergenceError
        y = x.copy()
        corrections = np.zeros_like(self.a)
        for _ in range(PROJECTION_BUDGET):
            y_prev = y.copy()
            for j in range(self.a.shape[0]):
                z = y + corrections[j]
                viol = float(self.a[j] @ z - self.b[j])
                proj = z if viol <= 0.0 else z - viol * self.a[j]
                corrections[j] = z - proj
                y = proj
            if np.linalg.norm(y - y_prev) < PROJECTION_TOL:
                return y
        raise ConvergenceError("polyhedral projection did not converge",
                               last_iterate=y,
                               residual=float(np.max(self.a @ y - self.b)))

    def to_document(self) -> dict:
        if self.kind == "box":
            lo = [None if not np.isfinite(v) else float(v) for v in self.lo]
            hi = [None if not np.isfinite(v) else float(v) for v in self.hi]
            return {"kind": "box", "lo": lo, "hi": hi}
        return {"kind": "halfspaces", "A": self.a.tolist(), "b": self.b.tolist()}


def contingent_cone(region: PolyhedralSet, x, tol: float = ACTIVE_TOL) -> Cone:
    """Tangent cone of the region at a member point, as a halfspace cone."""
    x = np.asarray(x, dtype=float).ravel()
    if not region.contains(x, tol=max(tol, 1e-9)):
        raise PreconditionError("tangent cone requested at a non-member point")
    rows = []
    if region.kind == "box":
        for i in range(region.dim):
            e = np.zeros(region.dim)
            if np.isfinite(region.lo[i]) and x[i] <= region.lo[i] + tol:
                e[i] = 1.0
                rows.append(e.copy())
            e[:] = 0.0
            if np.isfinite(region.hi[i]) and x[i] >= region.hi[i] - tol:
                e[i] = -1.0
                rows.append(e.copy())
    else:
        active = region.a @ x - region.b >= -tol
        rows = [-region.a[j] for j in range(region.a.shape[0]) if active[j]]
    if not rows:
        return Cone.whole_space(region.dim)
    return Cone.halfspaces(np.array(rows))


def normal_cone(region: PolyhedralSet, x, tol: float = ACTIVE_TOL) -> Cone:
    """Normal cone at a member point: generated by active outward normals."""
    x = np.asarray(x, dtype=float).ravel()
    if not region.contains(x, tol=max(tol, 1e-9)):
        raise PreconditionError("normal cone requested at a non-member point")
    gens = []
    if region.kind == "box":
        for i in range(region.dim):
            e = np.zeros(region.dim)
            if np.isfinite(region.lo[i]) and x[i] <= region.lo[i] + tol:
                e[i] = -1.0
                gens.append(e.copy())
            e[:] = 0.0
            if np.isfinite(region.hi[i]) and x[i] >= region.hi[i] - tol:
                e[i] = 1.0
                gens.append(e.copy())
    else:
        active = region.a @ x - region.b >= -tol
        gens = [region.a[j] for j in range(region.a.shape[0]) if active[j]]
    return Cone.rays(np.array(gens) if gens else np.zeros((0, region.dim)),
                     dim=region.dim)


# ===== objectives ========================================================


@dataclass(frozen=True)
class AffineObjective:
    """f(x) = jac @ x + offset."""

    jac: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        jac = np.atleast_2d(np.asarray(self.jac, dtype=float))
        offset = np.asarray(self.offset, dtype=float).ravel()
        if offset.size != jac.shape[0]:
            raise DimensionError("offset length must match jacobian rows")
        object.__setattr__(self, "jac", _readonly(jac))
        object.__setattr__(self, "offset", _readonly(offset))

    is_affine = True

    @property
    def domain_dim(self) -> int:
        return self.jac.shape[1]

    @property
    def image_dim(self) -> int:
        return self.jac.shape[0]

    def value(self, x) -> np.ndarray:
        return self.jac @ np.asarray(x, dtype=float).ravel() + self.offset

    def jacobian(self, x) -> np.ndarray:
        del x
        return self.jac

    def directional(self, x, v) -> np.ndarray:
        return self.jac @ np.asarray(v, dtype=float).ravel()

    def to_document(self) -> dict:
        return {"kind": "affine", "J": self.jac.tolist(), "c": self.offset.tolist()}


@dataclass(frozen=True)
class QuadraticObjective:
    """Component k is x.quads[k].x + lins[k].x + consts[k]."""

    quads: np.ndarray
    lins: np.ndarray
    consts: np.ndarray

    def __post_init__(self):
        quads = np.asarray(self.quads, dtype=float)
        if quads.ndim == 2:
            quads = quads[None]
        lins = np.atleast_2d(np.asarray(self.lins, dtype=float))
        consts = np.asarray(self.consts, dtype=float).ravel()
        if quads.shape[1] != quads.shape[2]:
            raise DimensionError("quadratic blocks must be square")
        if lins.shape != quads.shape[:2] or consts.size != quads.shape[0]:
            raise DimensionError("quadratic component shapes disagree")
        object.__setattr__(self, "quads", _readonly(quads))
        object.__setattr__(self, "lins", _readonly(lins))
        object.__setattr__(self, "consts", _readonly(consts))

    is_affine = False

    @property
    def domain_dim(self) -> int:
        return self.quads.shape[1]

    @property
    def image_dim(self) -> int:
        return self.quads.shape[0]

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        return np.einsum("i,kij,j->k", x, self.quads, x) + self.lins @ x + self.consts

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        return 2.0 * np.einsum("kij,j->ki", self.quads, x) + self.lins

    def directional(self, x, v) -> np.ndarray:
        return self.jacobian(x) @ np.asarray(v, dtype=float).ravel()

    def to_document(self) -> dict:
        return {"kind": "quadratic",
                "components": [{"Q": self.quads[k].tolist(),
                                "j": self.lins[k].tolist(),
                                "c": float(self.consts[k])}
                               for k in range(self.image_dim)]}


Objective = AffineObjective | QuadraticObjective


# ===== slopes and upper subgradients =====================================


def strong_slope(phi, region: PolyhedralSet, x, radius: float,
                 dirs_per_shell: int | None = None, shells: int = 6,
                 seed: int = 0) -> float:
    """Sampled strong slope of ``phi`` relative to the region at ``x``.

    Takes the best descent quotient (phi(x) - phi(y)) / |y - x| over
    region-projected points on shells of radius r/2^k.  Clamped at zero,
    so a local minimizer scores 0; sampling makes this a lower estimate
    of the true slope, the safe side for certifying descent constants.
    """
    x = np.asarray(x, dtype=float).ravel()
    if dirs_per_shell is None:
        dirs_per_shell = 64 * x.size
    base = float(phi(x))
    dirs = sphere_directions(x.size, dirs_per_shell, seed=seed)
    best = 0.0
    for k in range(shells):
        rho = radius / 2.0 ** k
        for d in dirs:
            y = region.project(x + rho * d)
            gap = float(np.linalg.norm(y - x))
            if gap < 1e-12:
                continue
            best = max(best, (base - float(phi(y))) / gap)
    return best


def upper_subgradient_candidate(phi, x, step: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient candidate for phi at x."""
    x = np.asarray(x, dtype=float).ravel()
    out = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = step
        out[i] = (float(phi(x + e)) - float(phi(x - e))) / (2.0 * step)
    return out


@dataclass(frozen=True)
class SubgradientCheck:
    passed: bool
    worst_violation: float
    witness: np.ndarray | None


def check_upper_subgradient(phi, x, candidate, eps: float, radius: float,
                            samples: int = 256, seed: int = 0,
                            tol: float = 1e-9) -> SubgradientCheck:
    """Sampled test of the upper-subgradient inequality

        phi(y) <= phi(x) + <candidate, y - x> + eps |y - x|

    over a ball around x.  Failure reports the worst violating point.
    """
    x = np.asarray(x, dtype=float).ravel()
    candidate = np.asarray(candidate, dtype=float).ravel()
    base = float(phi(x))
    worst, witness = 0.0, None
    for y in ball_points(x, radius, samples, seed=seed):
        gap = y - x
        slack = float(phi(y)) - base - float(candidate @ gap) \
            - eps * float(np.linalg.norm(gap))
        if slack > worst:
            worst, witness = slack, y
    return SubgradientCheck(passed=worst <= tol, worst_violation=worst,
                            witness=witness)


# ===== fans ==============================================================


@dataclass(frozen=True)
class Fan:
    """Convex-valued map H(u) = conv{bundle[i] @ u} from a matrix bundle."""

    bundle: np.ndarray

    def __post_init__(self):
        bundle = np.asarray(self.bundle, dtype=float)
        if bundle.ndim == 2:
            bundle = bundle[None]
        if bundle.ndim != 3 or bundle.shape[0] == 0:
            raise DimensionError("fan bundle must be a nonempty (p, m, n) stack")
        object.__setattr__(self, "bundle", _readonly(bundle))

    @property
    def size(self) -> int:
        return self.bundle.shape[0]

    @property
    def image_dim(self) -> int:
        return self.bundle.shape[1]

    @property
    def domain_dim(self) -> int:
        return self.bundle.shape[2]

    def image_vertices(self, u) -> PointCloud:
        u = np.asarray(u, dtype=float).ravel()
        return PointCloud(self.bundle @ u)

    def lipschitz_bound(self) -> float:
        """max_i ||bundle[i]||, by power iteration with Frobenius fallback."""
        return float(max(_operator_norm(mat) for mat in self.bundle))

    def to_document(self) -> dict:
        return {"bundle": self.bundle.tolist()}


def _operator_norm(mat: np.ndarray, tol: float = 1e-10, budget: int = 500) -> float:
    gram = mat.T @ mat
    n = gram.shape[0]
    v = np.ones(n) + 1e-3 * np.arange(n)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(budget):
        w = gram @ v
        norm = float(np.linalg.norm(w))
        if norm < 1e-15:
            return 0.0
        v = w / norm
        val = float(v @ gram @ v)
        if abs(val - prev) <= tol * max(1.0, abs(val)):
            return float(np.sqrt(max(val, 0.0)))
        prev = val
    # certified upper bound when the iteration stalls
    return float(np.linalg.norm(mat, "fro"))


def fan_from_scenarios(scenario_map: ScenarioMap) -> Fan:
    """Bundle of distinct scenario matrices; exact for affine families."""
    mats = []
    for mat in scenario_map.mats:
        if not any(np.array_equal(mat, kept) for kept in mats):
            mats.append(mat)
    return Fan(np.array(mats))


def upper_inverse_cone(fan: Fan, cone: Cone) -> Cone:
    """{v : fan image of v lies inside the cone} = the joint preimage cone."""
    rows = []
    for mat in fan.bundle:
        pre = cone.linear_preimage(mat)
        if pre.kind == "halfspaces" and pre.rows.shape[0]:
            rows.append(pre.rows)
    if not rows:
        return Cone.whole_space(fan.domain_dim)
    return Cone.halfspaces(np.vstack(rows))


def polytope_distance(point, vertices, tol: float = 1e-12,
                      budget: int = 2000) -> float:
    """Distance from a point to conv(vertices).

    Projected-gradient over simplex weights, warm-checked at the vertices
    so that exact vertex hits cost nothing.  Nesterov momentum (restarted
    on oscillation) keeps the iteration fast when near-collinear vertices
    make the Gram matrix singular; a second stop triggers once the hull
    point itself no longer moves.
    """
    point = np.asarray(point, dtype=float).ravel()
    verts = np.atleast_2d(np.asarray(vertices, dtype=float))
    best = float(np.min(np.linalg.norm(verts - point[None, :], axis=1)))
    if best <= tol or verts.shape[0] == 1:
        return best
    gram = verts @ verts.T
    rhs = verts @ point
    step = 1.0 / max(float(np.linalg.norm(gram, 2)), 1e-12)
    lam = np.full(verts.shape[0], 1.0 / verts.shape[0])
    accel, t = lam, 1.0
    for _ in range(budget):
        lam_next = _simplex_project(accel - step * (gram @ accel - rhs))
        if np.linalg.norm(lam_next - lam) < tol \
                or np.linalg.norm((lam_next - lam) @ verts) < tol:
            lam = lam_next
            break
        if float((accel - lam_next) @ (lam_next - lam)) > 0.0:
            accel, t = lam_next, 1.0
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            accel = lam_next + ((t - 1.0) / t_next) * (lam_next - lam)
            t = t_next
        lam = lam_next
    return min(best, float(np.linalg.norm(lam @ verts - point)))


def _simplex_project(y: np.ndarray) -> np.ndarray:
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, y.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(y - theta, 0.0)


@dataclass(frozen=True)
class PrederivativeReport:
    residual: float
    passed: bool
    witness: np.ndarray | None


def check_outer_prederivative(scenario_map: ScenarioMap, x, fan: Fan,
                              eps: float = 0.0, radius: float = 0.5,
                              samples: int = 32, seed: int = 0,
                              tol: float = 1e-9) -> PrederivativeReport:
    """Sampled residual of the outer prederivative inclusion

        G(y)  subset of  G(x) + H(y - x) + eps |y - x| B

    over points y near x.  For affine scenario families with the full
    scenario bundle the residual is exactly zero.
    """
    x = np.asarray(x, dtype=float).ravel()
    base = scenario_map.evaluate(x)
    worst, witness = -np.inf, None
    if radius <= 0.0 or samples <= 0:
        return PrederivativeReport(residual=0.0, passed=True, witness=None)
    for y in ball_points(x, radius, samples, seed=seed):
        u = y - x
        verts = fan.image_vertices(u).points
        gap = 0.0
        for z in scenario_map.evaluate(y).points:
            gap = max(gap, min(polytope_distance(z - q, verts)
                               for q in base.points))
        slack = gap - eps * float(np.linalg.norm(u))
        if slack > worst:
            worst, witness = slack, y
    return PrederivativeReport(residual=worst, passed=worst <= tol,
                               witness=None if worst <= tol else witness)


def sampled_cone_directions(cone: Cone, count: int = 64, seed: int = 0) -> np.ndarray:
    """Nonzero unit directions inside a cone, by projecting a sphere sample.

    Projection catches thin cones that rejection sampling would miss; the
    result may be empty only when the cone is (numerically) {0}.
    """
    dirs = sphere_directions(cone.dim, count, seed=seed)
    out = []
    for d in dirs:
        v = cone.project(d)
        norm = float(np.linalg.norm(v))
        if norm < 1e-9:
            continue
        v = v / norm
        if not any(np.linalg.norm(v - w) < 1e-9 for w in out):
            out.append(v)
    return np.array(out) if out else np.zeros((0, cone.dim))
