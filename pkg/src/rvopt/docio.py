"""Problem documents: a versioned JSON format with field-path validation.

A document carries the instance dimensions, the objective, both cones, the
region, the scenario list, and optionally an interior direction, a fan
override, and a tolerances section.  Loading validates into a Problem;
serializing an equivalent document back is loss-free, so load, serialize,
load is field-identical.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .cones import Cone
from .errors import ValidationError
from .firstorder import AffineObjective, Fan, PolyhedralSet, QuadraticObjective
from .problem import Problem
from .scenarios import ScenarioMap

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    """Numeric slack used by the report pipeline; scaled uniformly by the
    command line's --tol-scale."""

    feasibility: float = 1e-9
    lp: float = 1e-8
    active: float = 1e-7

    def scaled(self, factor: float) -> "Tolerances":
        if factor <= 0.0:
            raise ValidationError("tolerances: scale factor must be positive")
        return replace(self, feasibility=self.feasibility * factor,
                       lp=self.lp * factor, active=self.active * factor)


def _require(doc: dict, field: str, path: str = ""):
    label = f"{path}.{field}" if path else field
    if field not in doc:
        raise ValidationError(f"{label}: required")
    return doc[field]


def _number_list(value, label: str) -> list:
    if not isinstance(value, list):
        raise ValidationError(f"{label}: expected a list of numbers")
    out = []
    for i, entry in enumerate(value):
        if entry is None or isinstance(entry, bool) \
                or not isinstance(entry, (int, float)):
            raise ValidationError(f"{label}[{i}]: expected a number")
        out.append(float(entry))
    return out


def _matrix(value, label: str) -> list:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{label}: expected a nonempty list of rows")
    rows = [_number_list(row, f"{label}[{i}]") for i, row in enumerate(value)]
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValidationError(f"{label}: rows have unequal lengths")
    return rows


def _cone_from_document(doc, label: str) -> Cone:
    if not isinstance(doc, dict):
        raise ValidationError(f"{label}: expected an object")
    kind = _require(doc, "kind", label)
    if kind == "orthant":
        dim = _require(doc, "dim", label)
        return Cone.orthant(int(dim))
    if kind == "halfspaces":
        dim = int(_require(doc, "dim", label))
        rows = _require(doc, "rows", label)
        if rows == []:
            return Cone.whole_space(dim)
        rows = _matrix(rows, f"{label}.rows")
        if len(rows[0]) != dim:
            raise ValidationError(f"{label}.rows: width differs from dim")
        return Cone.halfspaces(rows)
    if kind == "rays":
        dim = int(_require(doc, "dim", label))
        gens = _require(doc, "gens", label)
        if gens == []:
            return Cone.rays([], dim=dim)
        gens = _matrix(gens, f"{label}.gens")
        if len(gens[0]) != dim:
            raise ValidationError(f"{label}.gens: width differs from dim")
        return Cone.rays(gens)
    raise ValidationError(f"{label}.kind: unknown cone kind {kind!r}")


def _objective_from_document(doc) -> AffineObjective | QuadraticObjective:
    if not isinstance(doc, dict):
        raise ValidationError("objective: expected an object")
    kind = _require(doc, "kind", "objective")
    if kind == "affine":
        jac = _matrix(_require(doc, "J", "objective"), "objective.J")
        off = _number_list(_require(doc, "c", "objective"), "objective.c")
        if len(off) != len(jac):
            raise ValidationError("objective.c: length differs from the row "
                                  "count of objective.J")
        return AffineObjective(np.array(jac), np.array(off))
    if kind == "quadratic":
        comps = _require(doc, "components", "objective")
        if not isinstance(comps, list) or not comps:
            raise ValidationError("objective.components: expected a nonempty list")
        quads, lins, consts = [], [], []
        for k, comp in enumerate(comps):
            label = f"objective.components[{k}]"
            quads.append(_matrix(_require(comp, "Q", label), f"{label}.Q"))
            lins.append(_number_list(_require(comp, "j", label), f"{label}.j"))
            const = _require(comp, "c", label)
            if isinstance(const, bool) or not isinstance(const, (int, float)):
                raise ValidationError(f"{label}.c: expected a number")
            consts.append(float(const))
        return QuadraticObjective(np.array(quads), np.array(lins),
                                  np.array(consts))
    raise ValidationError(f"objective.kind: unknown objective kind {kind!r}")


def _region_from_document(doc) -> PolyhedralSet:
    if not isinstance(doc, dict):
        raise ValidationError("s: expected an object")
    kind = _require(doc, "kind", "s")
    if kind == "box":
        lo = _require(doc, "lo", "s")
        hi = _require(doc, "hi", "s")
        if not isinstance(lo, list) or not isinstance(hi, list) \
                or len(lo) != len(hi) or not lo:
            raise ValidationError("s: lo and hi must be equal-length lists")

        def side(values, label, fill):
            out = []
            for i, v in enumerate(values):
                if v is None:
                    out.append(fill)
                elif isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ValidationError(f"s.{label}[{i}]: expected a number "
                                          "or null")
                else:
                    out.append(float(v))
            return out

        return PolyhedralSet.box(side(lo, "lo", -np.inf), side(hi, "hi", np.inf))
    if kind == "halfspaces":
        mat = _matrix(_require(doc, "A", "s"), "s.A")
        rhs = _number_list(_require(doc, "b", "s"), "s.b")
        if len(rhs) != len(mat):
            raise ValidationError("s.b: length differs from the row count of s.A")
        return PolyhedralSet.halfspaces(np.array(mat), np.array(rhs))
    raise ValidationError(f"s.kind: unknown set kind {kind!r}")


def _scenarios_from_document(doc) -> ScenarioMap:
    if not isinstance(doc, list) or not doc:
        raise ValidationError("scenarios: expected a nonempty list")
    mats, offs = [], []
    for w, entry in enumerate(doc):
        label = f"scenarios[{w}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{label}: expected an object")
        mats.append(_matrix(_require(entry, "A", label), f"{label}.A"))
        offs.append(_number_list(_require(entry, "b", label), f"{label}.b"))
        if len(offs[-1]) != len(mats[-1]):
            raise ValidationError(f"{label}.b: length differs from the row "
                                  f"count of {label}.A")
    widths = {len(m[0]) for m in mats}
    heights = {len(m) for m in mats}
    if len(widths) > 1 or len(heights) > 1:
        raise ValidationError("scenarios: maps have inconsistent shapes")
    return ScenarioMap(mats=[np.array(m) for m in mats],
                       offsets=[np.array(b) for b in offs])


def problem_from_document(doc: dict) -> Problem:
    """Validate a parsed document into a Problem.  Raises ValidationError
    with a field path on the first offending field."""
    if not isinstance(doc, dict):
        raise ValidationError("document: expected a top-level object")
    version = _require(doc, "version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"version: unsupported version {version!r}")
    for field in ("n", "m", "p"):
        value = _require(doc, field)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ValidationError(f"{field}: expected a positive integer")

    objective = _objective_from_document(_require(doc, "objective"))
    k_cone = _cone_from_document(_require(doc, "k"), "k")
    c_cone = _cone_from_document(_require(doc, "c"), "c")
    region = _region_from_document(_require(doc, "s"))
    scenarios = _scenarios_from_document(_require(doc, "scenarios"))

    if objective.domain_dim != doc["n"]:
        raise ValidationError("n: does not match the objective block")
    if objective.image_dim != doc["m"]:
        raise ValidationError("m: does not match the objective block")
    if scenarios.image_dim != doc["p"]:
        raise ValidationError("p: does not match the scenario block")

    direction = None
    if doc.get("e") is not None:
        direction = np.array(_number_list(doc["e"], "e"))
    fan = None
    if doc.get("fan") is not None:
        fan_doc = doc["fan"]
        if not isinstance(fan_doc, dict) or "bundle" not in fan_doc:
            raise ValidationError("fan: expected an object with a bundle field")
        bundle = [_matrix(mat, f"fan.bundle[{i}]")
                  for i, mat in enumerate(fan_doc["bundle"])]
        fan = Fan(np.array(bundle))
    return Problem(objective=objective, ordering_cone=k_cone,
                   constraint_cone=c_cone, region=region, scenarios=scenarios,
                   direction=direction, fan_override=fan)


def tolerances_from_document(doc: dict) -> Tolerances:
    section = doc.get("tolerances") if isinstance(doc, dict) else None
    if section is None:
        return Tolerances()
    if not isinstance(section, dict):
        raise ValidationError("tolerances: expected an object")
    known = {"feasibility", "lp", "active"}
    for key in section:
        if key not in known:
            raise ValidationError(f"tolerances.{key}: unknown field")
        value = section[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) \
                or value <= 0.0:
            raise ValidationError(f"tolerances.{key}: expected a positive number")
    return Tolerances(**{k: float(v) for k, v in section.items()})


def problem_to_document(problem: Problem,
                        tolerances: Tolerances | None = None) -> dict:
    doc = {"version": FORMAT_VERSION,
           "n": problem.domain_dim,
           "m": problem.objective.image_dim,
           "p": problem.scenarios.image_dim,
           "objective": problem.objective.to_document(),
           "k": problem.ordering_cone.to_document(),
           "c": problem.constraint_cone.to_document(),
           "s": problem.region.to_document(),
           "scenarios": problem.scenarios.to_document(),
           "e": problem.direction.tolist()}
    if problem.fan_override is not None:
        doc["fan"] = problem.fan_override.to_document()
    if tolerances is not None:
        doc["tolerances"] = {"feasibility": tolerances.feasibility,
                             "lp": tolerances.lp, "active": tolerances.active}
    return doc


def parse_document(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"parse error at line {exc.lineno}, "
                              f"column {exc.colno}: {exc.msg}") from exc


def load_document(path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_document(handle.read())


def load_problem(path) -> Problem:
    """Read and validate a problem file."""
    return problem_from_document(load_document(path))


def save_problem(problem: Problem, path,
                 tolerances: Tolerances | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(problem_to_document(problem, tolerances), handle, indent=2)
        handle.write("\n")
