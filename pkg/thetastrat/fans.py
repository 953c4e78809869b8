"""Polyhedral cones and the fans cut out by hyperplane arrangements.

Faces of a central arrangement are enumerated as covectors: the cocircuits
(signs of vectors spanning rank-one flats) closed under composition.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.linalg import Matrix, Vector
from thetastrat.rootdata import ParabolicType, RootDatum

logger = logging.getLogger("thetastrat.fans")

SignVector = tuple[int, ...]


class PointOutsideFanError(MathPreconditionError):
    """Raised when a point is not in the support of a fan."""


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class Cone:
    """Closed cone ``Span ∩ {h >= 0}`` generated by ``rays`` plus the lineality space."""

    ambient: int
    span_basis: tuple[Vector, ...]
    span_equations: tuple[Vector, ...]
    halfspaces: tuple[Vector, ...]
    rays: tuple[Vector, ...]
    lineality: tuple[Vector, ...]
    sign_vector: SignVector | None = None
    cone_id: int = 0
    label: str = ""

    @property
    def dimension(self) -> int:
        return len(self.span_basis)

    @property
    def generators(self) -> tuple[Vector, ...]:
        return self.rays + self.lineality + tuple(linalg.scale(-1, v) for v in self.lineality)

    def in_span(self, w: Vector) -> bool:
        return all(linalg.dot(e, w) == 0 for e in self.span_equations)

    def contains(self, w: Vector) -> bool:
        return self.in_span(w) and all(linalg.dot(h, w) >= 0 for h in self.halfspaces)

    def in_relative_interior(self, w: Vector) -> bool:
        return self.in_span(w) and all(linalg.dot(h, w) > 0 for h in self.halfspaces)

    def tight_halfspaces(self, w: Vector) -> tuple[int, ...]:
        return tuple(i for i, h in enumerate(self.halfspaces) if linalg.dot(h, w) == 0)

    def with_id(self, cone_id: int, label: str | None = None) -> "Cone":
        return Cone(
            self.ambient, self.span_basis, self.span_equations, self.halfspaces, self.rays,
            self.lineality, self.sign_vector, cone_id, self.label if label is None else label,
        )

    @classmethod
    def from_generators(
        cls,
        rays: Sequence[Vector],
        lineality: Sequence[Vector],
        ambient: int,
    ) -> "Cone":
        given_lineality = tuple(linalg.row_basis(list(lineality)))
        span_basis = tuple(linalg.row_basis([*given_lineality, *rays]))
        d = len(span_basis)
        equations = tuple(linalg.complement_equations(span_basis, ambient))
        free_rays = [r for r in rays if linalg.rank([*given_lineality, r]) > len(given_lineality)]
        halfspaces: list[Vector] = []
        seen: set[tuple[int, ...]] = set()
        needed = d - 1 - len(given_lineality)
        for subset in itertools.combinations(free_rays, needed) if free_rays and needed >= 0 else ():
            tight = [*given_lineality, *subset]
            if linalg.rank(tight) != d - 1:
                continue
            # functional inside the span vanishing on the tight generators
            coefficients = linalg.nullspace(
                [tuple(linalg.dot(s, g) for s in span_basis) for g in tight], d
            )
            if len(coefficients) != 1:
                continue
            normal = tuple(
                sum((c * s[k] for c, s in zip(coefficients[0], span_basis)), Fraction(0))
                for k in range(ambient)
            )
            values = [linalg.dot(normal, g) for g in free_rays]
            if all(v <= 0 for v in values):
                normal = linalg.scale(-1, normal)
                values = [-v for v in values]
            if any(v < 0 for v in values) or all(v == 0 for v in values):
                continue
            key = linalg.primitive_integer(normal)
            if key not in seen:
                seen.add(key)
                halfspaces.append(linalg.vec(key))
        full_lineality = tuple(linalg.nullspace([*equations, *halfspaces], ambient))
        extreme = [r for r in free_rays if _is_extreme(r, equations, halfspaces, len(full_lineality))]
        return cls(ambient, span_basis, equations, tuple(sorted(halfspaces)), _dedupe_rays(extreme),
                   full_lineality)

    @classmethod
    def from_halfspaces(
        cls,
        equations: Sequence[Vector],
        halfspaces: Sequence[Vector],
        ambient: int,
    ) -> "Cone":
        span_basis = linalg.nullspace(list(equations), ambient)
        lineality = tuple(linalg.nullspace([*equations, *halfspaces], ambient))
        needed = len(span_basis) - len(lineality) - 1
        rays: list[Vector] = []
        for subset in itertools.combinations(halfspaces, needed) if needed >= 0 else ():
            # the lineality vectors act as functionals pinning the ray to their complement
            solutions = linalg.nullspace([*equations, *subset, *lineality], ambient)
            if len(solutions) != 1:
                continue
            ray = solutions[0]
            values = [linalg.dot(h, ray) for h in halfspaces]
            if all(v <= 0 for v in values):
                ray = linalg.scale(-1, ray)
                values = [-v for v in values]
            if any(v < 0 for v in values) or all(v == 0 for v in values):
                continue
            rays.append(ray)
        return cls.from_generators(_dedupe_rays(rays), lineality, ambient)


def _is_extreme(ray: Vector, equations: Sequence[Vector], halfspaces: Sequence[Vector], lineality_dim: int) -> bool:
    if linalg.rank([*linalg.nullspace([*equations, *halfspaces], len(ray)), ray]) == lineality_dim:
        return False
    tight = [h for h in halfspaces if linalg.dot(h, ray) == 0]
    return len(linalg.nullspace([*equations, *tight], len(ray))) == lineality_dim + 1


def _dedupe_rays(rays: Iterable[Vector]) -> tuple[Vector, ...]:
    seen: dict[tuple[int, ...], Vector] = {}
    for ray in rays:
        if linalg.is_zero(ray):
            continue
        seen.setdefault(linalg.primitive_integer(ray), linalg.vec(linalg.primitive_integer(ray)))
    return tuple(sorted(seen.values()))


@dataclass(frozen=True, slots=True)
class Face:
    sign_vector: SignVector
    point: Vector


@dataclass(frozen=True, slots=True)
class Arrangement:
    """Central hyperplane arrangement given by functionals on ``Q^n``."""

    ambient: int
    functionals: tuple[Vector, ...]
    lineality: tuple[Vector, ...] = field(default=())

    def signs(self, w: Vector) -> SignVector:
        return tuple(_sign(linalg.dot(f, w)) for f in self.functionals)


def dedupe_functionals(functionals: Iterable[Vector]) -> tuple[Vector, ...]:
    """Drop zero and parallel functionals, keeping the orientation seen first."""
    kept: list[Vector] = []
    keys: set[tuple[int, ...]] = set()
    for f in functionals:
        if linalg.is_zero(f):
            continue
        key = linalg.primitive_integer(f)
        negative = tuple(-x for x in key)
        if key in keys or negative in keys:
            continue
        keys.add(key)
        kept.append(linalg.vec(key))
    return tuple(kept)


def build_arrangement(functionals: Iterable[Vector], ambient: int) -> Arrangement:
    kept = dedupe_functionals(functionals)
    lineality = tuple(linalg.nullspace(list(kept), ambient))
    return Arrangement(ambient, kept, lineality)


def cocircuits(arrangement: Arrangement) -> list[Face]:
    functionals = arrangement.functionals
    total_rank = linalg.rank(functionals)
    if total_rank == 0:
        return []
    found: dict[SignVector, Face] = {}
    for subset in itertools.combinations(range(len(functionals)), total_rank - 1):
        rows = [functionals[i] for i in subset]
        if linalg.rank(rows) != total_rank - 1:
            continue
        # restrict to the dot-orthogonal complement of the lineality space
        solutions = linalg.nullspace([*rows, *arrangement.lineality], arrangement.ambient)
        if len(solutions) != 1:
            continue
        for point in (solutions[0], linalg.scale(-1, solutions[0])):
            signs = arrangement.signs(point)
            found.setdefault(signs, Face(signs, point))
    return sorted(found.values(), key=lambda face: face.sign_vector)


def _compose(x: Face, y: Face, arrangement: Arrangement) -> Face:
    ratios = [
        abs(linalg.dot(f, x.point)) / (2 * abs(linalg.dot(f, y.point)))
        for f in arrangement.functionals
        if linalg.dot(f, x.point) != 0 and linalg.dot(f, y.point) != 0
    ]
    epsilon = min(ratios, default=Fraction(1))
    point = linalg.add(x.point, linalg.scale(epsilon, y.point))
    return Face(arrangement.signs(point), point)


def arrangement_faces(arrangement: Arrangement) -> list[Face]:
    """Every face of the arrangement, including the lineality face, with an interior point."""
    zero = Face(tuple(0 for _ in arrangement.functionals), linalg.zero_vector(arrangement.ambient))
    faces: dict[SignVector, Face] = {zero.sign_vector: zero}
    for face in cocircuits(arrangement):
        faces.setdefault(face.sign_vector, face)
    frontier = list(faces.values())
    while frontier:
        current = list(faces.values())
        added: list[Face] = []
        for x in current:
            for y in frontier:
                for a, b in ((x, y), (y, x)):
                    signs = tuple(s if s != 0 else t for s, t in zip(a.sign_vector, b.sign_vector))
                    if signs not in faces:
                        composite = _compose(a, b, arrangement)
                        faces[composite.sign_vector] = composite
                        added.append(composite)
        frontier = added
    logger.debug("Arrangement with %d hyperplanes has %d faces", len(arrangement.functionals), len(faces))
    return sorted(faces.values(), key=lambda face: (sum(1 for s in face.sign_vector if s != 0), face.sign_vector))


def face_cone(arrangement: Arrangement, face: Face, rays: Sequence[Face]) -> Cone:
    signs = face.sign_vector
    zero_rows = [f for f, s in zip(arrangement.functionals, signs) if s == 0]
    span_basis = tuple(linalg.nullspace(zero_rows, arrangement.ambient)) if zero_rows \
        else linalg.identity(arrangement.ambient)
    equations = tuple(linalg.complement_equations(span_basis, arrangement.ambient))
    halfspaces = tuple(linalg.scale(s, f) for f, s in zip(arrangement.functionals, signs) if s != 0)
    conformal = tuple(
        r.point for r in rays
        if all(t == 0 or t == s for s, t in zip(signs, r.sign_vector))
    )
    return Cone(
        arrangement.ambient, span_basis, equations, tuple(sorted(dedupe_functionals(halfspaces))),
        _dedupe_rays(conformal), tuple(arrangement.lineality), signs,
    )


@dataclass(frozen=True)
class Fan:
    arrangement: Arrangement
    restricted: tuple[int, ...]
    cones: tuple[Cone, ...]

    def __iter__(self):
        return iter(self.cones)

    def __len__(self) -> int:
        return len(self.cones)

    def cone(self, cone_id: int) -> Cone:
        return self.cones[cone_id]

    def in_support(self, w: Vector) -> bool:
        signs = self.arrangement.signs(w)
        return all(signs[i] >= 0 for i in self.restricted)


def build_fan(functionals: Iterable[Vector], ambient: int, restricted_count: int = 0) -> Fan:
    """Faces of the arrangement whose first ``restricted_count`` functional signs are nonnegative.

    The restricted functionals must come first and stay distinct after deduplication.
    """
    functionals = list(functionals)
    arrangement = build_arrangement(functionals, ambient)
    restricted = tuple(range(len(dedupe_functionals(functionals[:restricted_count]))))
    rays = cocircuits(arrangement)
    faces = [
        face for face in arrangement_faces(arrangement)
        if all(face.sign_vector[i] >= 0 for i in restricted)
    ]
    cones = tuple(
        face_cone(arrangement, face, rays).with_id(index, _label(face.sign_vector))
        for index, face in enumerate(faces)
    )
    return Fan(arrangement, restricted, cones)


def _label(signs: SignVector) -> str:
    return "".join({1: "+", -1: "-", 0: "0"}[s] for s in signs) or "0"


def build_sigma_X(datum: RootDatum, x_weights: Iterable[Vector]) -> Fan:
    """Fan of the X-weight and simple-root arrangement inside the dominant chamber."""
    functionals = [*datum.roots, *x_weights]
    fan = build_fan(functionals, datum.rank, restricted_count=datum.semisimple_rank)
    logger.info("Sigma_X for %s has %d cones", datum.name, len(fan))
    return fan


def minimal_cone_containing(fan: Fan, w: Vector) -> Cone:
    if not fan.in_support(w):
        raise PointOutsideFanError("The point is not dominant, so no cone of the fan contains it.")
    signs = fan.arrangement.signs(w)
    for cone in fan.cones:
        if cone.sign_vector == signs:
            return cone
    raise PointOutsideFanError("No cone of the fan has the sign pattern of the point.")


def project_onto_span(cone: Cone, v: Vector, b: Matrix) -> Vector:
    return linalg.project(cone.span_basis, b, v)


def chamber_cone(datum: RootDatum, parabolic: ParabolicType, kind: str = "sigma") -> Cone:
    """``sigma-bar_P`` (fundamental coweights) or ``tau-bar_P`` (simple coroots) plus the center."""
    indices = sorted(parabolic.indices)
    center = tuple(datum.central_basis)
    if kind == "sigma":
        rays = tuple(datum.fundamental_coweights[j] for j in indices)
        span_basis = tuple(linalg.row_basis([*center, *rays]))
        equations = tuple(datum.roots[j] for j in parabolic.levi_indices)
        halfspaces = tuple(datum.roots[j] for j in indices)
        return Cone(datum.rank, span_basis, equations, halfspaces, _dedupe_rays(rays), center,
                    label=f"sigma{indices}")
    if kind == "tau":
        rays = tuple(datum.coroots[j] for j in indices)
        cone = Cone.from_generators(rays, center, datum.rank)
        return cone.with_id(0, f"tau{indices}")
    raise MathPreconditionError(f"Unknown chamber kind '{kind}'.")


def fan_to_json(fan: Fan) -> list[dict[str, object]]:
    return [
        {
            "id": cone.cone_id,
            "label": cone.label,
            "dimension": cone.dimension,
            "rays": [[str(x) for x in ray] for ray in cone.rays],
            "lineality": [[str(x) for x in v] for v in cone.lineality],
            "halfspaces": [[str(x) for x in h] for h in cone.halfspaces],
        }
        for cone in fan.cones
    ]


__all__ = [
    "Arrangement",
    "Cone",
    "Face",
    "Fan",
    "PointOutsideFanError",
    "arrangement_faces",
    "build_arrangement",
    "build_fan",
    "build_sigma_X",
    "chamber_cone",
    "cocircuits",
    "dedupe_functionals",
    "face_cone",
    "fan_to_json",
    "minimal_cone_containing",
    "project_onto_span",
]
