"""chi-active indexing data of the Theta-stratification, shifted characters and degree constraints."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import floor

import sympy

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.fans import Cone, Fan, PointOutsideFanError, build_sigma_X, minimal_cone_containing
from thetastrat.linalg import Matrix, Vector
from thetastrat.quadforms import (
    Enclosure,
    WeightedRep,
    ch2_form,
    dagger,
    dual_norm_sq,
    in_image,
    kernel_projector,
    norm_sq,
    normalized_norm,
    operator_norm,
    phi_of,
    pseudoinverse,
    require_norm,
    sqrt_bounds,
)
from thetastrat.rootdata import RootDatum, coxeter_H

logger = logging.getLogger("thetastrat.strata")

INTEGRALITY = "integrality"
PROJECTION = "projection"
DEGREE_BOUND = "degree_bound"
MAX_SCAN_POINTS = 2_000_000


class EnumerationError(MathPreconditionError):
    """Raised when the lattice scan for indexing data would be unbounded or inconsistent."""


class NonInvariantCharacterError(MathPreconditionError):
    """Raised when a character that must be Weyl-invariant is not."""


@dataclass(frozen=True)
class StrataProblem:
    """Fixed data ``(G, V, X, b, chi)`` of a stratification problem."""

    datum: RootDatum
    v: WeightedRep
    x: WeightedRep
    b: Matrix
    chi: Vector

    def __post_init__(self) -> None:
        require_norm(self.b)
        if len(self.chi) != self.datum.rank:
            raise MathPreconditionError("chi must have one entry per coordinate of M.")
        if not self.datum.is_weyl_invariant_character(self.chi):
            raise NonInvariantCharacterError("chi must be Weyl-invariant (vanish on every simple coroot).")

    @property
    def rank(self) -> int:
        return self.datum.rank

    @cached_property
    def f_v(self) -> Matrix:
        return ch2_form(self.v, self.rank)

    @cached_property
    def phi_v(self) -> Matrix:
        return phi_of(self.f_v, self.b)

    @cached_property
    def phi_plus(self) -> Matrix:
        return pseudoinverse(self.phi_v, self.b)

    @cached_property
    def kernel_basis(self) -> list[Vector]:
        return linalg.nullspace(self.phi_v, self.rank)

    @cached_property
    def kernel_projector(self) -> Matrix:
        return kernel_projector(self.phi_v, self.b)

    @cached_property
    def center_projector(self) -> Matrix:
        return linalg.b_projector(self.datum.central_basis, self.b)

    @cached_property
    def chi_dagger(self) -> Vector:
        return dagger(self.chi, self.b)

    @cached_property
    def fan(self) -> Fan:
        return build_sigma_X(self.datum, self.x.weights)

    @cached_property
    def coxeter_number(self) -> int:
        return coxeter_H(self.datum)

    @cached_property
    def phi_plus_norm(self) -> Enclosure:
        return operator_norm(self.phi_plus, self.b)

    def v_norm_sq(self, d: Vector) -> Fraction:
        return linalg.bilinear(self.f_v, d, d)

    def v_pairing(self, u: Vector, w: Vector) -> Fraction:
        return linalg.bilinear(self.f_v, u, w)

    def target(self, d: Vector) -> Vector:
        """``phi_V(d) + chi^dagger``."""
        return linalg.add(linalg.matvec(self.phi_v, d), self.chi_dagger)

    def with_chi(self, chi: Vector) -> "StrataProblem":
        return StrataProblem(self.datum, self.v, self.x, self.b, chi)


@dataclass(frozen=True, slots=True)
class LeviData:
    simple_indices: tuple[int, ...]
    roots: tuple[Vector, ...]
    fixed_weights: WeightedRep

    def to_json(self) -> dict[str, object]:
        return {
            "simpleIndices": list(self.simple_indices),
            "rootCount": len(self.roots),
            "fixedWeights": self.fixed_weights.to_json(),
        }


@dataclass(frozen=True, slots=True)
class IndexingDatum:
    d: Vector
    lam: Vector
    mu_squared: Fraction
    cone_id: int
    levi: LeviData

    @property
    def is_semistable(self) -> bool:
        return linalg.is_zero(self.lam)

    def sort_key(self) -> tuple[object, ...]:
        return (-self.mu_squared, self.d, self.lam)


@dataclass(frozen=True, slots=True)
class ActivityVerdict:
    active: bool
    violations: tuple[str, ...]
    cone_id: int | None = None


def levi_data(problem: StrataProblem, lam: Vector) -> LeviData:
    datum = problem.datum
    simple = tuple(j for j in range(datum.semisimple_rank) if linalg.dot(lam, datum.roots[j]) == 0)
    roots = tuple(alpha for alpha in datum.all_roots if linalg.dot(lam, alpha) == 0)
    fixed = problem.x.restrict(lambda w: linalg.dot(lam, w) == 0)
    return LeviData(simple, roots, fixed)


def integrality_holds(problem: StrataProblem, d: Vector, lam: Vector) -> bool:
    """``d`` is ``W_lambda``-invariant and pairs integrally with the characters of ``P_lambda``."""
    datum = problem.datum
    levi = [j for j in range(datum.semisimple_rank) if linalg.dot(lam, datum.roots[j]) == 0]
    if any(linalg.dot(d, datum.roots[j]) != 0 for j in levi):
        return False
    return linalg.in_lattice_plus_span(d, [datum.coroots[j] for j in levi])


def _minimal_cone(problem: StrataProblem, lam: Vector) -> Cone | None:
    try:
        return minimal_cone_containing(problem.fan, lam)
    except PointOutsideFanError:
        return None


def is_chi_active(problem: StrataProblem, d: Vector, lam: Vector) -> ActivityVerdict:
    violations: list[str] = []
    if not integrality_holds(problem, d, lam):
        violations.append(INTEGRALITY)
    cone = _minimal_cone(problem, lam)
    if cone is None or linalg.project(cone.span_basis, problem.b, problem.target(d)) != tuple(lam):
        violations.append(PROJECTION)
    u = linalg.sub(problem.chi_dagger, lam)
    d_sq = problem.v_norm_sq(d)
    if not in_image(problem.phi_v, u):
        if d_sq != 0:
            violations.append(DEGREE_BOUND)
    elif d_sq > linalg.bilinear(problem.b, u, linalg.matvec(problem.phi_plus, u)):
        violations.append(DEGREE_BOUND)
    return ActivityVerdict(not violations, tuple(violations), None if cone is None else cone.cone_id)


def indexing_datum(problem: StrataProblem, d: Vector, lam: Vector) -> IndexingDatum:
    verdict = is_chi_active(problem, d, lam)
    if not verdict.active:
        raise MathPreconditionError(f"(d, lambda) is not chi-active: {', '.join(verdict.violations)}.")
    return IndexingDatum(tuple(d), tuple(lam), norm_sq(lam, problem.b), verdict.cone_id or 0, levi_data(problem, lam))


@dataclass(frozen=True, slots=True)
class ScanBox:
    radius_squared: Fraction
    bounds: tuple[int, ...]
    denominator: int

    @property
    def size(self) -> int:
        total = 1
        for bound in self.bounds:
            total *= 2 * bound + 1
        return total


def _upper_sqrt(value: Fraction) -> Fraction:
    return sqrt_bounds(max(value, Fraction(0)))[1]


def scan_box(problem: StrataProblem, gamma: Fraction, d_ker: Vector) -> ScanBox:
    """Coordinate box for ``(1/H) N`` containing every ``d'`` with ``||d'||_V^2 <= R^2``.

    ``R^2 = ||phi^+|| (||chi||_b + gamma)^2``; the positive definite form
    ``(·,·)_V + ||P_ker ·||_b^2`` bounds each coordinate.
    """
    chi_norm = _upper_sqrt(dual_norm_sq(problem.chi, problem.b))
    radius_sq = problem.phi_plus_norm.hi * (chi_norm + gamma) ** 2
    p_ker = problem.kernel_projector
    q = linalg.mat_add(problem.f_v, linalg.matmul(linalg.matmul(linalg.transpose(p_ker), problem.b), p_ker))
    q_inverse = linalg.inverse(q)
    total = radius_sq + norm_sq(d_ker, problem.b)
    h = problem.coxeter_number
    bounds = tuple(int(floor(_upper_sqrt(total * q_inverse[k][k]) * h)) + 1 for k in range(problem.rank))
    return ScanBox(radius_sq, bounds, h)


def _expected_kernel_part(problem: StrataProblem, central_part: Vector, d_ker: Vector | None) -> Vector:
    kernel = problem.kernel_basis
    if d_ker is not None:
        d_ker = tuple(d_ker)
        if not linalg.is_zero(linalg.matvec(problem.phi_v, d_ker)):
            raise EnumerationError("d_ker must lie in the kernel of phi_V.")
    kernel_is_central = all(problem.datum.is_central(k) for k in kernel)
    if kernel_is_central:
        implied = linalg.matvec(problem.kernel_projector, central_part)
        if d_ker is not None and d_ker != implied:
            raise EnumerationError("d_ker disagrees with the kernel part of the central degree.")
        return implied
    if d_ker is None:
        raise EnumerationError("ker phi_V has non-central directions, so d_ker must be fixed to bound the scan.")
    return d_ker


def _candidates_for(problem: StrataProblem, d: Vector, gamma_sq: Fraction) -> list[IndexingDatum]:
    found = []
    target = problem.target(d)
    for cone in problem.fan:
        lam = linalg.project(cone.span_basis, problem.b, target)
        if not cone.in_relative_interior(lam):
            continue
        mu_sq = norm_sq(lam, problem.b)
        if mu_sq > gamma_sq:
            continue
        if is_chi_active(problem, d, lam).active:
            found.append(IndexingDatum(d, lam, mu_sq, cone.cone_id, levi_data(problem, lam)))
    return found


def enumerate_chi_active(
    problem: StrataProblem,
    central_part: Vector,
    gamma: Fraction,
    d_ker: Vector | None = None,
    *,
    threads: int = 1,
) -> list[IndexingDatum]:
    """All chi-active ``(d', lambda)`` with ``mu <= gamma`` and the given central part."""
    gamma = Fraction(gamma)
    if gamma < 0:
        raise EnumerationError("gamma must be nonnegative.")
    central_part = tuple(central_part)
    if not problem.datum.is_central(central_part):
        raise EnumerationError("The central part must lie in N^W.")
    kernel_part = _expected_kernel_part(problem, central_part, d_ker)
    box = scan_box(problem, gamma, kernel_part)
    if box.size > MAX_SCAN_POINTS:
        raise EnumerationError(f"Scan box has {box.size} points, above the limit of {MAX_SCAN_POINTS}.")
    logger.debug("Scanning %d lattice points with radius^2 %s", box.size, box.radius_squared)
    h = box.denominator

    def admissible(point: tuple[int, ...]) -> Vector | None:
        d = tuple(Fraction(k, h) for k in point)
        if linalg.matvec(problem.center_projector, d) != central_part:
            return None
        if linalg.matvec(problem.kernel_projector, d) != kernel_part:
            return None
        if problem.v_norm_sq(d) > box.radius_squared:
            return None
        return d

    points = itertools.product(*(range(-bound, bound + 1) for bound in box.bounds))
    degrees = [d for d in map(admissible, points) if d is not None]
    gamma_sq = gamma * gamma
    if threads > 1 and len(degrees) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(lambda d: _candidates_for(problem, d, gamma_sq), degrees))
    else:
        batches = [_candidates_for(problem, d, gamma_sq) for d in degrees]
    data = sorted({(item.d, item.lam): item for batch in batches for item in batch}.values(),
                  key=IndexingDatum.sort_key)
    logger.info("Found %d chi-active data among %d degrees", len(data), len(degrees))
    return data


@dataclass(frozen=True, slots=True)
class ShiftedCharacter:
    """``chi'(w) = <w, chi> - coefficient (lambda, w)_b / (lambda, lambda)_b``, kept exact."""

    chi: Vector
    coefficient: Fraction
    lam: Vector
    lam_norm_sq: Fraction
    b: Matrix

    def evaluate(self, w: Vector) -> Fraction:
        return linalg.dot(w, self.chi) - self.coefficient * linalg.bilinear(self.b, self.lam, w) / self.lam_norm_sq

    def as_vector(self) -> Vector:
        return linalg.sub(self.chi, linalg.scale(self.coefficient / self.lam_norm_sq, linalg.matvec(self.b, self.lam)))

    @property
    def mu_squared(self) -> Fraction:
        """``mu(f_canon)^2``; the shift is by ``mu (lambda_hat, -)_b``."""
        return self.coefficient * self.coefficient / self.lam_norm_sq


def shifted_character(problem: StrataProblem, lam: Vector, d: Vector) -> ShiftedCharacter:
    if linalg.is_zero(lam):
        raise MathPreconditionError("The shifted character needs a nonzero lambda.")
    coefficient = problem.v_pairing(lam, d) + linalg.dot(lam, problem.chi)
    return ShiftedCharacter(tuple(problem.chi), coefficient, tuple(lam), norm_sq(lam, problem.b), problem.b)


def graded_ss_violation(
    problem: StrataProblem,
    lam_prime: Vector,
    d_prime: Vector,
    lam: Vector,
    d: Vector,
) -> Fraction:
    """``(lambda', d')_V + chi'(lambda')`` for the character shifted by ``(lambda, d)``.

    A positive value means ``lambda'`` destabilizes on the center of ``L_lambda``.
    """
    shifted = shifted_character(problem, lam, d)
    return problem.v_pairing(lam_prime, d_prime) + shifted.evaluate(lam_prime)


def graded_center_defect(problem: StrataProblem, item: IndexingDatum) -> Fraction:
    """``||proj_{Y_lambda}(phi_V d + chi^dagger)||_b^2 - mu^2``, zero for every active datum."""
    datum = problem.datum
    equations = [datum.roots[j] for j in item.levi.simple_indices]
    equations += [beta for beta in problem.x.weights if linalg.dot(item.lam, beta) == 0]
    y_basis = linalg.nullspace(equations, problem.rank)
    projection = linalg.project(y_basis, problem.b, problem.target(item.d))
    return norm_sq(projection, problem.b) - item.mu_squared


@dataclass(frozen=True, slots=True)
class EmptinessVerdict:
    verdict: str
    branch: str
    d_norm_sq: Fraction
    chi_norm_sq: Fraction


def semistable_empty_bound(problem: StrataProblem, d: Vector) -> EmptinessVerdict:
    """Emptiness of the semistable locus in degree ``d`` using the norm that makes ``phi_V`` idempotent."""
    b_v = normalized_norm(problem.b, problem.f_v)
    chi_dagger = dagger(problem.chi, b_v)
    chi_sq = linalg.bilinear(problem.f_v, chi_dagger, chi_dagger)
    d_sq = problem.v_norm_sq(d)
    kernel_in_ker_chi = all(linalg.dot(k, problem.chi) == 0 for k in problem.kernel_basis)
    if kernel_in_ker_chi:
        empty = d_sq > chi_sq
        branch = "kernel_in_ker_chi"
    else:
        empty = d_sq > 0
        branch = "kernel_not_in_ker_chi"
    return EmptinessVerdict("empty" if empty else "maybe_nonempty", branch, d_sq, chi_sq)


def central_character_obstruction(problem: StrataProblem, d: Vector) -> bool:
    """True when ``(d, -)_V + chi`` is nonzero on cocharacters of the center acting trivially on X."""
    equations = [*problem.datum.roots, *problem.x.weights]
    trivial_center = linalg.nullspace(equations, problem.rank)
    return any(problem.v_pairing(d, w) + linalg.dot(w, problem.chi) != 0 for w in trivial_center)


def torus_semistability_bound(problem: StrataProblem, d: Vector) -> bool:
    """``||d||_V^2 + <d, chi> <= 0``, necessary for a semistable map when G is a torus."""
    if problem.datum.semisimple_rank:
        raise MathPreconditionError("The torus semistability bound only applies when G is a torus.")
    return problem.v_norm_sq(d) + linalg.dot(d, problem.chi) <= 0


@dataclass(frozen=True, slots=True)
class Destabilizer:
    lam: Vector
    cone_id: int
    ratio_squared: Fraction


@dataclass(frozen=True, slots=True)
class DestabilizerList:
    items: tuple[Destabilizer, ...]
    m_squared: Fraction | None


def git_max_destabilizers(problem: StrataProblem, psi: Vector) -> DestabilizerList:
    """Projections of ``psi^dagger`` onto cone spans that sit in their cone and pair positively with ``psi``."""
    psi = tuple(psi)
    if linalg.is_zero(psi):
        raise MathPreconditionError("git_max_destabilizers needs a nonzero character.")
    psi_dagger = dagger(psi, problem.b)
    psi_sq = dual_norm_sq(psi, problem.b)
    found: dict[Vector, Destabilizer] = {}
    for cone in problem.fan:
        lam = linalg.project(cone.span_basis, problem.b, psi_dagger)
        if linalg.is_zero(lam) or not cone.in_relative_interior(lam) or linalg.dot(lam, psi) <= 0:
            continue
        found.setdefault(lam, Destabilizer(lam, cone.cone_id, norm_sq(lam, problem.b) / psi_sq))
    items = tuple(sorted(found.values(), key=lambda item: (item.ratio_squared, item.lam)))
    m_sq = min((item.ratio_squared for item in items), default=None)
    return DestabilizerList(items, m_sq)


@dataclass(frozen=True, slots=True)
class ThresholdReport:
    threshold: sympy.Expr
    chi_norm: sympy.Expr
    m_squared: Fraction
    exceeded: bool
    degree_constraint_holds: bool

    def to_json(self) -> dict[str, object]:
        return {
            "threshold": str(self.threshold),
            "thresholdFloat": float(self.threshold),
            "chiNorm": str(self.chi_norm),
            "mSquared": str(self.m_squared),
            "exceeded": self.exceeded,
            "degreeConstraint": "<d, chi> <= 0",
            "degreeConstraintHolds": self.degree_constraint_holds,
        }


def _sqrt(value: Fraction) -> sympy.Expr:
    return sympy.sqrt(sympy.Rational(value.numerator, value.denominator))


def _is_greater(a: sympy.Expr, b: sympy.Expr) -> bool:
    difference = sympy.nsimplify(a - b)
    verdict = difference.is_positive
    if verdict is None:
        verdict = bool(difference.evalf(60) > 0)
    return bool(verdict)


def generic_ss_threshold(problem: StrataProblem, d: Vector) -> ThresholdReport:
    """``||(1 - phi_V) d||_b / m + ||d||_b / m^2`` with ``m = m_chi``."""
    d = tuple(d)
    destabilizers = git_max_destabilizers(problem, problem.chi)
    if destabilizers.m_squared is None:
        raise MathPreconditionError("chi has no maximal destabilizers, so m_chi is undefined.")
    m = _sqrt(destabilizers.m_squared)
    residual = linalg.sub(d, linalg.matvec(problem.phi_v, d))
    threshold = _sqrt(norm_sq(residual, problem.b)) / m + _sqrt(norm_sq(d, problem.b)) / m**2
    chi_norm = _sqrt(dual_norm_sq(problem.chi, problem.b))
    exceeded = _is_greater(chi_norm, threshold)
    return ThresholdReport(
        threshold=sympy.simplify(threshold),
        chi_norm=chi_norm,
        m_squared=destabilizers.m_squared,
        exceeded=exceeded,
        degree_constraint_holds=linalg.dot(d, problem.chi) <= 0,
    )


@dataclass(frozen=True, slots=True)
class StratumReport:
    datum: IndexingDatum
    shifted: ShiftedCharacter | None
    center_basis: tuple[Vector, ...]
    label: str = "candidate"

    def to_json(self) -> dict[str, object]:
        item = self.datum
        payload: dict[str, object] = {
            "d": [str(x) for x in item.d],
            "lambda": [str(x) for x in item.lam],
            "muSquared": str(item.mu_squared),
            "muFloat": float(item.mu_squared) ** 0.5,
            "coneId": item.cone_id,
            "levi": item.levi.to_json(),
            "center": [[str(x) for x in w] for w in self.center_basis],
            "label": self.label,
            "status": "candidate",
        }
        if self.shifted is not None:
            payload["shiftedCharacter"] = {
                "coefficient": str(self.shifted.coefficient),
                "vector": [str(x) for x in self.shifted.as_vector()],
            }
        return payload


def stratum_report(problem: StrataProblem, item: IndexingDatum) -> StratumReport:
    """Describe a stratum: its shifted character and a basis of ``X_*(Z(L_lambda))_Q``."""
    roots = [problem.datum.roots[j] for j in item.levi.simple_indices]
    center = tuple(linalg.nullspace(roots, problem.rank))
    shifted = None if item.is_semistable else shifted_character(problem, item.lam, item.d)
    return StratumReport(item, shifted, center, "semistable" if item.is_semistable else "unstable")


__all__ = [
    "ActivityVerdict",
    "DEGREE_BOUND",
    "Destabilizer",
    "DestabilizerList",
    "EmptinessVerdict",
    "EnumerationError",
    "INTEGRALITY",
    "IndexingDatum",
    "LeviData",
    "NonInvariantCharacterError",
    "PROJECTION",
    "ScanBox",
    "ShiftedCharacter",
    "StrataProblem",
    "StratumReport",
    "ThresholdReport",
    "coxeter_H",
    "central_character_obstruction",
    "enumerate_chi_active",
    "generic_ss_threshold",
    "git_max_destabilizers",
    "graded_center_defect",
    "graded_ss_violation",
    "indexing_datum",
    "integrality_holds",
    "is_chi_active",
    "levi_data",
    "scan_box",
    "semistable_empty_bound",
    "shifted_character",
    "stratum_report",
    "torus_semistability_bound",
]
