"""Teleman-Woodward index and the deformed generating functions for gauged maps."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.linalg import Matrix, Vector
from thetastrat.quadforms import WeightedRep, ch2_form, central_projector, is_positive_definite
from thetastrat.rootdata import RootDatum, coset_representatives
from thetastrat.series import (
    SeriesMatrix,
    FixedPointSolution,
    SeriesRing,
    TruncatedSeries,
    exp_with_phase,
    integer_gate,
    log,
    power,
    solve_fixed_point,
)

logger = logging.getLogger("thetastrat.twindex")


class AdmissibilityError(MathPreconditionError):
    """Raised when ``h' = sigma h + c`` is not a nonsingular integer form."""


class ZSupportLeakError(MathPreconditionError):
    """Raised when the generating function has a z exponent that is not ``h(d, -)`` for a degree d."""


class CalibrationError(RuntimeError):
    """Raised when the sign conventions cannot be pinned down uniquely."""


class WeylSign(str, Enum):
    UNITARY = "unitary"
    LITERAL = "literal"


def half_trace_form(datum: RootDatum) -> Matrix:
    """``c = -1/2 Tr_g = -sum_{alpha > 0} alpha alpha^T``."""
    total = linalg.zero_matrix(datum.rank)
    for alpha in datum.positive_roots:
        total = linalg.mat_sub(total, linalg.outer(alpha, alpha))
    return total


def _components(datum: RootDatum) -> list[list[int]]:
    """Connected components of the Dynkin diagram."""
    l = datum.semisimple_rank
    seen: set[int] = set()
    parts = []
    for start in range(l):
        if start in seen:
            continue
        queue, part = deque([start]), []
        seen.add(start)
        while queue:
            i = queue.popleft()
            part.append(i)
            for j in range(l):
                if j not in seen and datum.cartan[i][j] != 0:
                    seen.add(j)
                    queue.append(j)
        parts.append(sorted(part))
    return parts


def basic_level(datum: RootDatum) -> Matrix:
    """Basic classical level: short coroots of every simple factor have square 2, identity on the center."""
    n = datum.rank
    total = linalg.zero_matrix(n)
    for part in _components(datum):
        span = [datum.roots[j] for j in part]
        roots = [alpha for alpha in datum.all_roots if linalg.rank([*span, alpha]) == len(span)]
        form = ch2_form(WeightedRep.from_weights(roots), n)
        shortest = min(linalg.bilinear(form, datum.coroots[j], datum.coroots[j]) for j in part)
        total = linalg.mat_add(total, linalg.mat_scale(Fraction(2) / shortest, form))
    if datum.central_basis:
        projector = central_projector(datum)
        total = linalg.mat_add(total, linalg.matmul(linalg.transpose(projector), projector))
    return total


@dataclass(frozen=True)
class LevelData:
    """Classical level ``h`` (positive definite) with orientation and Weyl sign conventions."""

    datum: RootDatum
    classical: Matrix
    orientation: int = -1
    weyl_sign: WeylSign = WeylSign.UNITARY

    def __post_init__(self) -> None:
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1.")
        if len(self.classical) != self.datum.rank or not linalg.is_symmetric(self.classical):
            raise AdmissibilityError("The level must be a symmetric form on N.")

    @cached_property
    def c(self) -> Matrix:
        return half_trace_form(self.datum)

    @cached_property
    def h_prime(self) -> Matrix:
        return linalg.mat_add(linalg.mat_scale(self.orientation, self.classical), self.c)

    @property
    def is_integral(self) -> bool:
        return linalg.is_integral(x for row in self.h_prime for x in row)

    @property
    def admissible(self) -> bool:
        """TW-admissible: ``h'`` is a negative definite integer form."""
        return self.is_integral and is_positive_definite(linalg.mat_scale(-1, self.h_prime))

    @cached_property
    def determinant(self) -> Fraction:
        return linalg.det(self.h_prime)

    def require_usable(self) -> None:
        if not self.is_integral:
            raise AdmissibilityError("h' = sigma h + c must be integer valued.")
        if self.determinant == 0:
            raise AdmissibilityError("h' = sigma h + c is singular.")

    def scaled(self, m: int) -> "LevelData":
        return LevelData(self.datum, linalg.mat_scale(m, self.classical), self.orientation, self.weyl_sign)

    def shifted(self, shift: Matrix) -> "LevelData":
        return LevelData(self.datum, linalg.mat_add(self.classical, shift), self.orientation, self.weyl_sign)

    def on(self, datum: RootDatum) -> "LevelData":
        return LevelData(datum, self.classical, self.orientation, self.weyl_sign)

    @cached_property
    def z_basis(self) -> list[Vector]:
        return self.datum.central_lattice_basis

    def degree_exponent(self, d: Vector) -> tuple[Fraction, ...]:
        """``(sigma h(d, z_k))_k``, the z exponent carrying degree ``d``."""
        form = linalg.mat_scale(self.orientation, self.classical)
        return tuple(linalg.bilinear(form, d, z) for z in self.z_basis)

    def degree_of(self, nu: Sequence[int]) -> Vector | None:
        """Degree ``d`` with ``sigma h(d, -) = nu`` on the central lattice, or None when not in H_2(BG)."""
        basis = self.z_basis
        n = self.datum.rank
        if not basis:
            return linalg.zero_vector(n)
        form = linalg.mat_scale(self.orientation, self.classical)
        gram = linalg.gram(basis, form)
        coefficients = linalg.matvec(linalg.inverse(gram), linalg.vec(nu))
        d = linalg.zero_vector(n)
        for a, z in zip(coefficients, basis):
            d = linalg.add(d, linalg.scale(a, z))
        if all(linalg.dot(d, psi).denominator == 1 for psi in self.datum.invariant_characters):
            return d
        return None


def z_exponent(datum: RootDatum, weight: Vector, sign: int = 1) -> tuple[int, ...]:
    """Exponent of ``z^{sign * weight|_Z}`` in coordinates of the integral central lattice."""
    return tuple(int(sign * x) for x in datum.central_projection_coordinates(weight))


@dataclass(frozen=True, slots=True)
class SolutionPoint:
    v: Vector
    regular: bool
    orbit_size: int

    def to_json(self) -> dict[str, object]:
        return {"v": [str(x) for x in self.v], "regular": self.regular, "orbitSize": self.orbit_size}


@dataclass(frozen=True, slots=True)
class FRho:
    points: tuple[Vector, ...]
    orbits: tuple[SolutionPoint, ...]

    @property
    def regular_orbits(self) -> tuple[SolutionPoint, ...]:
        return tuple(p for p in self.orbits if p.regular)


def _fractional(v: Vector) -> Vector:
    return tuple(x - (x.numerator // x.denominator) for x in v)


def enumerate_F_rho(level: LevelData) -> FRho:
    """Solutions of ``h' v = rho mod M`` modulo N, grouped into W-orbits."""
    level.require_usable()
    datum = level.datum
    h_inverse = linalg.inverse(level.h_prime)
    reps = coset_representatives(level.h_prime)
    points = sorted({_fractional(linalg.matvec(h_inverse, linalg.add(datum.rho, m))) for m in reps.representatives})
    remaining = set(points)
    orbits = []
    for v in points:
        if v not in remaining:
            continue
        orbit = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for i in range(datum.semisimple_rank):
                w = _fractional(datum.reflect_coweight(i, u))
                if w not in orbit:
                    orbit.add(w)
                    queue.append(w)
        remaining -= orbit
        regular = all(linalg.dot(v, alpha).denominator != 1 for alpha in datum.all_roots)
        orbits.append(SolutionPoint(v, regular, len(orbit)))
    logger.debug("F_rho: %d points, %d orbits", len(points), len(orbits))
    return FRho(tuple(points), tuple(orbits))


@dataclass(frozen=True, slots=True)
class Monomial:
    formal: tuple[tuple[str, int], ...] = ()
    z: tuple[int, ...] | None = None

    @classmethod
    def of(cls, formal: Mapping[str, int] | None = None, z: Sequence[int] | None = None) -> "Monomial":
        items = tuple(sorted((k, int(v)) for k, v in (formal or {}).items() if v))
        return cls(items, None if z is None else tuple(int(x) for x in z))

    def power(self, p: int) -> "Monomial":
        return Monomial(tuple((k, v * p) for k, v in self.formal), None if self.z is None else tuple(p * x for x in self.z))

    def times(self, other: "Monomial") -> "Monomial":
        formal = dict(self.formal)
        for k, v in other.formal:
            formal[k] = formal.get(k, 0) + v
        if self.z is None or other.z is None:
            z = self.z if other.z is None else other.z
        else:
            z = tuple(a + b for a, b in zip(self.z, other.z))
        return Monomial.of(formal, z)

    def series(self, ring: SeriesRing, coefficient: object = 1) -> TruncatedSeries:
        return TruncatedSeries.monomial(ring, dict(self.formal), self.z, coefficient)


@dataclass(frozen=True, slots=True)
class DeformationTerm:
    """``coefficient * monomial * W`` with W given by its weights; adds ``d ch_W`` and its Hessian."""

    weights: tuple[tuple[Vector, int], ...]
    coefficient: Fraction
    monomial: Monomial


@dataclass(frozen=True, slots=True)
class LogTerm:
    """``c ln(1 - m e^{u(xi)}) u`` in the equation and ``(1 - m e^{u(xi)})^e`` in the summand."""

    weight: Vector
    multiplicity: int
    monomial: Monomial
    point_exponent: int = 0


@dataclass(frozen=True)
class IndexProblem:
    level: LevelData
    genus: int
    point_class: WeightedRep
    ring: SeriesRing
    deformations: tuple[DeformationTerm, ...] = ()
    logs: tuple[LogTerm, ...] = ()
    sign: int = 1
    prefactor: Monomial = field(default_factory=Monomial)

    def __post_init__(self) -> None:
        if self.genus < 0:
            raise MathPreconditionError("genus must be nonnegative.")
        if self.ring.z_rank != len(self.level.z_basis):
            raise ValueError("The series ring z rank must equal the rank of the central lattice.")

    @property
    def datum(self) -> RootDatum:
        return self.level.datum


class _PointEvaluator:
    """Equation, Jacobian and summand of the deformed TW sum at one base point ``v``."""

    def __init__(self, problem: IndexProblem, v: Vector) -> None:
        self.problem = problem
        self.ring = problem.ring
        self.v = v
        self.n = problem.datum.rank
        self.h_prime = problem.level.h_prime
        self.def_monomials = [
            term.monomial.series(self.ring, term.coefficient) for term in problem.deformations
        ]
        self.log_monomials = [term.monomial.series(self.ring) for term in problem.logs]

    def exponential(self, weight: Vector, delta: Sequence[TruncatedSeries]) -> TruncatedSeries:
        linear = TruncatedSeries.zero(self.ring)
        for w_k, d_k in zip(weight, delta):
            if w_k:
                linear = linear + d_k * w_k
        return exp_with_phase(linear, linalg.dot(weight, self.v))

    def _log_factors(self, delta):
        for term, mono in zip(self.problem.logs, self.log_monomials):
            y = mono * self.exponential(term.weight, delta)
            yield term, y

    def equation(self, delta: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
        out = []
        for k in range(self.n):
            total = TruncatedSeries.zero(self.ring)
            for j in range(self.n):
                if self.h_prime[j][k]:
                    total = total + delta[j] * self.h_prime[j][k]
            out.append(total)
        for term, mono in zip(self.problem.deformations, self.def_monomials):
            for weight, mult in term.weights:
                e = mono * self.exponential(weight, delta) * mult
                out = [o + e * w_k if w_k else o for o, w_k in zip(out, weight)]
        for term, y in self._log_factors(delta):
            if not term.multiplicity:
                continue
            g = log(1 - y) * term.multiplicity
            out = [o + g * u_k if u_k else o for o, u_k in zip(out, term.weight)]
        return tuple(out)

    def jacobian(self, delta: Sequence[TruncatedSeries]) -> SeriesMatrix:
        rows = [
            [TruncatedSeries.scalar(self.ring, self.h_prime[k][l]) for l in range(self.n)] for k in range(self.n)
        ]

        def add_outer(scale: TruncatedSeries, weight: Vector) -> None:
            for k in range(self.n):
                if not weight[k]:
                    continue
                for l in range(self.n):
                    if weight[l]:
                        rows[k][l] = rows[k][l] + scale * (weight[k] * weight[l])

        for term, mono in zip(self.problem.deformations, self.def_monomials):
            for weight, mult in term.weights:
                add_outer(mono * self.exponential(weight, delta) * mult, weight)
        for term, y in self._log_factors(delta):
            if term.multiplicity:
                add_outer(-(y * (1 - y).inverse()) * term.multiplicity, term.weight)
        return SeriesMatrix.from_rows(rows)

    def summand(self, delta: Sequence[TruncatedSeries]) -> TruncatedSeries:
        problem = self.problem
        ring = self.ring
        datum = problem.datum
        character = TruncatedSeries.zero(ring)
        for weight, mult in problem.point_class:
            tag = Monomial.of(None, z_exponent(datum, weight, -1)).series(ring, mult)
            character = character + tag * self.exponential(weight, delta)
        weyl = TruncatedSeries.one(ring)
        for alpha in datum.all_roots:
            weyl = weyl * (1 - self.exponential(alpha, delta))
        if problem.level.weyl_sign is WeylSign.LITERAL and len(datum.positive_roots) % 2:
            weyl = -weyl
        det_h = problem.level.determinant
        det_j = self.jacobian(delta).det()
        theta = weyl * det_j.inverse() * (det_h / abs(det_h))
        summand = character * power(theta, 1 - problem.genus)
        for term, y in self._log_factors(delta):
            if term.point_exponent:
                summand = summand * power(1 - y, term.point_exponent)
        return summand * problem.prefactor.series(ring, problem.sign)


@dataclass
class GeneratingFunction:
    series: TruncatedSeries
    points: int
    regular_orbits: int
    newton_iterations: int


def generating_function(problem: IndexProblem) -> GeneratingFunction:
    """Sum over regular W-orbits of ``ch_{U'}(xi) theta(xi)^{1-g}`` with the point-class factors."""
    f_rho = enumerate_F_rho(problem.level)
    ring = problem.ring
    total = TruncatedSeries.zero(ring)
    iterations = 0
    zero = tuple(TruncatedSeries.zero(ring) for _ in range(problem.datum.rank))
    for orbit in f_rho.regular_orbits:
        evaluator = _PointEvaluator(problem, orbit.v)
        if problem.deformations or problem.logs:
            solution = solve_fixed_point(evaluator.equation, evaluator.jacobian, zero)
            delta, used = solution.point, solution.iterations
        else:
            delta, used = zero, 0
        iterations = max(iterations, used)
        total = total + evaluator.summand(delta)
    logger.info("TW sum over %d regular orbits (of %d points)", len(f_rho.regular_orbits), len(f_rho.points))
    return GeneratingFunction(total, len(f_rho.points), len(f_rho.regular_orbits), iterations)


def integer_coefficients(series: TruncatedSeries) -> dict[tuple[int, ...], int]:
    """Integer-gated coefficients keyed by formal exponents (z must already be stripped)."""
    out: dict[tuple[int, ...], int] = {}
    for (formal, _z), value in series:
        rounded = integer_gate(value)
        if rounded:
            out[formal] = out.get(formal, 0) + rounded
    return out


def degree_components(
    series: TruncatedSeries,
    level: LevelData,
    *,
    strict: bool = True,
) -> dict[Vector, TruncatedSeries]:
    """Split the generating function by degree: ``I_d`` is the coefficient of ``z^{sigma h(d, -)}``."""
    out: dict[Vector, TruncatedSeries] = {}
    for z in series.z_support():
        d = level.degree_of(z)
        if d is None:
            if strict:
                raise ZSupportLeakError(f"z exponent {list(z)} is not of the form h(d, -).")
            logger.warning("Ignoring z exponent %s outside the degree lattice", list(z))
            continue
        out[d] = series.z_coefficient(z)
    return out


def extract_degree(series: TruncatedSeries, level: LevelData, d: Vector) -> TruncatedSeries:
    nu = level.degree_exponent(d)
    if not all(x.denominator == 1 for x in nu):
        return TruncatedSeries.zero(series.ring)
    return series.z_coefficient(tuple(int(x) for x in nu))


@dataclass
class IndexReport:
    generating: GeneratingFunction
    degrees: dict[Vector, dict[tuple[int, ...], int]]
    variables: tuple[str, ...]
    rank: int

    @property
    def series(self) -> TruncatedSeries:
        return self.generating.series

    def value(self, d: Sequence[object] | None = None, formal: Mapping[str, int] | None = None) -> int:
        ring = self.series.ring
        d = linalg.zero_vector(self.rank) if d is None else linalg.vec(d)
        key = ring.exponents(formal)
        return self.degrees.get(d, {}).get(key, 0)

    def to_json(self) -> dict[str, object]:
        return {
            "points": self.generating.points,
            "regularOrbits": self.generating.regular_orbits,
            "newtonIterations": self.generating.newton_iterations,
            "variables": list(self.variables),
            "degrees": [
                {
                    "d": [str(x) for x in d],
                    "coefficients": [
                        {"exponents": list(exps), "value": value} for exps, value in sorted(coefficients.items())
                    ],
                }
                for d, coefficients in sorted(self.degrees.items())
            ],
            "series": self.series.to_json(),
        }


def report(
    problem: IndexProblem,
    *,
    strict: bool = True,
    generating: GeneratingFunction | None = None,
) -> IndexReport:
    generating = generating or generating_function(problem)
    components = degree_components(generating.series, problem.level, strict=strict)
    degrees = {d: integer_coefficients(part) for d, part in components.items()}
    return IndexReport(generating, degrees, problem.ring.variables, problem.datum.rank)


def fixed_point_solutions(problem: IndexProblem) -> list[FixedPointSolution]:
    """Newton solution at each regular orbit representative, residual included."""
    zero = tuple(TruncatedSeries.zero(problem.ring) for _ in range(problem.datum.rank))
    evaluators = [_PointEvaluator(problem, orbit.v) for orbit in enumerate_F_rho(problem.level).regular_orbits]
    return [solve_fixed_point(evaluator.equation, evaluator.jacobian, zero) for evaluator in evaluators]


def default_ring(level: LevelData, *, trunc_t: int = 8, trunc_s: int = 2, precision: int = 128) -> SeriesRing:
    return SeriesRing(("t", "s"), (trunc_t, trunc_s), len(level.z_basis), precision)


def trivial_rep(rank: int) -> WeightedRep:
    return WeightedRep.from_pairs([(linalg.zero_vector(rank), 1)])


def x_star_log_terms(datum: RootDatum, x: WeightedRep, genus: int, *, point_class_factor: bool = True) -> tuple[LogTerm, ...]:
    """``ln(1 - t z^{-beta} e^{beta})`` for the weights ``beta`` of X^*."""
    terms = []
    for weight, mult in x:
        beta = linalg.scale(-1, weight)
        exponent = mult * (genus - 1) if point_class_factor else 0
        terms.append(LogTerm(beta, mult, Monomial.of({"t": 1}, z_exponent(datum, beta, -1)), exponent))
    return tuple(terms)


def s_deformation_terms(datum: RootDatum, u: WeightedRep) -> tuple[DeformationTerm, ...]:
    """``s z^{-mu} U_mu`` for the central weights ``mu`` of U."""
    groups: dict[tuple[int, ...], list[tuple[Vector, int]]] = {}
    for weight, mult in u:
        groups.setdefault(z_exponent(datum, weight, -1), []).append((weight, mult))
    return tuple(
        DeformationTerm(tuple(weights), Fraction(1), Monomial.of({"s": 1}, z)) for z, weights in sorted(groups.items())
    )


def adams_deformation_terms(datum: RootDatum, x: WeightedRep, max_power: int) -> tuple[DeformationTerm, ...]:
    """``-sum_p (t z^{-beta})^p / p^2 psi^p(X^*)``."""
    terms = []
    for weight, mult in x:
        beta = linalg.scale(-1, weight)
        base = Monomial.of({"t": 1}, z_exponent(datum, beta, -1))
        for p in range(1, max_power + 1):
            terms.append(DeformationTerm(((linalg.scale(p, beta), mult),), Fraction(-1, p * p), base.power(p)))
    return tuple(terms)


def tw_index(
    level: LevelData,
    genus: int,
    u_prime: WeightedRep | None = None,
    deformations: Iterable[DeformationTerm] = (),
    ring: SeriesRing | None = None,
) -> IndexReport:
    ring = ring or default_ring(level)
    u_prime = u_prime if u_prime is not None else trivial_rep(level.datum.rank)
    problem = IndexProblem(level, genus, u_prime, ring, tuple(deformations))
    return report(problem)


def full_index_problem(
    level: LevelData,
    genus: int,
    u: WeightedRep,
    u_prime: WeightedRep,
    x: WeightedRep,
    ring: SeriesRing,
    *,
    point_class_factor: bool = True,
) -> IndexProblem:
    datum = level.datum
    return IndexProblem(
        level,
        genus,
        u_prime,
        ring,
        deformations=s_deformation_terms(datum, u),
        logs=x_star_log_terms(datum, x, genus, point_class_factor=point_class_factor),
    )


def full_index_formula(
    level: LevelData,
    genus: int,
    u: WeightedRep,
    u_prime: WeightedRep,
    x: WeightedRep,
    ring: SeriesRing | None = None,
    *,
    point_class_factor: bool = True,
) -> IndexReport:
    ring = ring or default_ring(level)
    return report(full_index_problem(level, genus, u, u_prime, x, ring, point_class_factor=point_class_factor))


def adams_index_formula(
    level: LevelData,
    genus: int,
    u: WeightedRep,
    u_prime: WeightedRep,
    x: WeightedRep,
    ring: SeriesRing | None = None,
    *,
    point_class_factor: bool = True,
) -> IndexReport:
    """The same generating function with the X^* factor expanded through Adams operations."""
    ring = ring or default_ring(level)
    datum = level.datum
    max_power = ring.orders[ring.index("t")]
    point_terms = tuple(
        LogTerm(term.weight, 0, term.monomial, term.point_exponent)
        for term in x_star_log_terms(datum, x, genus, point_class_factor=point_class_factor)
    )
    problem = IndexProblem(
        level,
        genus,
        u_prime,
        ring,
        deformations=s_deformation_terms(datum, u) + adams_deformation_terms(datum, x, max_power),
        logs=point_terms,
    )
    return report(problem)


@dataclass
class ABReport:
    sqrt_k: IndexReport
    point: IndexReport
    rank: int
    degree: int
    degrees: dict[Vector, dict[tuple[int, ...], int]]

    def to_json(self) -> dict[str, object]:
        return {
            "rank": self.rank,
            "degree": self.degree,
            "sqrtK": self.sqrt_k.to_json(),
            "pointClass": self.point.to_json(),
            "degrees": [
                {"d": [str(x) for x in d], "coefficients": [
                    {"exponents": list(e), "value": v} for e, v in sorted(c.items())
                ]}
                for d, c in sorted(self.degrees.items())
            ],
        }


def ab_class_reduce(
    level: LevelData,
    genus: int,
    rank: int,
    degree: int,
    u: WeightedRep,
    x: WeightedRep,
    ring: SeriesRing | None = None,
    *,
    point_class_factor: bool = True,
) -> ABReport:
    """Index of ``E_a(U)`` for ``a ~ rank sqrt(K) + (deg + 1 - g) O_p``."""
    ring = ring or default_ring(level)
    if ring.orders[ring.index("s")] < 1:
        raise MathPreconditionError("The sqrt(K) part needs the s truncation order to be at least 1.")
    trivial = trivial_rep(level.datum.rank)
    sqrt_problem = full_index_problem(level, genus, u, trivial, x, ring, point_class_factor=point_class_factor)
    whole = generating_function(sqrt_problem)
    sqrt_series = whole.series.coefficient_in("s", 1)
    sqrt_report = report(
        sqrt_problem,
        generating=GeneratingFunction(sqrt_series, whole.points, whole.regular_orbits, whole.newton_iterations),
    )
    point_report = full_index_formula(level, genus, WeightedRep.empty(), u, x, ring,
                                      point_class_factor=point_class_factor)
    combined = sqrt_series * rank + point_report.series * (degree + 1 - genus)
    components = degree_components(combined, level)
    degrees = {d: integer_coefficients(part) for d, part in components.items()}
    return ABReport(sqrt_report, point_report, rank, degree, degrees)


@dataclass(frozen=True)
class Calibration:
    orientation: int
    weyl_sign: WeylSign
    checks: tuple[tuple[str, int, int], ...]

    def to_json(self) -> dict[str, object]:
        return {
            "orientation": self.orientation,
            "weylSign": self.weyl_sign.value,
            "checks": [{"case": case, "expected": e, "computed": c} for case, e, c in self.checks],
        }


def _calibration_cases() -> list[tuple[str, RootDatum, Matrix, int, int]]:
    from thetastrat.oracles import abelian_count, verlinde_sl2
    from thetastrat.rootdata import build_root_datum

    gl1 = build_root_datum("GL1")
    a1 = build_root_datum("A1")
    cases = [(f"GL1 h=3 g={g}", gl1, ((Fraction(3),),), g, abelian_count(3, g)) for g in range(3)]
    cases += [(f"A1 k=1 g={g}", a1, basic_level(a1), g, verlinde_sl2(1, g)) for g in range(2)]
    return cases


def calibrate_level_convention(precision: int = 96) -> Calibration:
    """Pick the unique (orientation, Weyl sign) reproducing the abelian law and the A1 Verlinde numbers."""
    matches = []
    for orientation in (1, -1):
        for sign in WeylSign:
            checks = []
            ok = True
            for case, datum, classical, genus, expected in _calibration_cases():
                level = LevelData(datum, classical, orientation, sign)
                try:
                    ring = SeriesRing(("t", "s"), (0, 0), len(level.z_basis), precision)
                    computed = tw_index(level, genus, ring=ring).value(formal=None)
                except (MathPreconditionError, ArithmeticError):
                    ok = False
                    break
                checks.append((case, expected, computed))
                ok = ok and computed == expected
            if ok:
                matches.append(Calibration(orientation, sign, tuple(checks)))
    if len(matches) != 1:
        raise CalibrationError(f"Expected exactly one matching convention, found {len(matches)}.")
    logger.info("Calibrated orientation %d, Weyl sign %s", matches[0].orientation, matches[0].weyl_sign.value)
    return matches[0]


__all__ = [
    "ABReport",
    "AdmissibilityError",
    "Calibration",
    "CalibrationError",
    "DeformationTerm",
    "FRho",
    "GeneratingFunction",
    "IndexProblem",
    "IndexReport",
    "LevelData",
    "LogTerm",
    "Monomial",
    "SolutionPoint",
    "WeylSign",
    "ZSupportLeakError",
    "ab_class_reduce",
    "adams_deformation_terms",
    "adams_index_formula",
    "basic_level",
    "calibrate_level_convention",
    "default_ring",
    "degree_components",
    "enumerate_F_rho",
    "extract_degree",
    "fixed_point_solutions",
    "full_index_formula",
    "full_index_problem",
    "generating_function",
    "half_trace_form",
    "integer_coefficients",
    "report",
    "s_deformation_terms",
    "trivial_rep",
    "tw_index",
    "x_star_log_terms",
    "z_exponent",
]
