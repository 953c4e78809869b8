"""Recursive gauged Gromov-Witten invariants through non-abelian localization.

``I_d^chi = I_d - sum I_{d'}^{chi - lambda^dagger}(X^{lambda=0} / L_lambda, F ⊗ E_lambda)``
over the unstable chi-active strata that survive the admissibility tests.
Every index is evaluated with the deformed Teleman-Woodward sum of
:mod:`thetastrat.twindex`; the Euler class ``E_lambda`` enters as log terms
graded by one auxiliary variable ``q<depth>`` per level of nesting.
"""

from __future__ import annotations

import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import floor

from thetastrat import linalg
from thetastrat.errors import IntegerGateError, MathPreconditionError
from thetastrat.linalg import Matrix, Vector
from thetastrat.quadforms import (
    Enclosure,
    WeightedRep,
    c_XV,
    ch2_form,
    dual_norm_sq,
    lower,
    negative_part,
    operator_norm,
    positive_part,
    sqrt_bounds,
)
from thetastrat.rootdata import RootDatum, levi_datum
from thetastrat.series import SeriesRing, TruncatedSeries
from thetastrat.strata import (
    MAX_SCAN_POINTS,
    EnumerationError,
    IndexingDatum,
    StrataProblem,
    central_character_obstruction,
    enumerate_chi_active,
)
from thetastrat.twindex import (
    IndexProblem,
    LevelData,
    LogTerm,
    Monomial,
    WeylSign,
    extract_degree,
    generating_function,
    s_deformation_terms,
    trivial_rep,
    x_star_log_terms,
    z_exponent,
)

logger = logging.getLogger("thetastrat.ggw")

DEFAULT_DEPTH_LIMIT = 4
DEFAULT_Q_MARGIN = 2
CENTRAL_CHARACTER = "central_character"
RADIUS = "radius"
DEGREE_BOUND = "degree_bound"
WEIGHT_TEST = "weight_test"

TPolynomial = dict[int, int]


class PositivityError(MathPreconditionError):
    """Raised when ``c_XV >= 1``; replacing V by ``V^{⊕m}`` restores positivity."""


class DepthLimitError(MathPreconditionError):
    """Raised when the recursion does not shrink or goes deeper than allowed."""


@dataclass(frozen=True)
class ABClass:
    """``E_a(U)`` for ``a ~ rank sqrt(K) + (degree + 1 - g) O_p``; ``degree=None`` means ``g``."""

    rank: int = 0
    degree: int | None = None
    u: WeightedRep | None = None

    def point_multiplier(self, genus: int) -> int:
        degree = genus if self.degree is None else self.degree
        return degree + 1 - genus

    def representation(self, n: int) -> WeightedRep:
        return self.u if self.u is not None else trivial_rep(n)

    def weights(self, n: int, genus: int) -> list[Vector]:
        """Weights ``theta`` of the class at a point."""
        found: list[Vector] = []
        if self.point_multiplier(genus):
            found.extend(self.representation(n).weights)
        if self.rank:
            found.append(linalg.zero_vector(n))
        return found or [linalg.zero_vector(n)]

    def to_json(self) -> dict[str, object]:
        return {
            "rank": self.rank,
            "degree": self.degree,
            "u": None if self.u is None else self.u.to_json(),
        }


@dataclass(frozen=True)
class EulerClassData:
    lam: Vector
    lam_primitive: Vector
    positive: WeightedRep
    negative: WeightedRep
    negative_x: WeightedRep
    log_terms: tuple[LogTerm, ...]
    sign: int
    t_shift: int
    level_shift: Matrix
    point_character: Vector

    def to_json(self) -> dict[str, object]:
        return {
            "lambda": [str(x) for x in self.lam],
            "positive": self.positive.to_json(),
            "negative": self.negative.to_json(),
            "sign": self.sign,
            "tShift": self.t_shift,
            "pointCharacter": [str(x) for x in self.point_character],
        }


def _integer(value: Fraction, what: str) -> int:
    if value.denominator != 1:
        raise MathPreconditionError(f"{what} is not an integer: {value}.")
    return int(value)


def _signed_rank(rep: WeightedRep, d: Vector, genus: int) -> int:
    """Rank of ``E_{O_C}(T)`` in degree ``d``: ``<d, det T> + (1 - g) dim T``."""
    rank = len(d)
    return _integer(linalg.dot(d, rep.determinant_character(rank)), "<d, det T>") + (1 - genus) * rep.dimension


def euler_class_weights(
    problem: StrataProblem,
    lam: Vector,
    d_prime: Vector,
    genus: int,
    q_variable: str = "q1",
) -> EulerClassData:
    """Split ``T = X ⊕ g[1]`` by the sign of ``lambda`` and encode ``E_lambda`` as log terms."""
    lam = tuple(lam)
    if linalg.is_zero(lam):
        raise MathPreconditionError("The Euler class needs a nonzero lambda.")
    n = problem.rank
    primitive = linalg.vec(linalg.primitive_integer(lam))
    roots = WeightedRep.shifted_roots(problem.datum)
    x_minus = negative_part(problem.x, lam)
    root_minus = negative_part(roots, lam)
    x_plus = positive_part(problem.x, lam)
    root_plus = positive_part(roots, lam)
    negative = x_minus + root_minus
    positive = x_plus + root_plus

    def formal(u: Vector, graded: bool) -> dict[str, int]:
        powers = {q_variable: abs(_integer(linalg.dot(primitive, u), "lambda weight"))}
        if graded:
            powers["t"] = 1
        return powers

    terms: list[LogTerm] = []
    for part, graded in ((x_minus, True), (root_minus, False)):
        for u, mult in part:
            terms.append(LogTerm(u, -mult, Monomial.of(formal(u, graded)), mult * (genus - 1)))
    for part, graded in ((x_plus, True), (root_plus, False)):
        for u, mult in part:
            terms.append(LogTerm(linalg.scale(-1, u), mult, Monomial.of(formal(u, graded)), mult * (genus - 1)))

    rank = _signed_rank(negative, d_prime, genus)
    return EulerClassData(
        lam=lam,
        lam_primitive=primitive,
        positive=positive,
        negative=negative,
        negative_x=x_minus,
        log_terms=tuple(terms),
        sign=-1 if rank % 2 else 1,
        t_shift=_signed_rank(x_minus, d_prime, genus),
        level_shift=linalg.mat_scale(-1, ch2_form(negative, n)),
        point_character=linalg.scale(1 - genus, negative.determinant_character(n)),
    )


@dataclass(frozen=True)
class PruneDecision:
    item: IndexingDatum
    keep: bool
    d_norm_sq: Fraction
    degree_bound_sq: Fraction
    weight_lhs: Fraction
    weight_rhs: Fraction
    reasons: tuple[str, ...] = ()

    def to_json(self) -> dict[str, object]:
        return {
            "d": [str(x) for x in self.item.d],
            "lambda": [str(x) for x in self.item.lam],
            "keep": self.keep,
            "dNormSq": str(self.d_norm_sq),
            "degreeBoundSq": str(self.degree_bound_sq),
            "weightLhs": str(self.weight_lhs),
            "weightRhs": str(self.weight_rhs),
            "reasons": list(self.reasons),
        }


def _upper_dual_norm(chi: Vector, b: Matrix) -> Fraction:
    return sqrt_bounds(max(dual_norm_sq(chi, b), Fraction(0)))[1]


def _positivity(problem: StrataProblem) -> Enclosure:
    value = c_XV(problem.datum, problem.x, problem.v, problem.b)
    if value.hi >= 1:
        raise PositivityError(
            f"c_XV is not certified below 1 (enclosure [{value.lo}, {value.hi}]); replace V by V^m for larger m."
        )
    return value


def _chamber_bracket(
    problem: StrataProblem,
    negative: WeightedRep,
    thetas: list[Vector],
    d_ker: Vector,
    genus: int,
) -> Fraction:
    """Upper bound of ``max_theta ||theta + chi + (1-g) det T^- + phi_{T^-}(d_ker)^dagger||_b + ||chi||_b``."""
    n = problem.rank
    shift = linalg.add(
        linalg.scale(1 - genus, negative.determinant_character(n)),
        linalg.matvec(ch2_form(negative, n), d_ker),
    )
    base = linalg.add(problem.chi, shift)
    worst = max(_upper_dual_norm(linalg.add(theta, base), problem.b) for theta in thetas)
    return worst + _upper_dual_norm(problem.chi, problem.b)


def _uniform_bracket(problem: StrataProblem, thetas: list[Vector], d_ker: Vector, genus: int) -> Fraction:
    """Chamber-independent upper bound of the bracket by the triangle inequality."""
    b = problem.b
    tangent = problem.x + WeightedRep.shifted_roots(problem.datum)
    spread = Fraction(0)
    for w, mult in tangent:
        size = _upper_dual_norm(w, b)
        spread += abs(mult) * size * (abs(1 - genus) + abs(linalg.dot(w, d_ker)))
    chi = _upper_dual_norm(problem.chi, b)
    return max(_upper_dual_norm(theta, b) for theta in thetas) + 2 * chi + spread


def _weight_terms(
    problem: StrataProblem,
    lam: Vector,
    d_prime: Vector,
    negative: WeightedRep,
    thetas: list[Vector],
    genus: int,
) -> tuple[Fraction, Fraction]:
    """``((lambda, d')_V + <lambda, chi>, max_theta <lambda, theta> + (lambda, d')_{T^-} + (1-g) <lambda, det T^->)``."""
    n = problem.rank
    coefficient = problem.v_pairing(lam, d_prime) + linalg.dot(lam, problem.chi)
    rhs = (
        max(linalg.dot(lam, theta) for theta in thetas)
        + linalg.bilinear(ch2_form(negative, n), lam, d_prime)
        + (1 - genus) * linalg.dot(lam, negative.determinant_character(n))
    )
    return coefficient, rhs


def _tangent_negative(problem: StrataProblem, lam: Vector) -> WeightedRep:
    return negative_part(problem.x + WeightedRep.shifted_roots(problem.datum), lam)


def admissible_prune(
    problem: StrataProblem,
    data: list[IndexingDatum],
    class_weights: list[Vector],
    power: int,
    genus: int,
    d_ker: Vector | None = None,
) -> list[PruneDecision]:
    """Degree bound and power-``m`` weight test for every unstable datum."""
    if power < 1:
        raise MathPreconditionError("The power m must be at least 1.")
    c = _positivity(problem)
    d_ker = linalg.zero_vector(problem.rank) if d_ker is None else tuple(d_ker)
    phi_plus_hi = problem.phi_plus_norm.hi
    decisions = []
    for item in data:
        negative = _tangent_negative(problem, item.lam)
        bracket = _chamber_bracket(problem, negative, class_weights, d_ker, genus)
        bound_sq = phi_plus_hi * (bracket / (1 - c.hi)) ** 2
        d_sq = problem.v_norm_sq(item.d)
        coefficient, rhs = _weight_terms(problem, item.lam, item.d, negative, class_weights, genus)
        reasons = []
        if d_sq > bound_sq:
            reasons.append(DEGREE_BOUND)
        if power * coefficient > rhs:
            reasons.append(WEIGHT_TEST)
        decisions.append(PruneDecision(item, not reasons, d_sq, bound_sq, power * coefficient, rhs, tuple(reasons)))
    return decisions


def radius_r_V(problem: StrataProblem) -> Enclosure | None:
    """``min ||w||_V / ||phi_V^+||^{1/2}`` over ``w`` in ``(1/H) N`` with ``||w||_V != 0``; None when V is trivial."""
    f = problem.f_v
    scale = linalg.denominator_lcm(x for row in f for x in row)
    diagonal, _s, t = linalg.smith_decomposition(linalg.mat_scale(scale, f))
    r = sum(1 for x in diagonal if x != 0)
    if r == 0:
        return None
    columns = linalg.transpose(t)[:r]
    q = linalg.gram(columns, f)
    ceiling = min(q[k][k] for k in range(r))
    q_inverse = linalg.inverse(q)
    bounds = [floor(sqrt_bounds(ceiling * q_inverse[k][k])[1]) for k in range(r)]
    size = 1
    for bound in bounds:
        size *= 2 * bound + 1
    if size > MAX_SCAN_POINTS:
        raise EnumerationError(f"Radius search box has {size} points, above the limit of {MAX_SCAN_POINTS}.")
    smallest = ceiling
    for point in itertools.product(*(range(-bound, bound + 1) for bound in bounds)):
        y = linalg.vec(point)
        value = linalg.bilinear(q, y, y)
        if 0 < value < smallest:
            smallest = value
    h = problem.coxeter_number
    norm = problem.phi_plus_norm
    gap_sq = smallest / (h * h)
    lo = sqrt_bounds(gap_sq / norm.hi)[0]
    hi = sqrt_bounds(gap_sq / (norm.lo or norm.hi))[1]
    return Enclosure(lo, hi)


def admissibility_power(
    problem: StrataProblem,
    d: Vector,
    ab_class: ABClass,
    genus: int,
    gamma: Fraction | None = None,
) -> int:
    """Smallest ``m`` for which every unstable stratum fails the weight test."""
    thetas = ab_class.weights(problem.rank, genus)
    d_ker = linalg.matvec(problem.kernel_projector, tuple(d))
    if gamma is None:
        gamma = _gamma(problem, thetas, d_ker, genus)
    central = linalg.matvec(problem.center_projector, tuple(d))
    best = 1
    for item in enumerate_chi_active(problem, central, gamma, d_ker):
        if item.is_semistable:
            continue
        negative = _tangent_negative(problem, item.lam)
        coefficient, rhs = _weight_terms(problem, item.lam, item.d, negative, thetas, genus)
        best = max(best, floor(rhs / coefficient) + 1)
    return best


def _gamma(problem: StrataProblem, thetas: list[Vector], d_ker: Vector, genus: int) -> Fraction:
    """``mu <= ||phi_V||^{1/2} R + ||chi||_b`` with ``R`` the chamber-independent degree bound."""
    c = _positivity(problem)
    bracket = _uniform_bracket(problem, thetas, d_ker, genus)
    radius = sqrt_bounds(problem.phi_plus_norm.hi)[1] * bracket / (1 - c.hi)
    phi_norm = sqrt_bounds(operator_norm(problem.phi_v, problem.b).hi)[1]
    return phi_norm * radius + _upper_dual_norm(problem.chi, problem.b)


@dataclass(frozen=True)
class LeviContext:
    """Stratification problem of a Levi together with the accumulated Euler-class data."""

    problem: StrataProblem
    classical: Matrix
    twist: Vector
    logs: tuple[LogTerm, ...] = ()
    sign: int = 1
    t_shift: int = 0
    q_variables: tuple[tuple[str, int], ...] = ()
    depth: int = 0
    path: tuple[tuple[Vector, Vector], ...] = ()

    @property
    def datum(self) -> RootDatum:
        return self.problem.datum

    @property
    def size(self) -> tuple[int, int]:
        return (self.datum.semisimple_rank, len(self.problem.x))

    def memo_key(self, d: Vector) -> tuple[object, ...]:
        return (
            self.datum.coroots,
            self.problem.x,
            self.problem.chi,
            self.classical,
            self.twist,
            self.logs,
            self.sign,
            self.t_shift,
            self.q_variables,
            tuple(d),
        )


@dataclass(frozen=True)
class Correction:
    d: Vector
    lam: Vector
    mu_squared: Fraction
    index: TPolynomial
    value: TPolynomial
    nested: tuple["Correction", ...] = ()

    def to_json(self) -> dict[str, object]:
        return {
            "d": [str(x) for x in self.d],
            "lambda": [str(x) for x in self.lam],
            "muSquared": str(self.mu_squared),
            "index": _poly_json(self.index),
            "value": _poly_json(self.value),
            "nested": [item.to_json() for item in self.nested],
        }


@dataclass
class GGWResult:
    index: TPolynomial
    corrections: list[Correction]
    value: TPolynomial
    residual: float
    power: int
    admissibility_power: int
    shortcut: str | None = None
    pruned: list[PruneDecision] = field(default_factory=list)
    r_v: Enclosure | None = None

    def to_json(self) -> dict[str, object]:
        return {
            "index": _poly_json(self.index),
            "corrections": [item.to_json() for item in self.corrections],
            "value": _poly_json(self.value),
            "integerGateResidual": self.residual,
            "power": self.power,
            "admissibilityPower": self.admissibility_power,
            "shortcut": self.shortcut,
            "pruned": [decision.to_json() for decision in self.pruned],
            "rV": None if self.r_v is None else self.r_v.to_json(),
        }


def _poly_json(poly: TPolynomial) -> list[dict[str, int]]:
    return [{"t": power, "value": value} for power, value in sorted(poly.items()) if value]


def _poly_sub(a: TPolynomial, b: TPolynomial) -> TPolynomial:
    out = dict(a)
    for power, value in b.items():
        out[power] = out.get(power, 0) - value
    return {power: value for power, value in out.items() if value}


@dataclass(frozen=True)
class _Outcome:
    index: TPolynomial | None
    value: TPolynomial
    corrections: tuple[Correction, ...]
    shortcut: str | None
    pruned: tuple[PruneDecision, ...]


class GGWSolver:
    """Memoized evaluator of ``I_d^chi`` for one class, genus, power and truncation."""

    def __init__(
        self,
        ab_class: ABClass,
        genus: int,
        ring: SeriesRing,
        *,
        power: int = 1,
        depth_limit: int = DEFAULT_DEPTH_LIMIT,
        q_margin: int = DEFAULT_Q_MARGIN,
        orientation: int = -1,
        weyl_sign: WeylSign = WeylSign.UNITARY,
        point_class_factor: bool = True,
        threads: int = 1,
    ) -> None:
        if genus < 0:
            raise MathPreconditionError("genus must be nonnegative.")
        if power < 1:
            raise MathPreconditionError("The power m must be at least 1.")
        self.ab_class = ab_class
        self.genus = genus
        self.ring = ring
        self.power = power
        self.depth_limit = depth_limit
        self.q_margin = q_margin
        self.orientation = orientation
        self.weyl_sign = weyl_sign
        self.point_class_factor = point_class_factor
        self.threads = max(1, threads)
        self.residual = 0.0
        self._memo: dict[tuple[object, ...], _Outcome] = {}
        self._lock = threading.Lock()

    def root_context(self, problem: StrataProblem, classical: Matrix) -> LeviContext:
        m_chi = linalg.scale(self.power, problem.chi)
        if not linalg.is_integral(m_chi):
            raise MathPreconditionError("m chi must be an integral character to twist the point class.")
        return LeviContext(problem, linalg.mat_scale(self.power, classical), linalg.scale(-1, m_chi))

    def _gate(self, series: TruncatedSeries, t_shift: int) -> TPolynomial:
        t_index = series.ring.index("t")
        limit = self.ring.orders[self.ring.index("t")]
        out: TPolynomial = {}
        worst = 0.0
        for (formal, _z), value in series:
            real = float(value.real)
            nearest = round(real)
            worst = max(worst, abs(real - nearest), abs(float(value.imag)))
            power = formal[t_index] + t_shift
            if nearest and 0 <= power <= limit:
                out[power] = out.get(power, 0) + nearest
        with self._lock:
            self.residual = max(self.residual, worst)
        if worst >= 1e-9:
            raise IntegerGateError(f"Coefficient residual {worst} is not within 1e-9 of an integer.")
        return {power: value for power, value in out.items() if value}

    def _ring_for(self, context: LeviContext, z_rank: int) -> SeriesRing | None:
        t_order = self.ring.orders[self.ring.index("t")] - context.t_shift
        if t_order < 0:
            return None
        ring = SeriesRing(
            ("t", "s", *(name for name, _ in context.q_variables)),
            (t_order, self.ring.orders[self.ring.index("s")], *(order for _, order in context.q_variables)),
            z_rank,
            self.ring.precision,
        )
        return ring

    def context_index(self, context: LeviContext, d: Vector) -> TPolynomial:
        """``I_d`` of ``L(chi)^m ⊗ F`` (with the accumulated Euler classes) on the context's group."""
        datum = context.datum
        level = LevelData(datum, context.classical, self.orientation, self.weyl_sign)
        level.require_usable()
        ring = self._ring_for(context, len(level.z_basis))
        if ring is None:
            return {}
        logs = x_star_log_terms(datum, context.problem.x, self.genus, point_class_factor=self.point_class_factor)
        logs += tuple(
            LogTerm(term.weight, term.multiplicity, replace(term.monomial, z=z_exponent(datum, term.weight, -1)),
                    term.point_exponent)
            for term in context.logs
        )
        u = self.ab_class.representation(datum.rank)
        total = TruncatedSeries.zero(ring)
        multiplier = self.ab_class.point_multiplier(self.genus)
        if multiplier:
            problem = IndexProblem(level, self.genus, u.twist(context.twist), ring, (), logs)
            total = total + generating_function(problem).series * multiplier
        if self.ab_class.rank:
            if ring.orders[ring.index("s")] < 1:
                raise MathPreconditionError("The sqrt(K) part needs the s truncation order to be at least 1.")
            point = trivial_rep(datum.rank).twist(context.twist)
            problem = IndexProblem(level, self.genus, point, ring, s_deformation_terms(datum, u), logs)
            total = total + generating_function(problem).series.coefficient_in("s", 1) * self.ab_class.rank
        series = extract_degree(total, level, tuple(d))
        for name, _order in context.q_variables:
            series = series.set_to_one(name)
        return self._gate(series * context.sign, context.t_shift)

    def _strata(self, context: LeviContext, d: Vector) -> tuple[list[PruneDecision], str | None]:
        problem = context.problem
        thetas = self.ab_class.weights(problem.rank, self.genus)
        d_ker = linalg.matvec(problem.kernel_projector, d)
        gamma = _gamma(problem, thetas, d_ker, self.genus)
        central = linalg.matvec(problem.center_projector, d)
        data = [item for item in enumerate_chi_active(problem, central, gamma, d_ker) if not item.is_semistable]
        shortcut = None
        r_v = radius_r_V(problem)
        if r_v is not None:
            c = _positivity(problem)
            rhs = 2 * _uniform_bracket(problem, thetas, d_ker, self.genus) / (1 - c.hi)
            if r_v.lo > rhs:
                data = [item for item in data if item.d == tuple(d)]
                if linalg.is_zero(problem.target(d)):
                    shortcut = RADIUS
        decisions = admissible_prune(problem, data, thetas, self.power, self.genus, d_ker)
        return decisions, shortcut

    def child_context(self, context: LeviContext, item: IndexingDatum) -> LeviContext:
        problem = context.problem
        depth = context.depth + 1
        if depth > self.depth_limit:
            raise DepthLimitError(f"Recursion depth {depth} exceeds the limit {self.depth_limit}.")
        name = f"q{depth}"
        euler = euler_class_weights(problem, item.lam, item.d, self.genus, name)
        thetas = self.ab_class.weights(problem.rank, self.genus)
        primitive = euler.lam_primitive
        coefficient, rhs = _weight_terms(problem, primitive, item.d, euler.negative, thetas, self.genus)
        slack = rhs - self.power * coefficient
        q_order = max(0, floor(slack)) + self.q_margin
        levi = levi_datum(problem.datum, item.levi.simple_indices)
        chi = linalg.sub(problem.chi, lower(item.lam, problem.b))
        child = LeviContext(
            problem=StrataProblem(levi, problem.v, item.levi.fixed_weights, problem.b, chi),
            classical=linalg.mat_add(context.classical, euler.level_shift),
            twist=linalg.add(context.twist, euler.point_character),
            logs=context.logs + euler.log_terms,
            sign=context.sign * euler.sign,
            t_shift=context.t_shift + euler.t_shift,
            q_variables=context.q_variables + ((name, q_order),),
            depth=depth,
            path=context.path + ((item.d, item.lam),),
        )
        if child.size >= context.size:
            raise DepthLimitError(
                f"Stratum lambda={[str(x) for x in item.lam]} does not shrink the Levi or the fixed weights."
            )
        return child

    def solve(self, context: LeviContext, d: Vector, *, with_index: bool = False) -> _Outcome:
        d = tuple(d)
        key = context.memo_key(d)
        with self._lock:
            cached = self._memo.get(key)
        if cached is not None and (cached.index is not None or not with_index):
            return cached
        outcome = self._evaluate(context, d, with_index)
        with self._lock:
            self._memo[key] = outcome
        return outcome

    def _evaluate(self, context: LeviContext, d: Vector, with_index: bool) -> _Outcome:
        if central_character_obstruction(context.problem, d):
            logger.debug("Central character obstruction at depth %d", context.depth)
            index = self.context_index(context, d) if with_index else None
            return _Outcome(index, {}, (), CENTRAL_CHARACTER, ())
        index = self.context_index(context, d)
        decisions, shortcut = self._strata(context, d)
        kept = [decision.item for decision in decisions if decision.keep]
        logger.info("Depth %d: %d strata kept of %d", context.depth, len(kept), len(decisions))

        def correction(item: IndexingDatum) -> Correction:
            child = self.child_context(context, item)
            outcome = self.solve(child, item.d, with_index=True)
            return Correction(item.d, item.lam, item.mu_squared, outcome.index or {}, outcome.value,
                              outcome.corrections)

        if self.threads > 1 and len(kept) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                corrections = list(pool.map(correction, kept))
        else:
            corrections = [correction(item) for item in kept]
        value = index
        for item in corrections:
            value = _poly_sub(value, item.value)
        return _Outcome(index, value, tuple(corrections), shortcut, tuple(decisions))


def recursive_ggw(
    problem: StrataProblem,
    d: Vector,
    ab_class: ABClass | None = None,
    *,
    genus: int,
    power: int = 1,
    chi: Vector | None = None,
    level: Matrix | None = None,
    ring: SeriesRing | None = None,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
    q_margin: int = DEFAULT_Q_MARGIN,
    orientation: int = -1,
    weyl_sign: WeylSign = WeylSign.UNITARY,
    point_class_factor: bool = True,
    threads: int = 1,
) -> GGWResult:
    """``I_d^chi = I_d - sum`` of the surviving strata corrections, recursing into each Levi."""
    if chi is not None:
        problem = problem.with_chi(linalg.vec(chi))
    d = linalg.vec(d)
    ab_class = ab_class or ABClass()
    classical = level if level is not None else ch2_form(problem.v, problem.rank)
    ring = ring or SeriesRing(("t", "s"), (8, 2), 0)
    solver = GGWSolver(
        ab_class,
        genus,
        ring,
        power=power,
        depth_limit=depth_limit,
        q_margin=q_margin,
        orientation=orientation,
        weyl_sign=weyl_sign,
        point_class_factor=point_class_factor,
        threads=threads,
    )
    context = solver.root_context(problem, classical)
    outcome = solver.solve(context, d, with_index=True)
    threshold = admissibility_power(problem, d, ab_class, genus)
    return GGWResult(
        index=outcome.index or {},
        corrections=list(outcome.corrections),
        value=outcome.value,
        residual=solver.residual,
        power=power,
        admissibility_power=threshold,
        shortcut=outcome.shortcut,
        pruned=[decision for decision in outcome.pruned if not decision.keep],
        r_v=radius_r_V(problem),
    )


__all__ = [
    "ABClass",
    "Correction",
    "DepthLimitError",
    "EulerClassData",
    "GGWResult",
    "GGWSolver",
    "LeviContext",
    "PositivityError",
    "PruneDecision",
    "admissibility_power",
    "admissible_prune",
    "euler_class_weights",
    "radius_r_V",
    "recursive_ggw",
]
