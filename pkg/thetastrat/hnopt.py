"""Exact maximization of piecewise-linear concave functionals against the quadratic norm on a cone.

For each choice of one linear piece per min-block the problem is a strictly
concave quadratic program over a polyhedral cone; it is solved by enumerating
independent active sets, each candidate being a b-orthogonal projection.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.fans import Cone
from thetastrat.linalg import Matrix, Vector
from thetastrat.quadforms import dagger, dual_norm_sq, norm_sq, require_norm
from thetastrat.rootdata import ParabolicType, RootDatum

logger = logging.getLogger("thetastrat.hnopt")


class EmptyConeListError(MathPreconditionError):
    """Raised when an HN problem is posed over no cones at all."""


class NoKKTPointError(MathPreconditionError):
    """Raised when no active set yields a KKT point, which signals a degenerate form."""


@dataclass(frozen=True, slots=True)
class PiecewiseLinearConcave:
    """``sum_k c_k min_j f_kj(w)`` with ``c_k >= 0``."""

    ambient: int
    blocks: tuple[tuple[Fraction, tuple[Vector, ...]], ...]

    def __post_init__(self) -> None:
        for coefficient, pieces in self.blocks:
            if coefficient < 0:
                raise MathPreconditionError("Block coefficients must be nonnegative.")
            if not pieces:
                raise MathPreconditionError("Every min-block needs at least one linear piece.")

    @classmethod
    def linear(cls, functional: Vector) -> "PiecewiseLinearConcave":
        return cls(len(functional), ((Fraction(1), (tuple(functional),)),))

    @property
    def active_blocks(self) -> tuple[tuple[Fraction, tuple[Vector, ...]], ...]:
        return tuple(block for block in self.blocks if block[0] != 0)

    def value(self, w: Vector) -> Fraction:
        return sum(
            (c * min(linalg.dot(f, w) for f in pieces) for c, pieces in self.active_blocks),
            Fraction(0),
        )

    def selections(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(len(pieces)) for _, pieces in self.active_blocks)))

    def selected(self, selection: Sequence[int]) -> Vector:
        total = linalg.zero_vector(self.ambient)
        for (c, pieces), j in zip(self.active_blocks, selection, strict=True):
            total = linalg.add(total, linalg.scale(c, pieces[j]))
        return total

    def region_constraints(self, selection: Sequence[int]) -> list[Vector]:
        """Halfspaces on which the selected pieces attain every min."""
        constraints = []
        for (_, pieces), j in zip(self.active_blocks, selection, strict=True):
            constraints.extend(linalg.sub(f, pieces[j]) for k, f in enumerate(pieces) if k != j)
        return [h for h in constraints if not linalg.is_zero(h)]

    def scaled(self, tau: Fraction) -> "PiecewiseLinearConcave":
        if tau < 0:
            raise MathPreconditionError("Only nonnegative rescaling keeps the functional concave.")
        return PiecewiseLinearConcave(self.ambient, tuple((tau * c, pieces) for c, pieces in self.blocks))


def numerical_invariant_functional(
    f_v: Matrix,
    d: Vector,
    *,
    delta_gen: Fraction = Fraction(0),
    sigma_gen: Sequence[Vector] = (),
    delta_mrk: Fraction = Fraction(0),
    sigma_mrk: Sequence[Vector] = (),
) -> PiecewiseLinearConcave:
    """``(phi_V d, w)_b + delta_mrk min Sigma_mrk + delta_gen min Sigma_gen``; ``(phi_V d, -)_b = F_V d``."""
    n = len(d)
    blocks: list[tuple[Fraction, tuple[Vector, ...]]] = [(Fraction(1), (linalg.matvec(f_v, d),))]
    if sigma_mrk:
        blocks.append((Fraction(delta_mrk), tuple(tuple(chi) for chi in sigma_mrk)))
    if sigma_gen:
        blocks.append((Fraction(delta_gen), tuple(tuple(chi) for chi in sigma_gen)))
    return PiecewiseLinearConcave(n, tuple(blocks))


@dataclass(frozen=True, slots=True)
class KKTCertificate:
    selection: tuple[int, ...]
    functional: Vector
    functional_dagger: Vector
    span_basis: tuple[Vector, ...]
    constraints: tuple[Vector, ...]
    multipliers: tuple[Fraction, ...]
    maximizer: Vector
    norm: Matrix

    def slacks(self) -> tuple[Fraction, ...]:
        return tuple(linalg.dot(h, self.maximizer) for h in self.constraints)

    def verify(self) -> bool:
        w = self.maximizer
        if any(s < 0 for s in self.slacks()) or any(m < 0 for m in self.multipliers):
            return False
        if any(m != 0 and s != 0 for m, s in zip(self.multipliers, self.slacks(), strict=True)):
            return False
        residual = linalg.sub(self.functional, linalg.matvec(self.norm, w))
        for h, m in zip(self.constraints, self.multipliers, strict=True):
            residual = linalg.add(residual, linalg.scale(m, h))
        return all(linalg.dot(residual, s) == 0 for s in self.span_basis)

    def to_json(self) -> dict[str, object]:
        return {
            "selection": list(self.selection),
            "functionalDagger": [str(x) for x in self.functional_dagger],
            "constraints": [[str(x) for x in h] for h in self.constraints],
            "multipliers": [str(m) for m in self.multipliers],
            "verified": self.verify(),
        }


@dataclass(frozen=True, slots=True)
class OptResult:
    cone_id: int
    maximizer: Vector
    value: Fraction
    mu_squared: Fraction
    active_face: tuple[int, ...]
    on_boundary: bool
    certificate: KKTCertificate
    nonpositive: bool = False
    nonpositive_certificate: tuple[str, ...] = field(default=())

    def to_json(self) -> dict[str, object]:
        return {
            "coneId": self.cone_id,
            "maximizer": [str(x) for x in self.maximizer],
            "value": str(self.value),
            "muSquared": str(self.mu_squared),
            "muSquaredFloat": float(self.mu_squared),
            "activeFace": list(self.active_face),
            "onBoundary": self.on_boundary,
            "nonpositive": self.nonpositive,
            "certificate": self.certificate.to_json(),
        }


def _restricted(functional: Vector, span_basis: Sequence[Vector]) -> Vector:
    return tuple(linalg.dot(functional, s) for s in span_basis)


def _solve_selection(
    functional: Vector,
    constraints: Sequence[Vector],
    span_basis: Sequence[Vector],
    b: Matrix,
    selection: tuple[int, ...],
) -> KKTCertificate:
    g_dagger = dagger(functional, b)
    d = len(span_basis)
    restricted = [_restricted(h, span_basis) for h in constraints]
    for size in range(0, min(d, len(constraints)) + 1):
        for active in itertools.combinations(range(len(constraints)), size):
            rows = [restricted[i] for i in active]
            if linalg.rank(rows) != size:
                continue
            coefficients = linalg.nullspace(rows, d) if rows else list(linalg.identity(d))
            subspace = [
                tuple(sum((c * s[k] for c, s in zip(coeff, span_basis)), Fraction(0)) for k in range(len(b)))
                for coeff in coefficients
            ] if d else []
            candidate = linalg.project(subspace, b, g_dagger) if subspace else linalg.zero_vector(len(b))
            if any(linalg.dot(h, candidate) < 0 for h in constraints):
                continue
            # stationarity on the span: r + sum mu_i h_i = 0 with r = g - b w
            r = _restricted(linalg.sub(functional, linalg.matvec(b, candidate)), span_basis)
            if rows:
                mu = linalg.solve(linalg.transpose(tuple(rows)), linalg.scale(-1, r))
                if mu is None or any(m < 0 for m in mu):
                    continue
            elif not linalg.is_zero(r):
                continue
            else:
                mu = ()
            multipliers = [Fraction(0)] * len(constraints)
            for i, m in zip(active, mu, strict=True):
                multipliers[i] = m
            logger.debug("Selection %s: active set %s accepted", selection, active)
            return KKTCertificate(
                selection, tuple(functional), g_dagger, tuple(span_basis), tuple(constraints),
                tuple(multipliers), candidate, b,
            )
    raise NoKKTPointError("No active set produced a KKT point; the norm is degenerate on the cone.")


def max_quadratic_on_cone(ell: PiecewiseLinearConcave, b: Matrix, cone: Cone) -> OptResult:
    """Unique maximizer of ``ell(w) - 1/2 ||w||_b^2`` over ``cone``."""
    require_norm(b)
    best: KKTCertificate | None = None
    best_value: Fraction | None = None
    for selection in ell.selections() or [()]:
        functional = ell.selected(selection)
        constraints = [*cone.halfspaces, *ell.region_constraints(selection)]
        certificate = _solve_selection(functional, constraints, cone.span_basis, b, tuple(selection))
        w = certificate.maximizer
        value = ell.value(w) - norm_sq(w, b) / 2
        if best_value is None or value > best_value:
            best, best_value = certificate, value
    assert best is not None and best_value is not None
    w = best.maximizer
    return OptResult(
        cone_id=cone.cone_id,
        maximizer=w,
        value=best_value,
        mu_squared=norm_sq(w, b),
        active_face=cone.tight_halfspaces(w),
        on_boundary=not cone.in_relative_interior(w),
        certificate=best,
    )


def max_ratio_on_cone(ell: PiecewiseLinearConcave, b: Matrix, cone: Cone) -> OptResult:
    """``mu_max = max ell(w) / ||w||_b``; a zero quadratic maximizer certifies ``ell <= 0`` on the cone."""
    result = max_quadratic_on_cone(ell, b, cone)
    if not linalg.is_zero(result.maximizer):
        return result
    evidence: list[str] = []
    for selection in ell.selections() or [()]:
        functional = ell.selected(selection)
        region = Cone.from_halfspaces(
            cone.span_equations, [*cone.halfspaces, *ell.region_constraints(selection)], cone.ambient
        )
        values = [linalg.dot(functional, g) for g in region.generators]
        if any(v > 0 for v in values):
            raise NoKKTPointError("A generator with positive value contradicts the zero maximizer.")
        evidence.append(f"selection {list(selection)}: max over {len(values)} generators is {max(values, default=0)}")
    return OptResult(
        cone_id=result.cone_id,
        maximizer=result.maximizer,
        value=result.value,
        mu_squared=Fraction(0),
        active_face=result.active_face,
        on_boundary=result.on_boundary,
        certificate=result.certificate,
        nonpositive=True,
        nonpositive_certificate=tuple(evidence),
    )


def hn_over_fan(problems: Sequence[tuple[Cone, PiecewiseLinearConcave]], b: Matrix) -> OptResult:
    if not problems:
        raise EmptyConeListError("hn_over_fan needs at least one cone.")
    best: OptResult | None = None
    for cone, ell in sorted(problems, key=lambda item: item[0].cone_id):
        result = max_ratio_on_cone(ell, b, cone)
        if best is None or (best.nonpositive and not result.nonpositive) or \
                (not result.nonpositive and result.mu_squared > best.mu_squared):
            best = result
    assert best is not None
    logger.info("HN optimum on cone %d with mu^2 = %s", best.cone_id, best.mu_squared)
    return best


@dataclass(frozen=True, slots=True)
class MovementCheck:
    ratio_squared: Fraction
    bound_squared: Fraction

    @property
    def holds(self) -> bool:
        return self.ratio_squared <= self.bound_squared


def movement_bound_check(
    f_v: Matrix,
    d: Vector,
    b: Matrix,
    cone: Cone,
    sigma_gen: Sequence[Vector],
    sigma_mrk: Sequence[Vector],
    delta: tuple[Fraction, Fraction],
    gamma: tuple[Fraction, Fraction],
) -> MovementCheck:
    """Compare the maximizers for ``delta = (gen, mrk)`` and ``gamma`` against ``c |delta - gamma|_1``."""
    l1 = abs(delta[0] - gamma[0]) + abs(delta[1] - gamma[1])
    bound = max((dual_norm_sq(chi, b) for chi in (*sigma_gen, *sigma_mrk)), default=Fraction(0))
    if l1 == 0:
        return MovementCheck(Fraction(0), bound)
    w_delta = max_quadratic_on_cone(
        numerical_invariant_functional(f_v, d, delta_gen=delta[0], sigma_gen=sigma_gen,
                                       delta_mrk=delta[1], sigma_mrk=sigma_mrk), b, cone,
    ).maximizer
    w_gamma = max_quadratic_on_cone(
        numerical_invariant_functional(f_v, d, delta_gen=gamma[0], sigma_gen=sigma_gen,
                                       delta_mrk=gamma[1], sigma_mrk=sigma_mrk), b, cone,
    ).maximizer
    ratio = norm_sq(linalg.sub(w_delta, w_gamma), b) / (l1 * l1)
    return MovementCheck(ratio, bound)


@dataclass(frozen=True, slots=True)
class DistanceCheck:
    constant_squared: Fraction
    holds: bool
    failing_roots: tuple[int, ...]


def distance_to_cone_check(
    datum: RootDatum,
    parabolic: ParabolicType,
    b: Matrix,
    h: Fraction,
    w1: Vector,
    w2: Vector,
) -> DistanceCheck:
    """For ``w1`` with ``alpha_j(w1) >= h`` on ``I_P``, check ``alpha_j(w2) >= h - c_1 ||w2 - w1||_b``."""
    indices = sorted(parabolic.indices)
    if any(linalg.dot(w1, datum.roots[j]) < h for j in indices):
        raise MathPreconditionError("w1 must lie in h rho_P^vee + sigma_P.")
    c1_sq = max((dual_norm_sq(datum.roots[j], b) for j in indices), default=Fraction(0))
    distance_sq = norm_sq(linalg.sub(w2, w1), b)
    failing = tuple(
        j for j in indices
        if linalg.dot(w2, datum.roots[j]) < h
        and (h - linalg.dot(w2, datum.roots[j])) ** 2 > c1_sq * distance_sq
    )
    return DistanceCheck(c1_sq, not failing, failing)


__all__ = [
    "DistanceCheck",
    "EmptyConeListError",
    "KKTCertificate",
    "MovementCheck",
    "NoKKTPointError",
    "OptResult",
    "PiecewiseLinearConcave",
    "distance_to_cone_check",
    "hn_over_fan",
    "max_quadratic_on_cone",
    "max_ratio_on_cone",
    "movement_bound_check",
    "numerical_invariant_functional",
]
