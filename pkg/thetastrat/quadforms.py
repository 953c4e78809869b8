"""Quadratic forms on N_Q, weighted representations and the maps phi = b^-1 F."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Iterable, Sequence

import sympy

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.fans import arrangement_faces, build_arrangement
from thetastrat.linalg import Matrix, Vector
from thetastrat.rootdata import RootDatum

logger = logging.getLogger("thetastrat.quadforms")

ENCLOSURE_WIDTH = Fraction(1, 10**10)
SQRT_DENOMINATOR = 10**12


class DegenerateFormError(MathPreconditionError):
    """Raised when a form that must be positive definite is not."""


class NotSelfAdjointError(MathPreconditionError):
    """Raised when a self-map is not self-adjoint for the given norm."""


@dataclass(frozen=True, slots=True)
class Enclosure:
    """Certified rational interval."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("Enclosure bounds are reversed.")

    @classmethod
    def exact(cls, value: Fraction | int) -> "Enclosure":
        return cls(Fraction(value), Fraction(value))

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __mul__(self, other: "Enclosure") -> "Enclosure":
        products = [self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi]
        return Enclosure(min(products), max(products))

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def square(self) -> "Enclosure":
        if self.lo >= 0:
            return Enclosure(self.lo**2, self.hi**2)
        return Enclosure(Fraction(0), max(self.lo**2, self.hi**2))

    def sqrt(self) -> "Enclosure":
        if self.lo < 0:
            raise MathPreconditionError("Square root of a possibly negative enclosure.")
        return Enclosure(sqrt_bounds(self.lo)[0], sqrt_bounds(self.hi)[1])

    def maximum(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(max(self.lo, other.lo), max(self.hi, other.hi))

    def to_float(self) -> float:
        return float(self.midpoint)

    def to_json(self) -> dict[str, str | float]:
        return {"lo": str(self.lo), "hi": str(self.hi), "float": self.to_float()}


def sqrt_bounds(value: Fraction) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= sqrt(value) <= hi``; exact when ``value`` is a rational square."""
    if value < 0:
        raise MathPreconditionError("Square root of a negative number.")
    p, q = value.numerator, value.denominator
    rp, rq = isqrt(p), isqrt(q)
    if rp * rp == p and rq * rq == q:
        root = Fraction(rp, rq)
        return root, root
    d = SQRT_DENOMINATOR
    lo = Fraction(isqrt(p * d * d // q), d)
    return lo, lo + Fraction(1, d)


@dataclass(frozen=True, slots=True)
class WeightedRep:
    """Multiset of weights in M with integer multiplicities (negative for virtual classes)."""

    terms: tuple[tuple[Vector, int], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Iterable[object], int]]) -> "WeightedRep":
        merged: dict[Vector, int] = {}
        for weight, mult in pairs:
            key = linalg.vec(weight)
            if not linalg.is_integral(key):
                raise MathPreconditionError(f"Weight {[str(x) for x in key]} is not integral.")
            merged[key] = merged.get(key, 0) + int(mult)
        return cls(tuple(sorted((w, m) for w, m in merged.items() if m != 0)))

    @classmethod
    def from_weights(cls, weights: Iterable[Iterable[object]]) -> "WeightedRep":
        return cls.from_pairs((w, 1) for w in weights)

    @classmethod
    def empty(cls) -> "WeightedRep":
        return cls(())

    @classmethod
    def adjoint(cls, datum: RootDatum) -> "WeightedRep":
        return cls.from_pairs([*((alpha, 1) for alpha in datum.all_roots),
                               (linalg.zero_vector(datum.rank), datum.rank)])

    @classmethod
    def shifted_roots(cls, datum: RootDatum) -> "WeightedRep":
        """Nonzero weights of ``g[1]``: every root with multiplicity -1."""
        return cls.from_pairs((alpha, -1) for alpha in datum.all_roots)

    def __add__(self, other: "WeightedRep") -> "WeightedRep":
        return WeightedRep.from_pairs([*self.terms, *other.terms])

    def __neg__(self) -> "WeightedRep":
        return WeightedRep(tuple((w, -m) for w, m in self.terms))

    def __sub__(self, other: "WeightedRep") -> "WeightedRep":
        return self + (-other)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def times(self, m: int) -> "WeightedRep":
        return WeightedRep.from_pairs((w, mult * m) for w, mult in self.terms)

    def dual(self) -> "WeightedRep":
        return WeightedRep.from_pairs((linalg.scale(-1, w), m) for w, m in self.terms)

    def adams(self, p: int) -> "WeightedRep":
        return WeightedRep.from_pairs((linalg.scale(p, w), m) for w, m in self.terms)

    def restrict(self, keep: Callable[[Vector], bool]) -> "WeightedRep":
        return WeightedRep(tuple((w, m) for w, m in self.terms if keep(w)))

    def twist(self, character: Vector) -> "WeightedRep":
        return WeightedRep.from_pairs((linalg.add(w, character), m) for w, m in self.terms)

    @property
    def weights(self) -> list[Vector]:
        return [w for w, _ in self.terms]

    @property
    def dimension(self) -> int:
        return sum(m for _, m in self.terms)

    def determinant_character(self, rank: int) -> Vector:
        total = linalg.zero_vector(rank)
        for w, m in self.terms:
            total = linalg.add(total, linalg.scale(m, w))
        return total

    def to_json(self) -> list[dict[str, object]]:
        return [{"weight": [str(x) for x in w], "mult": m} for w, m in self.terms]


def ch2_form(rep: WeightedRep, rank: int) -> Matrix:
    """``(w1, w2)_F = sum mult * beta(w1) beta(w2)``."""
    total = linalg.zero_matrix(rank)
    for beta, mult in rep:
        total = linalg.mat_add(total, linalg.mat_scale(mult, linalg.outer(beta, beta)))
    return total


def is_positive_definite(b: Matrix) -> bool:
    return not b or bool(linalg.to_sympy(b).is_positive_definite)


def is_weyl_invariant_form(datum: RootDatum, b: Matrix) -> bool:
    return all(
        linalg.matmul(linalg.matmul(linalg.transpose(s), b), s) == b
        for s in (datum.simple_reflection(i) for i in range(datum.semisimple_rank))
    )


def require_norm(b: Matrix) -> None:
    if not linalg.is_symmetric(b):
        raise DegenerateFormError("The norm must be a symmetric matrix.")
    if not is_positive_definite(b):
        raise DegenerateFormError("The norm must be positive definite.")


def central_projector(datum: RootDatum) -> Matrix:
    """Projector onto ``N^W_Q`` along the span of the coroots; W-equivariant."""
    center = datum.central_basis
    if not center:
        return linalg.zero_matrix(datum.rank)
    columns = linalg.transpose(tuple([*center, *datum.coroots]))
    coordinates = linalg.inverse(columns)
    return linalg.matmul(linalg.transpose(tuple(center)), coordinates[: len(center)])


def default_norm(datum: RootDatum) -> Matrix:
    """``ch2`` of the adjoint on the semisimple part plus the standard form on the center."""
    killing = ch2_form(WeightedRep.adjoint(datum), datum.rank)
    if not datum.central_basis:
        return killing
    projector = central_projector(datum)
    return linalg.mat_add(killing, linalg.matmul(linalg.transpose(projector), projector))


def phi_of(f: Matrix, b: Matrix) -> Matrix:
    return linalg.matmul(linalg.inverse(b), f)


def dagger(chi: Vector, b: Matrix) -> Vector:
    return linalg.matvec(linalg.inverse(b), chi)


def lower(w: Vector, b: Matrix) -> Vector:
    return linalg.matvec(b, w)


def norm_sq(w: Vector, b: Matrix) -> Fraction:
    return linalg.bilinear(b, w, w)


def dual_norm_sq(chi: Vector, b: Matrix) -> Fraction:
    return linalg.dot(chi, dagger(chi, b))


def is_self_adjoint(phi: Matrix, b: Matrix) -> bool:
    return linalg.is_symmetric(linalg.matmul(b, phi))


def kernel_projector(phi: Matrix, b: Matrix) -> Matrix:
    return linalg.b_projector(linalg.nullspace(phi, len(phi)), b)


def pseudoinverse(phi: Matrix, b: Matrix) -> Matrix:
    """``phi^+ = (phi + Q)^-1 - Q`` with ``Q`` the b-orthogonal projector onto ``ker phi``."""
    if not is_self_adjoint(phi, b):
        raise NotSelfAdjointError("phi must be self-adjoint for the norm to have a pseudoinverse.")
    q = kernel_projector(phi, b)
    return linalg.mat_sub(linalg.inverse(linalg.mat_add(phi, q)), q)


def in_image(phi: Matrix, v: Vector) -> bool:
    return linalg.solve(phi, v) is not None


def operator_norm(phi: Matrix, b: Matrix, width: Fraction = ENCLOSURE_WIDTH) -> Enclosure:
    """Largest |eigenvalue| of a b-self-adjoint map, as a certified enclosure at most ``width`` wide."""
    if not phi:
        return Enclosure.exact(0)
    if not is_self_adjoint(phi, b):
        raise NotSelfAdjointError("Operator norm needs a self-adjoint map.")
    x = sympy.Symbol("x")
    poly = sympy.Poly(linalg.to_sympy(phi).charpoly(x).as_expr(), x, domain="QQ")
    result = Enclosure.exact(0)
    for (lo, hi), _mult in poly.intervals(eps=sympy.Rational(width.numerator, width.denominator)):
        a, c = linalg.to_fraction(lo), linalg.to_fraction(hi)
        magnitude = Enclosure(Fraction(0) if a <= 0 <= c else min(abs(a), abs(c)), max(abs(a), abs(c)))
        result = result.maximum(magnitude)
    return result


def row_sum_bound(phi: Matrix) -> Fraction:
    """Max absolute row sum; bounds every eigenvalue of ``phi``."""
    return max((sum((abs(x) for x in row), Fraction(0)) for row in phi), default=Fraction(0))


def normalized_norm(b: Matrix, f_v: Matrix) -> Matrix:
    """``F_V`` on ``(ker phi_V)^perp`` plus ``b`` on ``ker phi_V``; ``phi_V`` becomes idempotent."""
    p_ker = kernel_projector(phi_of(f_v, b), b)
    return linalg.mat_add(f_v, linalg.matmul(linalg.matmul(linalg.transpose(p_ker), b), p_ker))


def tangent_complex(datum: RootDatum, x: WeightedRep) -> WeightedRep:
    """Nonzero weights of ``T = X ⊕ g[1]``."""
    return x + WeightedRep.shifted_roots(datum)


def negative_part(rep: WeightedRep, lam: Vector) -> WeightedRep:
    return rep.restrict(lambda w: linalg.dot(lam, w) < 0)


def positive_part(rep: WeightedRep, lam: Vector) -> WeightedRep:
    return rep.restrict(lambda w: linalg.dot(lam, w) > 0)


def c_XV(datum: RootDatum, x: WeightedRep, v: WeightedRep, b: Matrix) -> Enclosure:
    """``||phi_V^+||_b`` times the largest ``||phi_{T^{lambda<0}}||_b`` over the faces of the arrangement."""
    n = datum.rank
    phi_plus = pseudoinverse(phi_of(ch2_form(v, n), b), b)
    tangent = tangent_complex(datum, x)
    arrangement = build_arrangement([*tangent.weights], n)
    faces = [
        phi_of(ch2_form(part, n), b)
        for part in (negative_part(tangent, face.point) for face in arrangement_faces(arrangement))
        if len(part)
    ]
    # factor widths shrink so the product stays within ENCLOSURE_WIDTH
    width = ENCLOSURE_WIDTH / (row_sum_bound(phi_plus) + max(map(row_sum_bound, faces), default=Fraction(0)) + 1)
    worst = Enclosure.exact(0)
    for phi in faces:
        worst = worst.maximum(operator_norm(phi, b, width))
    value = operator_norm(phi_plus, b, width) * worst
    logger.debug("c_XV enclosure [%s, %s]", value.lo, value.hi)
    return value


__all__ = [
    "DegenerateFormError",
    "Enclosure",
    "NotSelfAdjointError",
    "WeightedRep",
    "c_XV",
    "central_projector",
    "ch2_form",
    "dagger",
    "default_norm",
    "dual_norm_sq",
    "in_image",
    "is_positive_definite",
    "is_self_adjoint",
    "is_weyl_invariant_form",
    "kernel_projector",
    "lower",
    "negative_part",
    "norm_sq",
    "normalized_norm",
    "operator_norm",
    "row_sum_bound",
    "phi_of",
    "positive_part",
    "pseudoinverse",
    "require_norm",
    "sqrt_bounds",
    "tangent_complex",
]
