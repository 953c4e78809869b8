"""Root data, Weyl groups, standard parabolics and lattice coset representatives."""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from math import lcm
from typing import Iterable, Sequence

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.linalg import Matrix, Vector

logger = logging.getLogger("thetastrat.rootdata")

DEFAULT_WEYL_CAP = 100_000
_TYPE_PATTERN = re.compile(r"^(A|B|C|D|G|GL|T)(\d+)$")


class InvalidCartanMatrixError(MathPreconditionError):
    """Raised when simple roots and coroots do not pair to a finite-type Cartan matrix."""


class WeylGroupTooLargeError(MathPreconditionError):
    """Raised when Weyl group enumeration exceeds the configured cap."""


class UnknownGroupTypeError(MathPreconditionError):
    """Raised when a group type tag cannot be parsed."""


def dynkin_to_cartan(series: str, rank: int) -> list[list[int]]:
    """Cartan matrix ``A_ij = <alpha_i^vee, alpha_j>`` for a connected Dynkin diagram."""
    a = [[2 if i == j else 0 for j in range(rank)] for i in range(rank)]

    def link(i: int, j: int, a_ij: int = -1, a_ji: int = -1) -> None:
        a[i][j] = a_ij
        a[j][i] = a_ji

    if series == "A":
        for i in range(rank - 1):
            link(i, i + 1)
    elif series in {"B", "C"}:
        if rank < 2:
            raise UnknownGroupTypeError(f"{series}{rank} needs rank at least 2.")
        for i in range(rank - 2):
            link(i, i + 1)
        # final simple root is short for B and long for C
        if series == "B":
            link(rank - 2, rank - 1, a_ij=-1, a_ji=-2)
        else:
            link(rank - 2, rank - 1, a_ij=-2, a_ji=-1)
    elif series == "D":
        if rank < 3:
            raise UnknownGroupTypeError("D-type needs rank at least 3.")
        for i in range(rank - 2):
            link(i, i + 1)
        link(rank - 3, rank - 1)
    elif series == "G":
        if rank != 2:
            raise UnknownGroupTypeError("Only G2 exists in the G series.")
        link(0, 1, a_ij=-3, a_ji=-1)
    else:
        raise UnknownGroupTypeError(f"Unsupported Dynkin series '{series}'.")
    return a


def validate_cartan(a: Sequence[Sequence[Fraction]]) -> None:
    size = len(a)
    for i in range(size):
        if a[i][i] != 2:
            raise InvalidCartanMatrixError(f"Diagonal entry {i} of the Cartan matrix is {a[i][i]}, not 2.")
        for j in range(size):
            if i == j:
                continue
            if a[i][j].denominator != 1 or a[i][j] > 0:
                raise InvalidCartanMatrixError(f"Off-diagonal entry ({i}, {j}) must be a nonpositive integer.")
            if (a[i][j] == 0) != (a[j][i] == 0):
                raise InvalidCartanMatrixError(f"Entries ({i}, {j}) and ({j}, {i}) must vanish together.")
            if a[i][j] * a[j][i] > 3:
                raise InvalidCartanMatrixError(f"Entries ({i}, {j}) describe an affine or hyperbolic bond.")
    for k in range(1, size + 1):
        minor = tuple(tuple(row[:k]) for row in a[:k])
        if linalg.det(minor) <= 0:
            raise InvalidCartanMatrixError("The Cartan matrix is not of finite type.")


@dataclass(frozen=True)
class RootDatum:
    """Coroots live in ``N = Z^n``, roots in ``M = Z^n``, paired by the dot product."""

    name: str
    rank: int
    coroots: Matrix
    roots: Matrix
    weyl_cap: int = DEFAULT_WEYL_CAP

    @property
    def semisimple_rank(self) -> int:
        return len(self.roots)

    @cached_property
    def cartan(self) -> Matrix:
        return tuple(tuple(linalg.dot(c, r) for r in self.roots) for c in self.coroots)

    @cached_property
    def cartan_inverse(self) -> Matrix:
        return linalg.inverse(self.cartan)

    @cached_property
    def fundamental_coweights(self) -> Matrix:
        l = self.semisimple_rank
        return tuple(
            reduce(linalg.add, (linalg.scale(self.cartan_inverse[i][k], self.coroots[k]) for k in range(l)),
                   linalg.zero_vector(self.rank))
            for i in range(l)
        )

    @cached_property
    def fundamental_weights(self) -> Matrix:
        l = self.semisimple_rank
        return tuple(
            reduce(linalg.add, (linalg.scale(self.cartan_inverse[k][i], self.roots[k]) for k in range(l)),
                   linalg.zero_vector(self.rank))
            for i in range(l)
        )

    @cached_property
    def central_basis(self) -> list[Vector]:
        """Rational basis of ``N^W_Q``, the annihilator of the roots."""
        return linalg.nullspace(self.roots, self.rank)

    @cached_property
    def central_lattice_basis(self) -> list[Vector]:
        """Z-basis of ``N ∩ N^W``."""
        return [linalg.vec(v) for v in linalg.integral_kernel_basis(self.roots, self.rank)]

    @cached_property
    def invariant_characters(self) -> list[Vector]:
        """Z-basis of ``M^W``, characters vanishing on every coroot."""
        return [linalg.vec(v) for v in linalg.integral_kernel_basis(self.coroots, self.rank)]

    def simple_reflection(self, i: int) -> Matrix:
        """Matrix of ``s_i`` acting on column vectors of ``N``."""
        return linalg.mat_sub(linalg.identity(self.rank), linalg.outer(self.coroots[i], self.roots[i]))

    def simple_reflection_dual(self, i: int) -> Matrix:
        """Matrix of ``s_i`` acting on column vectors of ``M``."""
        return linalg.mat_sub(linalg.identity(self.rank), linalg.outer(self.roots[i], self.coroots[i]))

    def reflect_coweight(self, i: int, v: Vector) -> Vector:
        return linalg.sub(v, linalg.scale(linalg.dot(v, self.roots[i]), self.coroots[i]))

    def reflect_weight(self, i: int, m: Vector) -> Vector:
        return linalg.sub(m, linalg.scale(linalg.dot(self.coroots[i], m), self.roots[i]))

    @cached_property
    def weyl_group(self) -> list[Matrix]:
        return enumerate_weyl_group(self, range(self.semisimple_rank))

    @cached_property
    def weyl_group_dual(self) -> list[Matrix]:
        """The same elements as ``weyl_group`` acting on ``M`` (inverse transposes)."""
        return [linalg.transpose(linalg.inverse(w)) for w in self.weyl_group]

    @cached_property
    def all_roots(self) -> list[Vector]:
        found: set[Vector] = set()
        for alpha in self.roots:
            found.update(linalg.matvec(w, alpha) for w in self.weyl_group_dual)
        return sorted(found)

    @cached_property
    def rho_coweight(self) -> Vector:
        return reduce(linalg.add, self.fundamental_coweights, linalg.zero_vector(self.rank))

    @cached_property
    def positive_roots(self) -> list[Vector]:
        return [alpha for alpha in self.all_roots if linalg.dot(self.rho_coweight, alpha) > 0]

    @cached_property
    def rho(self) -> Vector:
        total = reduce(linalg.add, self.positive_roots, linalg.zero_vector(self.rank))
        return linalg.scale(Fraction(1, 2), total)

    @property
    def weyl_order(self) -> int:
        return len(self.weyl_group)

    def is_dominant(self, v: Vector) -> bool:
        return all(linalg.dot(v, alpha) >= 0 for alpha in self.roots)

    def is_central(self, v: Vector) -> bool:
        return all(linalg.dot(v, alpha) == 0 for alpha in self.roots)

    def is_weyl_invariant_character(self, chi: Vector) -> bool:
        return all(linalg.dot(c, chi) == 0 for c in self.coroots)

    def central_projection_coordinates(self, v: Vector) -> Vector:
        """Coordinates ``(<z_k, m>)_k`` of a character against the integral central basis."""
        return tuple(linalg.dot(z, v) for z in self.central_lattice_basis)


@dataclass(frozen=True, slots=True)
class ParabolicType:
    datum: RootDatum
    indices: frozenset[int]

    def __post_init__(self) -> None:
        l = self.datum.semisimple_rank
        if any(i < 0 or i >= l for i in self.indices):
            raise MathPreconditionError(f"Parabolic index set {sorted(self.indices)} is out of range.")

    @classmethod
    def borel(cls, datum: RootDatum) -> "ParabolicType":
        return cls(datum, frozenset(range(datum.semisimple_rank)))

    @classmethod
    def whole_group(cls, datum: RootDatum) -> "ParabolicType":
        return cls(datum, frozenset())

    @property
    def levi_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.datum.semisimple_rank) if i not in self.indices)

    @property
    def rho_coweight(self) -> Vector:
        coweights = self.datum.fundamental_coweights
        return reduce(linalg.add, (coweights[j] for j in sorted(self.indices)), linalg.zero_vector(self.datum.rank))

    @property
    def weyl_group(self) -> list[Matrix]:
        return enumerate_weyl_group(self.datum, self.levi_indices)


def enumerate_weyl_group(datum: RootDatum, generators: Iterable[int]) -> list[Matrix]:
    gens = [datum.simple_reflection(i) for i in generators]
    start = linalg.identity(datum.rank)
    seen = {start}
    frontier = [start]
    while frontier:
        next_frontier: list[Matrix] = []
        for element in frontier:
            for g in gens:
                product = linalg.matmul(g, element)
                if product not in seen:
                    seen.add(product)
                    next_frontier.append(product)
                    if len(seen) > datum.weyl_cap:
                        raise WeylGroupTooLargeError(
                            f"Weyl group of {datum.name} exceeds the cap of {datum.weyl_cap} elements."
                        )
        frontier = next_frontier
    logger.debug("Enumerated %d Weyl elements for %s", len(seen), datum.name)
    return sorted(seen)


def weyl_orbit(datum: RootDatum, v: Vector) -> list[Vector]:
    orbit = {tuple(v)}
    frontier = [tuple(v)]
    while frontier:
        next_frontier = []
        for u in frontier:
            for i in range(datum.semisimple_rank):
                image = datum.reflect_coweight(i, u)
                if image not in orbit:
                    orbit.add(image)
                    next_frontier.append(image)
        frontier = next_frontier
    return sorted(orbit)


def order_of(matrix: Matrix, limit: int = 10_000) -> int:
    n = len(matrix)
    identity = linalg.identity(n)
    power = matrix
    for k in range(1, limit + 1):
        if power == identity:
            return k
        power = linalg.matmul(power, matrix)
    raise MathPreconditionError("Matrix has no finite order within the search limit.")


def coxeter_element_order(datum: RootDatum, subset: Sequence[int]) -> int:
    product = linalg.identity(datum.rank)
    for j in subset:
        product = linalg.matmul(product, datum.simple_reflection(j))
    return order_of(product)


def coxeter_H(datum: RootDatum) -> int:
    """lcm of Coxeter numbers of all standard parabolic subgroups (1 for a torus)."""
    l = datum.semisimple_rank
    orders = [
        coxeter_element_order(datum, subset)
        for size in range(1, l + 1)
        for subset in itertools.combinations(range(l), size)
    ]
    return reduce(lcm, orders, 1)


def levi_datum(datum: RootDatum, simple_subset: Iterable[int]) -> RootDatum:
    subset = sorted(set(simple_subset))
    label = ",".join(str(j) for j in subset)
    return RootDatum(
        name=f"{datum.name}[L:{label}]",
        rank=datum.rank,
        coroots=tuple(datum.coroots[j] for j in subset),
        roots=tuple(datum.roots[j] for j in subset),
        weyl_cap=datum.weyl_cap,
    )


@dataclass(frozen=True, slots=True)
class CosetRepresentatives:
    """Representatives of ``Z^n / B Z^n`` from ``D = S B T``."""

    lattice: Matrix
    diagonal: tuple[int, ...]
    left: Matrix
    left_inverse: Matrix
    representatives: tuple[Vector, ...] = field(default=())

    @property
    def index(self) -> int:
        return len(self.representatives)

    def reduce(self, y: Vector) -> Vector:
        x = linalg.matvec(self.left, y)
        reduced = tuple(Fraction(int(xi) % d) for xi, d in zip(x, self.diagonal, strict=True))
        return linalg.matvec(self.left_inverse, reduced)


def coset_representatives(b: Matrix) -> CosetRepresentatives:
    if not b:
        return CosetRepresentatives((), (), (), (), ((),))
    if linalg.det(b) == 0:
        raise linalg.SingularLatticeMapError("Coset representatives need a nonsingular lattice map.")
    diagonal, s, _t = linalg.smith_decomposition(b)
    sizes = tuple(abs(d) for d in diagonal)
    s_inverse = linalg.inverse(s)
    reps = tuple(
        linalg.matvec(s_inverse, linalg.vec(box))
        for box in itertools.product(*(range(d) for d in sizes))
    )
    return CosetRepresentatives(b, sizes, s, s_inverse, reps)


def reduce_mod_lattice(b: Matrix, y: Vector) -> Vector:
    if not linalg.is_integral(y):
        raise MathPreconditionError("Only integer vectors have a class modulo the lattice.")
    return coset_representatives(b).reduce(y)


def _block_sum(parts: Sequence[RootDatum], name: str) -> RootDatum:
    rank = sum(part.rank for part in parts)
    coroots: list[Vector] = []
    roots: list[Vector] = []
    offset = 0
    for part in parts:
        pad_left = linalg.zero_vector(offset)
        pad_right = linalg.zero_vector(rank - offset - part.rank)
        coroots.extend(pad_left + c + pad_right for c in part.coroots)
        roots.extend(pad_left + r + pad_right for r in part.roots)
        offset += part.rank
    return RootDatum(name=name, rank=rank, coroots=tuple(coroots), roots=tuple(roots))


def _single_type(tag: str) -> RootDatum:
    match = _TYPE_PATTERN.fullmatch(tag)
    if not match:
        raise UnknownGroupTypeError(f"Unrecognized group type '{tag}'.")
    series, size = match.group(1), int(match.group(2))
    if size < 1:
        raise UnknownGroupTypeError(f"Group type '{tag}' needs positive rank.")
    if series == "T":
        return RootDatum(name=tag, rank=size, coroots=(), roots=())
    if series == "GL":
        simple = tuple(
            linalg.vec([1 if k == i else -1 if k == i + 1 else 0 for k in range(size)]) for i in range(size - 1)
        )
        return RootDatum(name=tag, rank=size, coroots=simple, roots=simple)
    # simply connected form: coroots are the standard basis of N
    a = dynkin_to_cartan(series, size)
    coroots = linalg.identity(size)
    roots = tuple(linalg.vec([a[i][j] for i in range(size)]) for j in range(size))
    return RootDatum(name=tag, rank=size, coroots=coroots, roots=roots)


def build_root_datum(
    type_tag: str | None = None,
    *,
    coroots: Sequence[Sequence[object]] | None = None,
    roots: Sequence[Sequence[object]] | None = None,
    rank: int | None = None,
    weyl_cap: int = DEFAULT_WEYL_CAP,
) -> RootDatum:
    """Build a root datum from a type tag such as ``A2`` or ``A1xGL1``, or from explicit matrices."""
    if type_tag is not None:
        parts = [_single_type(tag.strip()) for tag in type_tag.split("x")]
        datum = parts[0] if len(parts) == 1 else _block_sum(parts, type_tag)
    else:
        if rank is None:
            raise UnknownGroupTypeError("Explicit root data need a rank.")
        coroot_rows = linalg.mat(coroots or ())
        root_rows = linalg.mat(roots or ())
        if len(coroot_rows) != len(root_rows):
            raise InvalidCartanMatrixError("Simple roots and coroots must come in equal numbers.")
        if any(len(row) != rank for row in (*coroot_rows, *root_rows)):
            raise InvalidCartanMatrixError(f"Every simple root and coroot must have {rank} coordinates.")
        if not linalg.is_integral(x for row in (*coroot_rows, *root_rows) for x in row):
            raise InvalidCartanMatrixError("Simple roots and coroots must be integral.")
        datum = RootDatum(name="custom", rank=rank, coroots=coroot_rows, roots=root_rows)
    datum = RootDatum(datum.name, datum.rank, datum.coroots, datum.roots, weyl_cap)
    if datum.semisimple_rank:
        validate_cartan(datum.cartan)
    _ = datum.weyl_group
    logger.info("Root datum %s: rank %d, |W| = %d", datum.name, datum.rank, datum.weyl_order)
    return datum


__all__ = [
    "CosetRepresentatives",
    "DEFAULT_WEYL_CAP",
    "InvalidCartanMatrixError",
    "ParabolicType",
    "RootDatum",
    "UnknownGroupTypeError",
    "WeylGroupTooLargeError",
    "build_root_datum",
    "coset_representatives",
    "coxeter_H",
    "coxeter_element_order",
    "dynkin_to_cartan",
    "enumerate_weyl_group",
    "levi_datum",
    "order_of",
    "reduce_mod_lattice",
    "validate_cartan",
    "weyl_orbit",
]
