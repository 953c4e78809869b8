"""Exact rational linear algebra shared by the stratification engines.

Vectors are tuples of ``Fraction``; matrices are row-major tuples of vectors.
Anything beyond elementwise arithmetic is delegated to sympy.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

import sympy
from sympy import ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from thetastrat.errors import MathPreconditionError

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


class SingularLatticeMapError(MathPreconditionError):
    """Raised when a matrix that must be invertible is singular."""


def to_fraction(value: object) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("Booleans are not rational numbers.")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, sympy.Basic) and value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"Cannot interpret {value!r} as an exact rational.")


def vec(values: Iterable[object]) -> Vector:
    return tuple(to_fraction(value) for value in values)


def mat(rows: Iterable[Iterable[object]]) -> Matrix:
    return tuple(vec(row) for row in rows)


def zero_vector(n: int) -> Vector:
    return (Fraction(0),) * n


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zero_matrix(n: int, m: int | None = None) -> Matrix:
    return tuple((Fraction(0),) * (n if m is None else m) for _ in range(n))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v, strict=True)), Fraction(0))


def add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def scale(c: Fraction | int, u: Vector) -> Vector:
    return tuple(c * a for a in u)


def is_zero(u: Sequence[Fraction]) -> bool:
    return all(a == 0 for a in u)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matvec(a: Matrix, v: Vector) -> Vector:
    return tuple(dot(row, v) for row in a)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    columns = transpose(b)
    return tuple(tuple(dot(row, column) for column in columns) for row in a)


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(add(r, s) for r, s in zip(a, b, strict=True))


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(sub(r, s) for r, s in zip(a, b, strict=True))


def mat_scale(c: Fraction | int, a: Matrix) -> Matrix:
    return tuple(scale(c, row) for row in a)


def outer(u: Vector, v: Vector) -> Matrix:
    return tuple(tuple(a * b for b in v) for a in u)


def bilinear(b: Matrix, u: Vector, v: Vector) -> Fraction:
    return dot(u, matvec(b, v))


def is_symmetric(a: Matrix) -> bool:
    return all(a[i][j] == a[j][i] for i in range(len(a)) for j in range(i))


def to_sympy(a: Matrix) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in a])


def from_sympy(m: sympy.Matrix) -> Matrix:
    return tuple(tuple(to_fraction(m[i, j]) for j in range(m.cols)) for i in range(m.rows))


def det(a: Matrix) -> Fraction:
    if not a:
        return Fraction(1)
    return to_fraction(to_sympy(a).det())


def inverse(a: Matrix) -> Matrix:
    if not a:
        return ()
    m = to_sympy(a)
    if m.det() == 0:
        raise SingularLatticeMapError("Matrix is singular and has no inverse.")
    return from_sympy(m.inv())


def rank(vectors: Sequence[Vector]) -> int:
    if not vectors:
        return 0
    return int(to_sympy(tuple(vectors)).rank())


def nullspace(a: Sequence[Vector], n: int) -> list[Vector]:
    """Basis of ``{x in Q^n : a x = 0}``; the full identity basis when ``a`` has no rows."""
    if not a:
        return list(identity(n))
    return [vec(column) for column in to_sympy(tuple(a)).nullspace()]


def row_basis(vectors: Sequence[Vector]) -> list[Vector]:
    """Subset of ``vectors`` forming a basis of their span, kept in order."""
    chosen: list[Vector] = []
    for v in vectors:
        if rank([*chosen, v]) > len(chosen):
            chosen.append(v)
    return chosen


def solve(a: Matrix, b: Vector) -> Vector | None:
    """One solution of ``a x = b`` or ``None`` when inconsistent."""
    if not a:
        return ()
    m = to_sympy(a)
    rhs = sympy.Matrix([sympy.Rational(x.numerator, x.denominator) for x in b])
    try:
        solution, params = m.gauss_jordan_solve(rhs)
    except ValueError:
        return None
    if params.shape[0]:
        solution = solution.subs({symbol: 0 for symbol in params})
    return vec(solution)


def gram(basis: Sequence[Vector], b: Matrix) -> Matrix:
    return tuple(tuple(bilinear(b, u, v) for v in basis) for u in basis)


def b_projector(basis: Sequence[Vector], b: Matrix) -> Matrix:
    """b-orthogonal projector ``S (S^T b S)^-1 S^T b`` onto ``span(basis)``."""
    n = len(b)
    basis = row_basis(list(basis))
    if not basis:
        return zero_matrix(n)
    g = gram(basis, b)
    if det(g) == 0:
        raise SingularLatticeMapError("The form is degenerate on the requested subspace.")
    s = transpose(tuple(basis))
    return matmul(matmul(s, inverse(g)), matmul(tuple(basis), b))


def project(basis: Sequence[Vector], b: Matrix, v: Vector) -> Vector:
    return matvec(b_projector(basis, b), v)


def complement_equations(basis: Sequence[Vector], n: int) -> list[Vector]:
    """Linear functionals cutting out ``span(basis)`` inside ``Q^n``."""
    return nullspace(list(basis), n) if basis else list(identity(n))


def denominator_lcm(values: Iterable[Fraction]) -> int:
    return reduce(lcm, (value.denominator for value in values), 1)


def is_integral(values: Iterable[Fraction]) -> bool:
    return all(value.denominator == 1 for value in values)


def primitive_integer(v: Vector) -> tuple[int, ...]:
    """Smallest positive integer multiple of ``v`` with coprime entries."""
    if is_zero(v):
        raise MathPreconditionError("The zero vector has no primitive multiple.")
    scaled = [int(x * denominator_lcm(v)) for x in v]
    common = reduce(gcd, (abs(x) for x in scaled), 0)
    return tuple(x // common for x in scaled)


def smith_decomposition(a: Matrix) -> tuple[list[int], Matrix, Matrix]:
    """Return ``(diagonal, S, T)`` with ``S a T`` diagonal and ``S``, ``T`` unimodular."""
    if not is_integral(x for row in a for x in row):
        raise MathPreconditionError("Smith normal form needs an integer matrix.")
    m = sympy.Matrix([[int(x) for x in row] for row in a])
    d, s, t = smith_normal_decomp(m, domain=ZZ)
    diagonal = [int(d[i, i]) for i in range(min(d.rows, d.cols))]
    return diagonal, from_sympy(s), from_sympy(t)


def integral_kernel_basis(rows: Sequence[Vector], n: int) -> list[tuple[int, ...]]:
    """Z-basis of the saturated lattice ``{x in Z^n : rows x = 0}``."""
    if not rows or all(is_zero(row) for row in rows):
        return [tuple(int(x) for x in row) for row in identity(n)]
    scaled = tuple(scale(denominator_lcm(row), row) for row in rows)
    diagonal, _s, t = smith_decomposition(scaled)
    r = sum(1 for x in diagonal if x != 0)
    columns = transpose(t)
    return [tuple(int(x) for x in columns[j]) for j in range(r, n)]


def in_lattice_plus_span(y: Vector, span: Sequence[Vector]) -> bool:
    """Whether ``y`` lies in ``Z^n + span_Q(span)``."""
    n = len(y)
    if not span:
        return is_integral(y)
    characters = integral_kernel_basis(list(span), n)
    return all(dot(vec(psi), y).denominator == 1 for psi in characters)


__all__ = [
    "Matrix",
    "SingularLatticeMapError",
    "Vector",
    "add",
    "b_projector",
    "bilinear",
    "complement_equations",
    "denominator_lcm",
    "det",
    "dot",
    "from_sympy",
    "gram",
    "identity",
    "in_lattice_plus_span",
    "integral_kernel_basis",
    "inverse",
    "is_integral",
    "is_symmetric",
    "is_zero",
    "mat",
    "mat_add",
    "mat_scale",
    "mat_sub",
    "matmul",
    "matvec",
    "nullspace",
    "outer",
    "primitive_integer",
    "project",
    "rank",
    "row_basis",
    "scale",
    "smith_decomposition",
    "solve",
    "sub",
    "to_fraction",
    "to_sympy",
    "transpose",
    "vec",
    "zero_matrix",
    "zero_vector",
]
