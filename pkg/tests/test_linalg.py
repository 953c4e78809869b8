from __future__ import annotations

from fractions import Fraction

import pytest

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError


def test_inverse_of_unimodular_matrix_is_exact():
    a = linalg.mat([[2, 1], [1, 1]])

    assert linalg.det(a) == 1
    assert linalg.inverse(a) == linalg.mat([[1, -1], [-1, 2]])
    assert linalg.matmul(a, linalg.inverse(a)) == linalg.identity(2)


def test_singular_matrix_has_no_inverse():
    with pytest.raises(linalg.SingularLatticeMapError):
        linalg.inverse(linalg.mat([[1, 2], [2, 4]]))


def test_rationals_parse_from_strings_and_reject_booleans():
    assert linalg.vec(["3/2", 1]) == (Fraction(3, 2), Fraction(1))
    with pytest.raises(TypeError):
        linalg.to_fraction(True)


def test_b_orthogonal_projection():
    b = linalg.mat([[2, 0], [0, 1]])
    v = linalg.vec([3, 4])

    assert linalg.project([linalg.vec([1, 0])], b, v) == linalg.vec([3, 0])
    # projection onto the diagonal with respect to b = diag(2, 1): (2*3 + 4) / 3
    assert linalg.project([linalg.vec([1, 1])], b, v) == linalg.vec(["10/3", "10/3"])


def test_nullspace_and_complement_equations():
    kernel = linalg.nullspace([linalg.vec([1, 1])], 2)

    assert len(kernel) == 1
    assert linalg.dot(kernel[0], linalg.vec([1, 1])) == 0
    assert linalg.nullspace([], 2) == list(linalg.identity(2))


def test_solve_returns_none_when_inconsistent():
    a = linalg.mat([[1, 1], [2, 2]])

    assert linalg.solve(a, linalg.vec([1, 3])) is None
    x = linalg.solve(a, linalg.vec([1, 2]))
    assert linalg.matvec(a, x) == linalg.vec([1, 2])


def test_primitive_integer_clears_denominators():
    assert linalg.primitive_integer(linalg.vec(["2/3", "4/3"])) == (1, 2)
    assert linalg.primitive_integer(linalg.vec([-6, 4])) == (-3, 2)
    with pytest.raises(MathPreconditionError):
        linalg.primitive_integer(linalg.zero_vector(2))


def test_smith_decomposition_diagonalizes():
    a = linalg.mat([[2, 4], [6, 8]])
    diagonal, s, t = linalg.smith_decomposition(a)

    product = linalg.matmul(linalg.matmul(s, a), t)
    assert [abs(product[i][i]) for i in range(2)] == [abs(x) for x in diagonal]
    assert product[0][1] == product[1][0] == 0
    assert abs(linalg.det(s)) == abs(linalg.det(t)) == 1


def test_integral_kernel_basis_is_saturated():
    basis = linalg.integral_kernel_basis([linalg.vec([2, 2])], 2)

    assert len(basis) == 1
    assert abs(basis[0][0]) == abs(basis[0][1]) == 1
    assert basis[0][0] == -basis[0][1]


def test_lattice_plus_span_membership():
    span = [linalg.vec([1, 1])]

    assert linalg.in_lattice_plus_span(linalg.vec(["1/2", "1/2"]), span)
    assert linalg.in_lattice_plus_span(linalg.vec(["3/2", "1/2"]), span)
    assert not linalg.in_lattice_plus_span(linalg.vec(["1/2", 0]), span)
    assert not linalg.in_lattice_plus_span(linalg.vec(["1/2"]), [])
