from __future__ import annotations

from fractions import Fraction

import pytest

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.rootdata import (
    InvalidCartanMatrixError,
    ParabolicType,
    UnknownGroupTypeError,
    WeylGroupTooLargeError,
    build_root_datum,
    coset_representatives,
    coxeter_H,
    levi_datum,
    reduce_mod_lattice,
    weyl_orbit,
)


@pytest.mark.parametrize(
    ("tag", "order", "positive"),
    [("A1", 2, 1), ("A2", 6, 3), ("B2", 8, 4), ("C3", 48, 9), ("G2", 12, 6), ("GL3", 6, 3), ("T2", 1, 0)],
)
def test_weyl_group_orders_and_positive_roots(tag: str, order: int, positive: int):
    datum = build_root_datum(tag)

    assert datum.weyl_order == order
    assert len(datum.positive_roots) == positive
    assert len(datum.all_roots) == 2 * positive


def test_simply_connected_a1_coordinates():
    datum = build_root_datum("A1")

    assert datum.coroots == linalg.mat([[1]])
    assert datum.roots == linalg.mat([[2]])
    assert datum.rho == linalg.vec([1])
    assert datum.central_basis == []


def test_gl2_center_and_invariant_characters():
    datum = build_root_datum("GL2")

    assert datum.is_central(linalg.vec([1, 1]))
    assert not datum.is_central(linalg.vec([1, 0]))
    assert datum.is_weyl_invariant_character(linalg.vec([1, 1]))
    assert datum.rho == linalg.vec(["1/2", "-1/2"])
    assert len(datum.central_lattice_basis) == 1
    assert [abs(x) for x in datum.central_lattice_basis[0]] == [1, 1]


def test_explicit_root_data_match_type_tags():
    explicit = build_root_datum(coroots=[[1, -1]], roots=[[1, -1]], rank=2)

    assert explicit.weyl_order == 2
    assert sorted(explicit.all_roots) == sorted(build_root_datum("GL2").all_roots)


def test_product_groups_are_block_sums():
    datum = build_root_datum("A1xGL1")

    assert datum.rank == 2
    assert datum.weyl_order == 2
    assert datum.central_basis and datum.is_central(linalg.vec([0, 1]))


def test_invalid_cartan_matrix_is_rejected():
    with pytest.raises(InvalidCartanMatrixError):
        build_root_datum(coroots=[[1]], roots=[[1]], rank=1)
    with pytest.raises(InvalidCartanMatrixError):
        build_root_datum(coroots=[[1, 0]], roots=[[2]], rank=2)


def test_unknown_type_is_rejected():
    with pytest.raises(UnknownGroupTypeError):
        build_root_datum("E9")
    with pytest.raises(UnknownGroupTypeError):
        build_root_datum("B1")


def test_weyl_cap_is_enforced():
    with pytest.raises(WeylGroupTooLargeError):
        build_root_datum("A2", weyl_cap=5)


def test_coxeter_number_lcm():
    assert coxeter_H(build_root_datum("T1")) == 1
    assert coxeter_H(build_root_datum("A1")) == 2
    assert coxeter_H(build_root_datum("A2")) == 6


def test_weyl_orbit_of_a_coweight():
    datum = build_root_datum("A1")

    assert weyl_orbit(datum, linalg.vec([Fraction(1, 3)])) == [linalg.vec(["-1/3"]), linalg.vec(["1/3"])]


def test_levi_datum_keeps_the_rank():
    levi = levi_datum(build_root_datum("A2"), [0])

    assert levi.rank == 2
    assert levi.semisimple_rank == 1
    assert len(levi.all_roots) == 2


def test_parabolic_types():
    datum = build_root_datum("A2")

    assert ParabolicType.borel(datum).levi_indices == ()
    assert len(ParabolicType.whole_group(datum).weyl_group) == 6


def test_coset_representatives_cover_the_quotient():
    reps = coset_representatives(linalg.mat([[2, 0], [0, 3]]))

    assert reps.index == 6
    assert len({reps.reduce(r) for r in reps.representatives}) == 6
    assert reps.reduce(linalg.vec([2, 3])) == reps.reduce(linalg.vec([0, 0]))


def test_reduce_mod_lattice_picks_the_class_representative():
    b = linalg.mat([[2, 1], [0, 3]])
    y = linalg.vec([7, -4])

    r = reduce_mod_lattice(b, y)

    assert r == reduce_mod_lattice(b, linalg.vec([7 + 2, -4]))
    assert linalg.is_integral(linalg.matvec(linalg.inverse(b), linalg.vec(a - c for a, c in zip(y, r))))
    with pytest.raises(MathPreconditionError):
        reduce_mod_lattice(b, linalg.vec([Fraction(1, 2), 0]))
