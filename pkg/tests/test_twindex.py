from __future__ import annotations

from fractions import Fraction

import pytest

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.oracles import abelian_count, gl1_deformation_solutions, torus_count, verlinde_sl2
from thetastrat.quadforms import WeightedRep
from thetastrat.rootdata import build_root_datum
from thetastrat.series import SeriesRing
from thetastrat.twindex import (
    AdmissibilityError,
    LevelData,
    WeylSign,
    ab_class_reduce,
    adams_index_formula,
    basic_level,
    calibrate_level_convention,
    enumerate_F_rho,
    full_index_formula,
    half_trace_form,
    trivial_rep,
    tw_index,
)


def gl1_level(h) -> LevelData:
    return LevelData(build_root_datum("GL1"), linalg.mat([[h]]))


def a1_level(k: int) -> LevelData:
    a1 = build_root_datum("A1")
    return LevelData(a1, linalg.mat_scale(k, basic_level(a1)))


def plain_ring(level: LevelData, t: int = 0, s: int = 0, precision: int = 128) -> SeriesRing:
    return SeriesRing(("t", "s"), (t, s), len(level.z_basis), precision)


def test_a1_levels_in_simply_connected_coordinates():
    level = a1_level(1)

    assert basic_level(level.datum) == linalg.mat([[2]])
    assert half_trace_form(level.datum) == linalg.mat([[-4]])
    assert level.h_prime == linalg.mat([[-6]])
    assert level.admissible


def test_level_validation():
    gl1 = build_root_datum("GL1")

    with pytest.raises(ValueError):
        LevelData(gl1, linalg.mat([[1]]), orientation=0)
    with pytest.raises(AdmissibilityError):
        LevelData(build_root_datum("T2"), linalg.mat([[1, 1], [0, 1]]))
    with pytest.raises(AdmissibilityError):
        enumerate_F_rho(gl1_level(0))
    with pytest.raises(AdmissibilityError):
        enumerate_F_rho(gl1_level(Fraction(1, 2)))
    assert not LevelData(gl1, linalg.mat([[3]]), orientation=1).admissible


def test_degree_exponents_follow_the_orientation():
    level = gl1_level(3)

    assert level.degree_exponent(linalg.vec([-1])) == (3,)
    assert level.degree_of((3,)) == linalg.vec([-1])
    assert level.degree_of((1,)) is None


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_f_rho_counts_for_a1(k: int):
    f_rho = enumerate_F_rho(a1_level(k))

    assert len(f_rho.points) == 2 * k + 4
    assert len(f_rho.regular_orbits) == k + 1
    assert all(orbit.orbit_size == 2 for orbit in f_rho.regular_orbits)


@pytest.mark.parametrize("h", [1, 2, 3, 4])
@pytest.mark.parametrize("genus", [0, 1, 2])
def test_abelian_index_is_h_to_the_genus(h: int, genus: int):
    level = gl1_level(h)

    assert tw_index(level, genus, ring=plain_ring(level)).value() == abelian_count(h, genus) == h**genus


def test_rank_two_torus_matches_the_determinant():
    level = LevelData(build_root_datum("T2"), linalg.mat([[2, 1], [1, 3]]))

    assert tw_index(level, 2, ring=plain_ring(level)).value() == torus_count(level.h_prime, 2) == 25


@pytest.mark.parametrize(
    ("k", "genus", "expected"),
    [(1, 0, 1), (1, 1, 2), (1, 2, 4), (2, 0, 1), (2, 1, 3), (2, 2, 10), (3, 0, 1), (3, 1, 4), (3, 2, 20)],
)
def test_a1_index_is_the_verlinde_number(k: int, genus: int, expected: int):
    level = a1_level(k)

    assert verlinde_sl2(k, genus) == expected
    assert tw_index(level, genus, ring=plain_ring(level)).value() == expected


def test_vortex_factors_cancel_at_level_one():
    level = gl1_level(1)
    x = WeightedRep.from_weights([(1,)])
    ring = plain_ring(level, t=3)

    for genus in (0, 1, 2):
        result = full_index_formula(level, genus, WeightedRep.empty(), trivial_rep(1), x, ring)
        assert result.degrees == {linalg.vec([0]): {(0, 0): 1}}


@pytest.mark.parametrize("genus", [0, 1])
def test_adams_expansion_matches_the_logarithm(genus: int):
    level = gl1_level(2)
    x = WeightedRep.from_weights([(1,)])
    ring = plain_ring(level, t=3)

    by_log = full_index_formula(level, genus, WeightedRep.empty(), trivial_rep(1), x, ring)
    by_adams = adams_index_formula(level, genus, WeightedRep.empty(), trivial_rep(1), x, ring)

    assert by_log.degrees == by_adams.degrees
    assert by_log.value() == 2**genus


def test_gl1_deformation_solves_below_the_residual_bound():
    solutions = gl1_deformation_solutions(order=5)

    assert len(solutions) == 2
    assert all(solution.residual < 1e-25 for solution in solutions)


def _through_order(degrees, order: int):
    kept = {
        d: {formal: c for formal, c in coefficients.items() if formal[0] <= order and c}
        for d, coefficients in degrees.items()
    }
    return {d: coefficients for d, coefficients in kept.items() if coefficients}


@pytest.mark.parametrize("genus", [0, 1])
def test_truncation_k_and_k_plus_two_agree(genus: int):
    level = gl1_level(2)
    x = WeightedRep.from_weights([(1,)])

    low = full_index_formula(level, genus, WeightedRep.empty(), trivial_rep(1), x, plain_ring(level, t=3))
    high = full_index_formula(level, genus, WeightedRep.empty(), trivial_rep(1), x, plain_ring(level, t=5))

    assert _through_order(low.degrees, 3) == _through_order(high.degrees, 3)


def test_s_deformation_leaves_the_undeformed_part_alone():
    level = a1_level(1)
    u = WeightedRep.from_weights([(1,), (-1,)])
    ring = plain_ring(level, s=1)

    result = full_index_formula(level, 1, u, trivial_rep(1), WeightedRep.empty(), ring)

    assert result.value() == 2
    assert result.generating.regular_orbits == 2


def test_ab_reduction_needs_an_s_order():
    level = gl1_level(1)

    with pytest.raises(MathPreconditionError):
        ab_class_reduce(level, 0, 1, 0, WeightedRep.empty(), WeightedRep.empty(), plain_ring(level))


def test_ab_reduction_of_the_trivial_representation():
    level = gl1_level(2)
    ring = plain_ring(level, s=1)

    result = ab_class_reduce(level, 0, 1, 2, trivial_rep(1), WeightedRep.empty(), ring)

    # only the point class survives: (deg + 1 - g) times the genus zero count
    assert result.degrees == {linalg.vec([0]): {(0, 0): 3}}
    assert result.to_json()["degree"] == 2


def test_calibration_picks_the_unitary_convention():
    calibration = calibrate_level_convention()

    assert calibration.orientation == -1
    assert calibration.weyl_sign is WeylSign.UNITARY
    assert all(expected == computed for _, expected, computed in calibration.checks)
