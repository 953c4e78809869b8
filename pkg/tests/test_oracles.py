from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.oracles import (
    FiniteDifferenceCheck,
    abelian_count,
    abelian_suite,
    distance_sample,
    grid_suite,
    invariants_suite,
    lattice_suite,
    movement_sample,
    projector_sample,
    series_suite,
    torus_count,
    verlinde_sl2,
    verlinde_suite,
    weyl_stable_sample,
)
from thetastrat.quadforms import WeightedRep
from thetastrat.rootdata import build_root_datum
from thetastrat.strata import StrataProblem


def vortex() -> StrataProblem:
    return StrataProblem(
        build_root_datum("GL1"),
        WeightedRep.from_weights([(1,)]),
        WeightedRep.from_weights([(1,)]),
        linalg.mat([[1]]),
        linalg.vec([2]),
    )


@pytest.mark.parametrize(("k", "values"), [(1, [1, 2, 4]), (2, [1, 3, 10]), (3, [1, 4, 20])])
def test_verlinde_closed_form(k, values):
    assert [verlinde_sl2(k, genus) for genus in (0, 1, 2)] == values


def test_closed_forms_reject_bad_levels():
    assert abelian_count(3, 2) == 9
    assert torus_count(linalg.mat([[2, 1], [1, 3]]), 2) == 25
    with pytest.raises(MathPreconditionError):
        abelian_count(0, 1)
    with pytest.raises(MathPreconditionError):
        verlinde_sl2(-1, 1)


def test_abelian_suite_passes():
    result = abelian_suite(levels=(1, 2, 3), genera=(0, 1, 2))

    assert result.passed
    assert len(result.cases) == 9
    assert result.to_json()["suite"] == "abelian"


def test_verlinde_suite_passes_and_is_a1_only():
    result = verlinde_suite(levels=(1, 2), genera=(0, 1, 2))

    assert result.passed
    assert [case["expected"] for case in result.cases] == [1, 2, 4, 1, 3, 10]
    with pytest.raises(MathPreconditionError, match="A1 only"):
        verlinde_suite(type_tag="A2")


def test_grid_suite_brackets_the_exact_maximum():
    result = grid_suite(seed=7, instances=5)

    assert result.passed
    assert [case["seed"] for case in result.cases] == [7, 8, 9, 10, 11]
    for case in result.cases:
        assert case["noGridPointAbove"] and case["withinTolerance"] and case["certificateVerified"]
        assert case["rank"] in (1, 2, 3)


def test_lattice_suite_agrees_with_enumeration():
    result = lattice_suite(vortex(), linalg.vec([-1]), Fraction(1))

    case = result.cases[0]
    assert result.passed
    assert case["enumerated"] == case["bruteForce"] == 2


def test_finite_difference_check_tolerance():
    assert FiniteDifferenceCheck(1 + 1j, 1 + 1j + 1e-9, 1e-12).close()
    assert not FiniteDifferenceCheck(1.0, 1.1, 1e-12).close()


@pytest.mark.slow
def test_series_suite_matches_newton_and_finite_differences():
    result = series_suite(genus=0)

    assert [case["case"] for case in result.cases] == [
        "newton unperturbed", "newton", "newton GL1 h=2 through t^5", "s-derivative"
    ]
    assert all(case["residualFloat"] < 1e-25 for case in result.cases[:3])
    assert result.passed


@pytest.mark.slow
def test_invariants_suite_on_the_vortex():
    result = invariants_suite(vortex(), linalg.vec([-1]), Fraction(1), seed=11)

    by_case = {case["case"]: case for case in result.cases}
    assert by_case["graded-center"]["strata"] == 2
    assert by_case["F_rho A1 k=2"]["points"] == 8
    for name in ("projector", "weyl-invariant ch2", "movement bound", "distance to cone"):
        assert by_case[name]["samples"] == 100
        assert by_case[name]["failingSeeds"] == []
    assert result.passed


@pytest.mark.parametrize("seed", range(20))
def test_pseudoinverse_gives_a_self_adjoint_idempotent(seed):
    sample = projector_sample(np.random.default_rng(seed))

    assert sample["idempotent"] and sample["selfAdjoint"]
    assert sample["complementsKernel"] and sample["daggerRoundTrip"]


@pytest.mark.parametrize("type_tag", ["A1", "A2", "B2", "G2"])
def test_ch2_of_weyl_orbits_is_weyl_invariant(type_tag):
    datum = build_root_datum(type_tag)
    for seed in range(5):
        sample = weyl_stable_sample(np.random.default_rng(seed), datum)
        assert sample["passed"], sample


@pytest.mark.parametrize("seed", range(10))
def test_movement_and_distance_bounds_on_seeded_samples(seed):
    assert movement_sample(np.random.default_rng(seed))["passed"]
    assert distance_sample(np.random.default_rng(seed), build_root_datum("B2"))["passed"]
