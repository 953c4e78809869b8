from __future__ import annotations

from fractions import Fraction

import pytest

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.ggw import (
    CENTRAL_CHARACTER,
    WEIGHT_TEST,
    ABClass,
    PositivityError,
    admissibility_power,
    admissible_prune,
    euler_class_weights,
    radius_r_V,
    recursive_ggw,
)
from thetastrat.quadforms import WeightedRep, c_XV
from thetastrat.rootdata import build_root_datum
from thetastrat.series import SeriesRing
from thetastrat.strata import StrataProblem, enumerate_chi_active


def vortex(chi: int = -1, x_weights=((1,),), v_mult: int = 2) -> StrataProblem:
    return StrataProblem(
        build_root_datum("GL1"),
        WeightedRep.from_pairs([((1,), v_mult)]),
        WeightedRep.from_weights(list(x_weights)),
        linalg.mat([[1]]),
        linalg.vec([chi]),
    )


def u_class() -> ABClass:
    return ABClass(u=WeightedRep.from_weights([(-2,)]))


def ring() -> SeriesRing:
    return SeriesRing(("t", "s"), (2, 0), 0, 128)


def test_positivity_constant_and_radius():
    problem = vortex()

    c = c_XV(problem.datum, problem.x, problem.v, problem.b)
    assert c.lo <= Fraction(1, 2) <= c.hi
    r_v = radius_r_V(problem)
    assert r_v is not None
    assert r_v.lo <= 2 <= r_v.hi


def test_radius_is_undefined_for_a_trivial_v():
    problem = StrataProblem(build_root_datum("GL1"), WeightedRep.empty(), WeightedRep.empty(),
                            linalg.mat([[1]]), linalg.vec([0]))

    assert radius_r_V(problem) is None


def test_positivity_failure_asks_for_a_larger_power_of_v():
    problem = vortex(v_mult=1, x_weights=((1,), (1,)))
    item = enumerate_chi_active(problem, linalg.vec([0]), Fraction(2))

    with pytest.raises(PositivityError):
        admissible_prune(problem, item, [linalg.vec([0])], 1, 0)


def test_euler_class_of_the_negative_stratum():
    euler = euler_class_weights(vortex(), linalg.vec([-1]), linalg.vec([0]), genus=0)

    assert euler.negative.weights == [linalg.vec([1])]
    assert euler.sign == -1
    assert euler.t_shift == 1
    assert euler.level_shift == linalg.mat([[-1]])
    assert euler.point_character == linalg.vec([1])
    with pytest.raises(MathPreconditionError):
        euler_class_weights(vortex(), linalg.vec([0]), linalg.vec([0]), genus=0)


def test_admissibility_power_of_the_vortex():
    assert admissibility_power(vortex(), linalg.vec([0]), u_class(), 0) == 2


def test_recursion_at_power_one_keeps_the_unstable_stratum():
    result = recursive_ggw(vortex(), (0,), u_class(), genus=0, power=1, ring=ring())

    assert result.index == {}
    assert [correction.value for correction in result.corrections] == [{1: -1}]
    assert result.corrections[0].lam == linalg.vec([-1])
    assert result.value == {1: 1}
    assert result.admissibility_power == 2
    assert result.residual < 1e-9
    payload = result.to_json()
    assert payload["value"] == [{"t": 1, "value": 1}]
    assert payload["shortcut"] is None


def test_recursion_at_the_admissibility_power_prunes_everything():
    result = recursive_ggw(vortex(), (0,), u_class(), genus=0, power=2, ring=ring())

    assert result.corrections == []
    assert len(result.pruned) == 1
    assert WEIGHT_TEST in result.pruned[0].reasons
    assert result.value == result.index


def test_central_character_obstruction_short_circuits():
    problem = StrataProblem(
        build_root_datum("GL1"),
        WeightedRep.from_weights([(1,)]),
        WeightedRep.empty(),
        linalg.mat([[1]]),
        linalg.vec([1]),
    )

    result = recursive_ggw(problem, (0,), genus=0, ring=ring())

    assert result.shortcut == CENTRAL_CHARACTER
    assert result.value == {}
    assert result.corrections == []


def test_power_must_be_positive():
    with pytest.raises(MathPreconditionError):
        recursive_ggw(vortex(), (0,), u_class(), genus=0, power=0, ring=ring())
