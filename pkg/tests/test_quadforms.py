from __future__ import annotations

from fractions import Fraction

import pytest

from thetastrat import linalg
from thetastrat.errors import MathPreconditionError
from thetastrat.quadforms import (
    DegenerateFormError,
    Enclosure,
    NotSelfAdjointError,
    WeightedRep,
    ENCLOSURE_WIDTH,
    c_XV,
    ch2_form,
    default_norm,
    dual_norm_sq,
    in_image,
    is_weyl_invariant_form,
    negative_part,
    operator_norm,
    positive_part,
    pseudoinverse,
    row_sum_bound,
    require_norm,
    sqrt_bounds,
    tangent_complex,
)
from thetastrat.rootdata import build_root_datum


def test_sqrt_bounds_are_exact_on_squares():
    assert sqrt_bounds(Fraction(9, 4)) == (Fraction(3, 2), Fraction(3, 2))
    lo, hi = sqrt_bounds(Fraction(2))
    assert lo * lo <= 2 <= hi * hi
    with pytest.raises(MathPreconditionError):
        sqrt_bounds(Fraction(-1))


def test_enclosure_arithmetic():
    a = Enclosure(Fraction(-1), Fraction(2))
    b = Enclosure(Fraction(3), Fraction(4))

    assert a * b == Enclosure(Fraction(-4), Fraction(8))
    assert a + b == Enclosure(Fraction(2), Fraction(6))
    assert a.square() == Enclosure(Fraction(0), Fraction(4))
    assert Enclosure.exact(4).sqrt() == Enclosure.exact(2)
    with pytest.raises(ValueError):
        Enclosure(Fraction(1), Fraction(0))


def test_weighted_rep_merges_and_cancels():
    rep = WeightedRep.from_pairs([((1,), 1), ((1,), -1), ((2,), 3)])

    assert rep.weights == [linalg.vec([2])]
    assert rep.dimension == 3
    assert rep.dual().weights == [linalg.vec([-2])]
    assert rep.adams(2).weights == [linalg.vec([4])]
    with pytest.raises(MathPreconditionError):
        WeightedRep.from_pairs([(("1/2",), 1)])


def test_adjoint_and_shifted_roots():
    datum = build_root_datum("A1")

    assert WeightedRep.adjoint(datum).dimension == 3
    assert WeightedRep.shifted_roots(datum).dimension == -2
    tangent = tangent_complex(datum, WeightedRep.from_weights([(1,), (-1,)]))
    assert dict(tangent.terms) == {
        linalg.vec([-2]): -1,
        linalg.vec([-1]): 1,
        linalg.vec([1]): 1,
        linalg.vec([2]): -1,
    }


def test_determinant_character_sums_weights():
    rep = WeightedRep.from_pairs([((1, 0), 2), ((0, 1), -1)])

    assert rep.determinant_character(2) == linalg.vec([2, -1])


def test_ch2_and_default_norms():
    assert ch2_form(WeightedRep.from_pairs([((1,), 2)]), 1) == linalg.mat([[2]])
    assert default_norm(build_root_datum("A1")) == linalg.mat([[8]])
    assert default_norm(build_root_datum("GL1")) == linalg.mat([[1]])
    a2 = build_root_datum("A2")
    assert is_weyl_invariant_form(a2, default_norm(a2))
    gl2 = build_root_datum("GL2")
    require_norm(default_norm(gl2))


def test_require_norm_rejects_degenerate_forms():
    with pytest.raises(DegenerateFormError):
        require_norm(linalg.mat([[1, 0], [0, 0]]))
    with pytest.raises(DegenerateFormError):
        require_norm(linalg.mat([[1, 1], [0, 1]]))


def test_pseudoinverse_vanishes_on_the_kernel():
    phi = linalg.mat([[2, 0], [0, 0]])

    assert pseudoinverse(phi, linalg.identity(2)) == linalg.mat([["1/2", 0], [0, 0]])
    assert in_image(phi, linalg.vec([1, 0]))
    assert not in_image(phi, linalg.vec([0, 1]))
    with pytest.raises(NotSelfAdjointError):
        pseudoinverse(linalg.mat([[1, 1], [0, 1]]), linalg.identity(2))


def test_operator_norm_encloses_the_largest_eigenvalue():
    norm = operator_norm(linalg.mat([[2, 0], [0, -3]]), linalg.identity(2))

    assert norm.lo <= 3 <= norm.hi
    assert norm.hi - norm.lo < Fraction(1, 1000)


def test_dual_norm_uses_the_inverse_form():
    assert dual_norm_sq(linalg.vec([2]), linalg.mat([[8]])) == Fraction(1, 2)


def test_negative_and_positive_parts():
    rep = WeightedRep.from_weights([(1,), (-1,), (0,)])
    lam = linalg.vec([-1])

    assert negative_part(rep, lam).weights == [linalg.vec([1])]
    assert positive_part(rep, lam).weights == [linalg.vec([-1])]


def test_c_xv_for_an_abelian_vortex():
    datum = build_root_datum("GL1")
    x = WeightedRep.from_weights([(1,)])
    v = WeightedRep.from_pairs([((1,), 2)])

    constant = c_XV(datum, x, v, linalg.mat([[1]]))

    assert constant.lo <= Fraction(1, 2) <= constant.hi


def test_operator_norm_honours_a_requested_width():
    phi = linalg.mat([[2, 1], [1, 1]])
    width = Fraction(1, 10**14)

    norm = operator_norm(phi, linalg.identity(2), width)

    assert norm.hi - norm.lo <= width
    assert norm.lo <= Fraction(2618033988750, 10**12)
    assert norm.hi >= Fraction(2618033988749, 10**12)
    assert row_sum_bound(phi) == 3


def test_c_xv_enclosure_stays_narrow_for_irrational_factors():
    datum = build_root_datum("T2")
    x = WeightedRep.from_weights([(1, 0), (0, 1)])
    v = WeightedRep.from_weights([(1, 0), (1, 1)])

    constant = c_XV(datum, x, v, linalg.identity(2))

    assert not constant.is_exact
    assert constant.hi - constant.lo <= ENCLOSURE_WIDTH
    assert constant.lo < Fraction(2618034, 10**6)
    assert constant.hi > Fraction(2618033, 10**6)
