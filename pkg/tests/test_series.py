from __future__ import annotations

from fractions import Fraction

import pytest

from thetastrat.errors import IntegerGateError, MathPreconditionError
from thetastrat.oracles import newton_example, newton_example_solution, unperturbed_solution
from thetastrat.series import (
    FixedPointDivergenceError,
    SeriesMatrix,
    SeriesRing,
    TruncatedSeries,
    TruncationMismatchError,
    VanishingConstantTermError,
    exp,
    exp_with_phase,
    integer_gate,
    log,
    power,
    solve_fixed_point,
)


def ring(t: int = 4, s: int = 1, z_rank: int = 0) -> SeriesRing:
    return SeriesRing(("t", "s"), (t, s), z_rank, 128)


def close(a, b, tol: float = 1e-30) -> bool:
    return abs(a - b) < tol


def test_ring_rejects_bad_parameters():
    with pytest.raises(ValueError):
        SeriesRing(("t", "t"), (1, 1))
    with pytest.raises(ValueError):
        SeriesRing(("t",), (-1,))
    with pytest.raises(ValueError):
        SeriesRing(("t",), (1,), 0, 16)
    with pytest.raises(ValueError):
        ring().index("q")


def test_multiplication_truncates_each_variable():
    r = ring(t=2, s=1)
    t = TruncatedSeries.monomial(r, {"t": 1})
    s = TruncatedSeries.monomial(r, {"s": 1})

    product = (1 + t) ** 3 * (1 + s) ** 2

    assert close(product.coefficient({"t": 2, "s": 1}), 6)
    assert close(product.coefficient({"t": 2}), 3)
    assert product.coefficient({"t": 3}) == 0
    assert product.coefficient({"s": 2}) == 0


def test_exp_and_log_are_inverse():
    r = ring()
    t = TruncatedSeries.monomial(r, {"t": 1})
    s = TruncatedSeries.monomial(r, {"s": 1})
    f = 2 + t * 3 - s + t * s * Fraction(1, 2)

    assert exp(log(f)).close_to(f)
    assert log(exp(t + s)).close_to(t + s)


def test_exp_of_a_monomial_has_factorial_coefficients():
    r = ring(t=4, s=0)
    series = exp(TruncatedSeries.monomial(r, {"t": 1}))

    assert close(series.coefficient({"t": 4}), r.value(Fraction(1, 24)))


def test_inverse_and_fractional_powers():
    r = ring()
    t = TruncatedSeries.monomial(r, {"t": 1})
    f = 1 - t

    assert (f * f.inverse()).close_to(TruncatedSeries.one(r))
    assert close(f.inverse().coefficient({"t": 4}), 1)
    root = power(f, Fraction(1, 2))
    assert (root * root).close_to(f)


def test_vanishing_constant_term_is_rejected():
    r = ring()
    t = TruncatedSeries.monomial(r, {"t": 1})

    with pytest.raises(VanishingConstantTermError):
        log(t)
    with pytest.raises(VanishingConstantTermError):
        t.inverse()


def test_bare_z_monomials_cannot_be_exponentiated():
    r = ring(z_rank=1)
    z = TruncatedSeries.monomial(r, None, (1,))

    with pytest.raises(MathPreconditionError):
        exp(z)


def test_mixing_rings_fails():
    with pytest.raises(TruncationMismatchError):
        TruncatedSeries.one(ring()) + TruncatedSeries.one(ring(t=3))


def test_exp_with_phase_uses_an_exact_root_of_unity():
    r = ring()
    value = exp_with_phase(TruncatedSeries.zero(r), Fraction(1, 4)).constant

    assert close(value, r.ctx.mpc(0, 1))


def test_z_bookkeeping():
    r = ring(t=1, s=0, z_rank=2)
    t = TruncatedSeries.monomial(r, {"t": 1})
    f = TruncatedSeries.monomial(r, None, (1, -2), 3) + t * TruncatedSeries.monomial(r, None, (0, 1))

    assert f.z_support() == [(0, 1), (1, -2)]
    assert close(f.z_coefficient((1, -2)).constant, 3)
    assert close(f.z_shift((-1, 2)).constant, 3)
    assert close(f.coefficient_in("t", 1).coefficient(None, (0, 1)), 1)
    assert close(f.set_to_one("t").coefficient(None, (0, 1)), 1)


def test_matrix_determinant_inverse_and_solve():
    r = ring(t=3, s=0)
    t = TruncatedSeries.monomial(r, {"t": 1})
    one = TruncatedSeries.one(r)
    matrix = SeriesMatrix.from_rows([[one * 2, t], [t, one]])

    assert matrix.det().close_to(2 - t * t)
    inverse = matrix.inverse()
    product = inverse.matvec((one, TruncatedSeries.zero(r)))
    assert matrix.matvec(product)[0].close_to(one)
    x = matrix.solve((one, t))
    assert matrix.matvec(x)[1].close_to(t)


def test_newton_example_coefficients():
    coefficients = newton_example(order=3)

    expected = [Fraction(0), Fraction(-1, 2), Fraction(1, 4), Fraction(-3, 16)]
    for value, target in zip(coefficients, expected, strict=True):
        assert abs(value * target.denominator - target.numerator) < 1e-30


def test_newton_residuals_stay_below_the_stopping_floor():
    solution = newton_example_solution(order=5)
    unperturbed = unperturbed_solution()

    assert solution.residual < 1e-25
    assert unperturbed.iterations == 0 and unperturbed.point[0].max_abs() == 0
    assert ring().residual_floor == ring().ctx.mpf(2) ** -96
    assert SeriesRing(("t",), (1,), 0, 32).residual_floor == SeriesRing(("t",), (1,), 0, 32).floor


def test_raising_the_truncation_keeps_lower_coefficients():
    low = newton_example(order=8)
    high = newton_example(order=12)

    for a, b in zip(low, high[: len(low)], strict=True):
        assert close(a, b, 1e-25)
    assert abs(high[12]) > 0


def test_fixed_point_divergence_is_reported():
    r = ring(t=2, s=0)

    def equation(point):
        return (point[0] * point[0] + 1,)

    def jacobian(point):
        return SeriesMatrix.from_rows([[TruncatedSeries.one(r)]])

    with pytest.raises(FixedPointDivergenceError):
        solve_fixed_point(equation, jacobian, (TruncatedSeries.zero(r),))


@pytest.mark.parametrize(("value", "expected"), [(complex(3.0000000001, 0), 3), (complex(-2, 1e-12), -2)])
def test_integer_gate_rounds_near_integers(value, expected):
    assert integer_gate(value) == expected


def test_integer_gate_fails_loudly():
    with pytest.raises(IntegerGateError):
        integer_gate(complex(2.5, 0))
    with pytest.raises(IntegerGateError):
        integer_gate(complex(2, 0.01))
