"""Truncated multivariate power series over ``mpc`` with Laurent monomials in ``z``.

A series is a finite map ``(formal exponents, z exponents) -> mpc``.  Formal
variables are truncated in a box (``e_i <= K_i`` for every variable), the ``z``
exponents are unbounded integers.  Every nonconstant formal monomial is
nilpotent, so ``exp``, ``log`` and inverses are finite sums.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from mpmath.ctx_mp import MPContext

from thetastrat.errors import IntegerGateError, MathPreconditionError

logger = logging.getLogger("thetastrat.series")

DEFAULT_VARIABLES = ("t", "s")
INTEGER_TOLERANCE = 1e-9

Key = tuple[tuple[int, ...], tuple[int, ...]]
Scalar = Union[int, Fraction, object]


class VanishingConstantTermError(MathPreconditionError):
    """Raised when log, inversion or a negative power meets a vanishing constant term."""


class TruncationMismatchError(ValueError):
    """Raised when series from different rings are combined."""


class FixedPointDivergenceError(RuntimeError):
    """Raised when Newton iteration leaves a residual above the precision floor."""


@dataclass(frozen=True)
class SeriesRing:
    variables: tuple[str, ...] = DEFAULT_VARIABLES
    orders: tuple[int, ...] = (8, 2)
    z_rank: int = 0
    precision: int = 128

    def __post_init__(self) -> None:
        if len(self.variables) != len(self.orders):
            raise ValueError("Each formal variable needs exactly one truncation order.")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("Formal variable names must be distinct.")
        if any(order < 0 for order in self.orders):
            raise ValueError("Truncation orders must be nonnegative.")
        if self.z_rank < 0 or self.precision < 32:
            raise ValueError("z rank must be nonnegative and precision at least 32 bits.")

    @cached_property
    def ctx(self) -> MPContext:
        ctx = MPContext()
        ctx.prec = self.precision
        return ctx

    @cached_property
    def floor(self):
        """Residual floor; anything below it counts as zero."""
        return self.ctx.mpf(2) ** (-(self.precision // 2))

    @cached_property
    def residual_floor(self):
        """Newton stopping floor: 32 guard bits below the working precision, never above ``floor``."""
        return self.ctx.mpf(2) ** (-max(self.precision - 32, self.precision // 2))

    @property
    def total_order(self) -> int:
        return sum(self.orders)

    def index(self, variable: str) -> int:
        try:
            return self.variables.index(variable)
        except ValueError as exc:
            raise ValueError(f"Unknown formal variable {variable!r}.") from exc

    def exponents(self, formal: Mapping[str, int] | Sequence[int] | None) -> tuple[int, ...]:
        if formal is None:
            return (0,) * len(self.variables)
        if isinstance(formal, Mapping):
            exps = [0] * len(self.variables)
            for name, power in formal.items():
                exps[self.index(name)] += int(power)
            return tuple(exps)
        exps = tuple(int(e) for e in formal)
        if len(exps) != len(self.variables):
            raise ValueError("Formal exponent tuple has the wrong length.")
        return exps

    def within(self, formal: tuple[int, ...]) -> bool:
        return all(0 <= e <= k for e, k in zip(formal, self.orders))

    def value(self, scalar: Scalar):
        ctx = self.ctx
        if isinstance(scalar, Fraction):
            return ctx.mpc(ctx.mpf(scalar.numerator) / scalar.denominator)
        return ctx.mpc(scalar)

    def root_of_unity(self, x: Fraction):
        """``exp(2 pi i x)`` for rational ``x``."""
        x = Fraction(x) % 1
        return self.ctx.expjpi(self.ctx.mpf(2 * x.numerator) / x.denominator)

    def with_variables(self, extra: Iterable[tuple[str, int]]) -> "SeriesRing":
        names = list(self.variables)
        orders = list(self.orders)
        for name, order in extra:
            names.append(name)
            orders.append(order)
        return SeriesRing(tuple(names), tuple(orders), self.z_rank, self.precision)

    def with_z_rank(self, z_rank: int) -> "SeriesRing":
        return SeriesRing(self.variables, self.orders, z_rank, self.precision)

    def with_order(self, variable: str, order: int) -> "SeriesRing":
        orders = list(self.orders)
        orders[self.index(variable)] = order
        return SeriesRing(self.variables, tuple(orders), self.z_rank, self.precision)


class TruncatedSeries:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: SeriesRing, terms: Mapping[Key, object] | None = None) -> None:
        self.ring = ring
        self.terms: dict[Key, object] = {}
        for (formal, z), value in (terms or {}).items():
            if len(z) != ring.z_rank:
                raise ValueError("z exponent has the wrong length.")
            if ring.within(formal) and value != 0:
                self.terms[(formal, z)] = value

    @classmethod
    def zero(cls, ring: SeriesRing) -> "TruncatedSeries":
        return cls(ring)

    @classmethod
    def scalar(cls, ring: SeriesRing, value: Scalar) -> "TruncatedSeries":
        return cls(ring, {(ring.exponents(None), (0,) * ring.z_rank): ring.value(value)})

    @classmethod
    def one(cls, ring: SeriesRing) -> "TruncatedSeries":
        return cls.scalar(ring, 1)

    @classmethod
    def monomial(
        cls,
        ring: SeriesRing,
        formal: Mapping[str, int] | Sequence[int] | None = None,
        z: Sequence[int] | None = None,
        coefficient: Scalar = 1,
    ) -> "TruncatedSeries":
        z = tuple(int(x) for x in z) if z is not None else (0,) * ring.z_rank
        return cls(ring, {(ring.exponents(formal), z): ring.value(coefficient)})

    def _check(self, other: "TruncatedSeries") -> None:
        if other.ring != self.ring:
            raise TruncationMismatchError("Series belong to different rings.")

    def _coerce(self, other: object) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        return TruncatedSeries.scalar(self.ring, other)

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, self.terms)

    def __iter__(self) -> Iterator[tuple[Key, object]]:
        return iter(sorted(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: object) -> "TruncatedSeries":
        other = self._coerce(other)
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms.get(key, 0) + value
        return TruncatedSeries(self.ring, terms)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, {key: -value for key, value in self.terms.items()})

    def __sub__(self, other: object) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: object) -> "TruncatedSeries":
        return self._coerce(other) - self

    def __mul__(self, other: object) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            factor = self.ring.value(other)
            return TruncatedSeries(self.ring, {key: value * factor for key, value in self.terms.items()})
        self._check(other)
        orders = self.ring.orders
        terms: dict[Key, object] = {}
        for (f1, z1), v1 in self.terms.items():
            for (f2, z2), v2 in other.terms.items():
                formal = tuple(a + b for a, b in zip(f1, f2))
                if any(e > k for e, k in zip(formal, orders)):
                    continue
                key = (formal, tuple(a + b for a, b in zip(z1, z2)))
                terms[key] = terms.get(key, 0) + v1 * v2
        return TruncatedSeries(self.ring, terms)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return self * (1 / self.ring.value(other))

    def __pow__(self, exponent: object) -> "TruncatedSeries":
        return power(self, exponent)

    @property
    def constant(self):
        return self.terms.get((self.ring.exponents(None), (0,) * self.ring.z_rank), self.ring.value(0))

    def coefficient(self, formal: Mapping[str, int] | Sequence[int] | None = None, z: Sequence[int] | None = None):
        z = tuple(z) if z is not None else (0,) * self.ring.z_rank
        return self.terms.get((self.ring.exponents(formal), z), self.ring.value(0))

    def formal_constant_part(self) -> "TruncatedSeries":
        zero = self.ring.exponents(None)
        return TruncatedSeries(self.ring, {key: v for key, v in self.terms.items() if key[0] == zero})

    def z_shift(self, shift: Sequence[int]) -> "TruncatedSeries":
        shift = tuple(shift)
        return TruncatedSeries(
            self.ring,
            {(formal, tuple(a + b for a, b in zip(z, shift))): v for (formal, z), v in self.terms.items()},
        )

    def derivative(self, variable: str) -> "TruncatedSeries":
        """Formal derivative; the top order is lost to truncation."""
        i = self.ring.index(variable)
        terms = {}
        for (formal, z), value in self.terms.items():
            if formal[i] == 0:
                continue
            lowered = formal[:i] + (formal[i] - 1,) + formal[i + 1 :]
            terms[(lowered, z)] = value * formal[i]
        return TruncatedSeries(self.ring, terms)

    def substitute_zero(self, variable: str) -> "TruncatedSeries":
        i = self.ring.index(variable)
        return TruncatedSeries(self.ring, {key: v for key, v in self.terms.items() if key[0][i] == 0})

    def coefficient_in(self, variable: str, power: int) -> "TruncatedSeries":
        """Coefficient of ``variable**power`` as a series with that variable removed."""
        i = self.ring.index(variable)
        terms = {}
        for (formal, z), value in self.terms.items():
            if formal[i] == power:
                terms[(formal[:i] + (0,) + formal[i + 1 :], z)] = value
        return TruncatedSeries(self.ring, terms)

    def set_to_one(self, variable: str) -> "TruncatedSeries":
        """Evaluate ``variable = 1``; exact because the variable is truncated."""
        i = self.ring.index(variable)
        terms: dict[Key, object] = {}
        for (formal, z), value in self.terms.items():
            key = (formal[:i] + (0,) + formal[i + 1 :], z)
            terms[key] = terms.get(key, 0) + value
        return TruncatedSeries(self.ring, terms)

    def z_support(self, tolerance=None) -> list[tuple[int, ...]]:
        tolerance = self.ring.floor if tolerance is None else tolerance
        return sorted({z for (_formal, z), v in self.terms.items() if abs(v) > tolerance})

    def z_coefficient(self, z: Sequence[int]) -> "TruncatedSeries":
        """The part with ``z`` exponent exactly ``z``, moved to ``z^0``."""
        z = tuple(z)
        origin = (0,) * self.ring.z_rank
        return TruncatedSeries(self.ring, {(f, origin): v for (f, zz), v in self.terms.items() if zz == z})

    def max_abs(self):
        return max((abs(v) for v in self.terms.values()), default=self.ring.ctx.mpf(0))

    def close_to(self, other: "TruncatedSeries", tolerance=None) -> bool:
        tolerance = 10 * self.ring.floor if tolerance is None else tolerance
        return (self - other).max_abs() <= tolerance

    def inverse(self) -> "TruncatedSeries":
        return power(self, -1)

    def render(self, digits: int = 12) -> str:
        if not self.terms:
            return "0"
        ctx = self.ring.ctx
        parts = []
        for (formal, z), value in self:
            factors = [ctx.nstr(value, digits)]
            factors += [f"{name}^{e}" if e > 1 else name for name, e in zip(self.ring.variables, formal) if e]
            if any(z):
                factors.append("z^(" + ",".join(str(x) for x in z) + ")")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def to_json(self, digits: int = 20) -> list[dict[str, object]]:
        ctx = self.ring.ctx
        return [
            {
                "formal": dict(zip(self.ring.variables, formal)),
                "z": list(z),
                "re": ctx.nstr(ctx.re(value), digits),
                "im": ctx.nstr(ctx.im(value), digits),
            }
            for (formal, z), value in self
        ]

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.render()})"


def _split_constant(f: TruncatedSeries) -> tuple[object, TruncatedSeries]:
    c = f.constant
    nilpotent = f - c
    stray = nilpotent.formal_constant_part()
    if stray.max_abs() > f.ring.floor:
        raise MathPreconditionError("The formal-constant part must be a scalar (no bare z monomials).")
    return c, nilpotent - stray


def _nilpotent_sum(g: TruncatedSeries, coefficient: Callable[[int], object]) -> TruncatedSeries:
    """``sum_k coefficient(k) g^k`` for ``g`` without constant term."""
    ring = g.ring
    total = TruncatedSeries.scalar(ring, coefficient(0))
    term = TruncatedSeries.one(ring)
    for k in range(1, ring.total_order + 1):
        term = term * g
        if not term.terms:
            break
        total = total + term * coefficient(k)
    return total


def exp(f: TruncatedSeries) -> TruncatedSeries:
    ctx = f.ring.ctx
    c, g = _split_constant(f)
    return _nilpotent_sum(g, lambda k: 1 / ctx.factorial(k)) * ctx.exp(c)


def exp_with_phase(g: TruncatedSeries, phase: Fraction) -> TruncatedSeries:
    """``exp(2 pi i phase + g)`` for ``g`` without formal constant term, phase evaluated exactly."""
    ctx = g.ring.ctx
    c, nilpotent = _split_constant(g)
    return _nilpotent_sum(nilpotent, lambda k: 1 / ctx.factorial(k)) * (ctx.exp(c) * g.ring.root_of_unity(phase))


def log(f: TruncatedSeries) -> TruncatedSeries:
    ctx = f.ring.ctx
    c, g = _split_constant(f)
    if abs(c) <= f.ring.floor:
        raise VanishingConstantTermError("log needs a nonvanishing constant term.")
    ratio = g * (1 / c)
    return _nilpotent_sum(ratio, lambda k: ctx.log(c) if k == 0 else ctx.mpf((-1) ** (k + 1)) / k)


def power(f: TruncatedSeries, exponent: object) -> TruncatedSeries:
    if isinstance(exponent, TruncatedSeries):
        return exp(exponent * log(f))
    if isinstance(exponent, int):
        if exponent >= 0:
            result = TruncatedSeries.one(f.ring)
            base = f
            n = exponent
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        c, g = _split_constant(f)
        if abs(c) <= f.ring.floor:
            raise VanishingConstantTermError("Negative powers need a nonvanishing constant term.")
        ratio = g * (1 / c)
        inverse = _nilpotent_sum(ratio, lambda k: (-1) ** k) * (1 / c)
        return power(inverse, -exponent)
    return exp(log(f) * exponent)


SeriesVector = tuple[TruncatedSeries, ...]


def vector_sub(u: Sequence[TruncatedSeries], v: Sequence[TruncatedSeries]) -> SeriesVector:
    return tuple(a - b for a, b in zip(u, v))


def vector_max_abs(u: Sequence[TruncatedSeries]):
    values = [entry.max_abs() for entry in u]
    return max(values) if values else 0


@dataclass(frozen=True)
class SeriesMatrix:
    rows: tuple[tuple[TruncatedSeries, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[TruncatedSeries]]) -> "SeriesMatrix":
        return cls(tuple(tuple(row) for row in rows))

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def ring(self) -> SeriesRing:
        return self.rows[0][0].ring

    def matvec(self, v: Sequence[TruncatedSeries]) -> SeriesVector:
        ring = self.ring
        out = []
        for row in self.rows:
            total = TruncatedSeries.zero(ring)
            for a, x in zip(row, v):
                total = total + a * x
            out.append(total)
        return tuple(out)

    def _eliminate(self, rhs: list[list[TruncatedSeries]] | None):
        """Gaussian elimination with invertible-constant pivots; returns (det, reduced rhs)."""
        n = self.size
        ring = self.ring
        a = [list(row) for row in self.rows]
        det = TruncatedSeries.one(ring)
        for col in range(n):
            pivot = max(range(col, n), key=lambda r: abs(a[r][col].constant))
            if abs(a[pivot][col].constant) <= ring.floor:
                raise VanishingConstantTermError("Matrix constant term is singular.")
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                if rhs is not None:
                    rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
                det = -det
            inv = a[col][col].inverse()
            det = det * a[col][col]
            for r in range(n):
                if r == col:
                    continue
                factor = a[r][col] * inv
                if not factor.terms:
                    continue
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
                if rhs is not None:
                    rhs[r] = [x - factor * y for x, y in zip(rhs[r], rhs[col])]
            if rhs is not None:
                a[col] = [x * inv for x in a[col]]
                rhs[col] = [x * inv for x in rhs[col]]
        return det, rhs

    def det(self) -> TruncatedSeries:
        if self.size == 0:
            raise ValueError("Empty matrix has no determinant here.")
        det, _ = self._eliminate(None)
        return det

    def inverse(self) -> "SeriesMatrix":
        ring = self.ring
        n = self.size
        identity = [
            [TruncatedSeries.one(ring) if i == j else TruncatedSeries.zero(ring) for j in range(n)] for i in range(n)
        ]
        _, rhs = self._eliminate(identity)
        return SeriesMatrix.from_rows(rhs)

    def solve(self, v: Sequence[TruncatedSeries]) -> SeriesVector:
        _, rhs = self._eliminate([[x] for x in v])
        return tuple(row[0] for row in rhs)


@dataclass(frozen=True)
class FixedPointSolution:
    point: SeriesVector
    iterations: int
    residual: object = field(repr=False)


def newton_iteration_limit(ring: SeriesRing) -> int:
    return math.ceil(math.log2(ring.total_order + 1)) + 2


def solve_fixed_point(
    equation: Callable[[SeriesVector], SeriesVector],
    jacobian: Callable[[SeriesVector], SeriesMatrix],
    start: Sequence[TruncatedSeries],
) -> FixedPointSolution:
    """Newton iteration ``xi <- xi - J(xi)^-1 F(xi)``; the valuation of the error doubles each step."""
    point = tuple(start)
    if not point:
        raise ValueError("solve_fixed_point needs at least one unknown.")
    ring = point[0].ring
    limit = newton_iteration_limit(ring)
    residual = equation(point)
    for iteration in range(limit + 1):
        size = vector_max_abs(residual)
        logger.debug("Newton iteration %d residual %s", iteration, ring.ctx.nstr(size, 5))
        if size <= ring.residual_floor:
            return FixedPointSolution(point, iteration, size)
        if iteration == limit:
            break
        step = jacobian(point).solve(residual)
        point = vector_sub(point, step)
        residual = equation(point)
    raise FixedPointDivergenceError(
        f"Residual {ring.ctx.nstr(vector_max_abs(residual), 5)} above floor after {limit} Newton steps."
    )


def integer_gate(value, tolerance: float = INTEGER_TOLERANCE) -> int:
    """Round a numerically integral complex value, failing loudly otherwise."""
    real = float(value.real)
    imag = float(value.imag)
    nearest = round(real)
    residual = max(abs(real - nearest), abs(imag))
    if residual >= tolerance:
        raise IntegerGateError(f"Value {real}+{imag}j is not within {tolerance} of an integer.")
    return int(nearest)


__all__ = [
    "DEFAULT_VARIABLES",
    "FixedPointDivergenceError",
    "FixedPointSolution",
    "INTEGER_TOLERANCE",
    "SeriesMatrix",
    "SeriesRing",
    "SeriesVector",
    "TruncatedSeries",
    "TruncationMismatchError",
    "VanishingConstantTermError",
    "exp",
    "exp_with_phase",
    "integer_gate",
    "log",
    "newton_iteration_limit",
    "power",
    "solve_fixed_point",
    "vector_max_abs",
    "vector_sub",
]
