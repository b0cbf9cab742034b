"""Directed-rounding interval arithmetic on top of MPFR (via gmpy2).

A :class:`RealEnclosure` is a pair of MPFR floats ``[lo, hi]`` guaranteed to
bracket the mathematical value it stands for.  Every operation rounds the low
endpoint toward minus infinity and the high endpoint toward plus infinity, so
enclosures stay sound under composition: if ``x in X`` and ``y in Y`` then
``x <op> y in X <op> Y``.

Exact scalars (``int``, ``float``, :class:`fractions.Fraction`, ``mpq``,
``mpfr``) mix into operations without pre-rounding; gmpy2 converts them
exactly and rounds the result once in the requested direction.

Comparisons against exact scalars (``contains``, ``strictly_gt`` and friends)
are performed exactly, never through an intermediate rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq

ExactScalar = Union[int, float, Fraction, "gmpy2.mpq", "gmpy2.mpfr"]

_SCALAR_TYPES = (int, float, Fraction, type(mpq()), type(mpfr()))


@lru_cache(maxsize=None)
def _down(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundDown)


@lru_cache(maxsize=None)
def _up(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundUp)


@lru_cache(maxsize=None)
def _near(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundToNearest)


def _coerce(value: ExactScalar) -> ExactScalar:
    """Normalize a scalar to a type gmpy2 handles exactly."""
    if isinstance(value, str):
        return mpq(Fraction(value))
    if isinstance(value, Fraction):
        return mpq(value)
    return value


@dataclass(frozen=True)
class RealEnclosure:
    """A rigorous interval ``[lo, hi]`` around a real value.

    ``precision_bits`` records the working precision that produced the
    endpoints; it is carried through arithmetic as the maximum of the operand
    precisions.
    """

    lo: "gmpy2.mpfr"
    hi: "gmpy2.mpfr"
    precision_bits: int

    def __post_init__(self):
        if gmpy2.is_nan(self.lo) or gmpy2.is_nan(self.hi) or not self.lo <= self.hi:
            raise ValueError(f"invalid enclosure endpoints [{self.lo}, {self.hi}]")

    # ---------------------------------------------------------------- build

    @staticmethod
    def from_value(value: ExactScalar, precision_bits: int) -> "RealEnclosure":
        """Tightest enclosure of an exact scalar at the given precision."""
        v = _coerce(value)
        zero = mpfr(0)
        return RealEnclosure(
            _down(precision_bits).add(v, zero),
            _up(precision_bits).add(v, zero),
            precision_bits,
        )

    @staticmethod
    def from_bounds(lo: ExactScalar, hi: ExactScalar, precision_bits: int) -> "RealEnclosure":
        """Enclosure of ``[lo, hi]``, rounding each endpoint outward."""
        zero = mpfr(0)
        return RealEnclosure(
            _down(precision_bits).add(_coerce(lo), zero),
            _up(precision_bits).add(_coerce(hi), zero),
            precision_bits,
        )

    # ---------------------------------------------------------------- props

    def width(self) -> "gmpy2.mpfr":
        """Upper bound on ``hi - lo``."""
        return _up(self.precision_bits).sub(self.hi, self.lo)

    def radius(self) -> "gmpy2.mpfr":
        """Upper bound on half the width."""
        return _up(self.precision_bits).div(self.width(), 2)

    def midpoint(self) -> "gmpy2.mpfr":
        ctx = _near(self.precision_bits)
        return ctx.div(ctx.add(self.lo, self.hi), 2)

    def mpq_bounds(self) -> tuple["gmpy2.mpq", "gmpy2.mpq"]:
        """Exact rational values of the endpoints (MPFR floats are dyadic)."""
        return mpq(self.lo), mpq(self.hi)

    # ------------------------------------------------------------- queries

    def contains(self, value: ExactScalar) -> bool:
        v = _coerce(value)
        return self.lo <= v <= self.hi

    def contains_enclosure(self, other: "RealEnclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_gt(self, bound: ExactScalar) -> bool:
        """True when every point of the enclosure exceeds ``bound``."""
        return self.lo > _coerce(bound)

    def strictly_lt(self, bound: ExactScalar) -> bool:
        return self.hi < _coerce(bound)

    def strictly_inside(self, lo: ExactScalar, hi: ExactScalar) -> bool:
        return self.strictly_gt(lo) and self.strictly_lt(hi)

    def max_abs(self) -> "gmpy2.mpfr":
        """Upper bound on ``|x|`` over the enclosure."""
        return max(abs(self.lo), abs(self.hi))

    def sign(self) -> int:
        """-1 / +1 when the enclosure is certainly negative / positive, else 0."""
        if self.hi < 0:
            return -1
        if self.lo > 0:
            return 1
        return 0

    # ---------------------------------------------------------- arithmetic

    def _bits_with(self, other) -> int:
        if isinstance(other, RealEnclosure):
            return max(self.precision_bits, other.precision_bits)
        return self.precision_bits

    def __neg__(self) -> "RealEnclosure":
        return RealEnclosure(-self.hi, -self.lo, self.precision_bits)

    def __abs__(self) -> "RealEnclosure":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealEnclosure(mpfr(0), max(-self.lo, self.hi), self.precision_bits)

    def __add__(self, other) -> "RealEnclosure":
        bits = self._bits_with(other)
        if isinstance(other, RealEnclosure):
            return RealEnclosure(
                _down(bits).add(self.lo, other.lo),
                _up(bits).add(self.hi, other.hi),
                bits,
            )
        if isinstance(other, _SCALAR_TYPES):
            v = _coerce(other)
            return RealEnclosure(_down(bits).add(self.lo, v), _up(bits).add(self.hi, v), bits)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "RealEnclosure":
        bits = self._bits_with(other)
        if isinstance(other, RealEnclosure):
            return RealEnclosure(
                _down(bits).sub(self.lo, other.hi),
                _up(bits).sub(self.hi, other.lo),
                bits,
            )
        if isinstance(other, _SCALAR_TYPES):
            v = _coerce(other)
            return RealEnclosure(_down(bits).sub(self.lo, v), _up(bits).sub(self.hi, v), bits)
        return NotImplemented

    def __rsub__(self, other) -> "RealEnclosure":
        if isinstance(other, _SCALAR_TYPES):
            bits = self.precision_bits
            v = _coerce(other)
            return RealEnclosure(_down(bits).sub(v, self.hi), _up(bits).sub(v, self.lo), bits)
        return NotImplemented

    def __mul__(self, other) -> "RealEnclosure":
        bits = self._bits_with(other)
        if isinstance(other, RealEnclosure):
            pairs = [(self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi)]
        elif isinstance(other, _SCALAR_TYPES):
            v = _coerce(other)
            pairs = [(self.lo, v), (self.hi, v)]
        else:
            return NotImplemented
        down, up = _down(bits), _up(bits)
        lo = min(down.mul(a, b) for a, b in pairs)
        hi = max(up.mul(a, b) for a, b in pairs)
        return RealEnclosure(lo, hi, bits)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RealEnclosure":
        bits = self._bits_with(other)
        if isinstance(other, RealEnclosure):
            if other.sign() == 0:
                raise ZeroDivisionError("division by an enclosure containing zero")
            pairs = [(self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi)]
        elif isinstance(other, _SCALAR_TYPES):
            v = _coerce(other)
            if v == 0:
                raise ZeroDivisionError("division by zero scalar")
            pairs = [(self.lo, v), (self.hi, v)]
        else:
            return NotImplemented
        down, up = _down(bits), _up(bits)
        lo = min(down.div(a, b) for a, b in pairs)
        hi = max(up.div(a, b) for a, b in pairs)
        return RealEnclosure(lo, hi, bits)

    def __rtruediv__(self, other) -> "RealEnclosure":
        if isinstance(other, _SCALAR_TYPES):
            if self.sign() == 0:
                raise ZeroDivisionError("division by an enclosure containing zero")
            bits = self.precision_bits
            v = _coerce(other)
            down, up = _down(bits), _up(bits)
            lo = min(down.div(v, self.lo), down.div(v, self.hi))
            hi = max(up.div(v, self.lo), up.div(v, self.hi))
            return RealEnclosure(lo, hi, bits)
        return NotImplemented

    def reciprocal(self) -> "RealEnclosure":
        return 1 / self

    def __pow__(self, exponent: int) -> "RealEnclosure":
        """Integer power by binary exponentiation over interval products."""
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return (self ** (-exponent)).reciprocal()
        result = RealEnclosure.from_value(1, self.precision_bits)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def sqrt(self) -> "RealEnclosure":
        if self.lo < 0:
            raise ValueError("sqrt of an enclosure with negative points")
        bits = self.precision_bits
        return RealEnclosure(_down(bits).sqrt(self.lo), _up(bits).sqrt(self.hi), bits)

    # ------------------------------------------------------------- display

    def __str__(self) -> str:
        return f"{self.midpoint()} +- {self.radius():.2e}"

    def __repr__(self) -> str:
        return f"RealEnclosure(lo={self.lo!r}, hi={self.hi!r}, precision_bits={self.precision_bits})"


def enclosure_sum(terms, precision_bits: int) -> RealEnclosure:
    """Sum a sequence of enclosures at a common working precision."""
    total = RealEnclosure.from_value(0, precision_bits)
    for t in terms:
        total = total + t
    return total
