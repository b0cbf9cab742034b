"""Error-sequence analysis and rounding-threshold scans.

The error of the single-term approximation, ``E(n) = F(n) - m(alpha) *
alpha^(n-1)``, satisfies the same k-step recurrence as the sequence itself
and stays strictly inside (-1/2, 1/2) on the whole domain; the functions
here build certified tables of it, check the recurrence identities on those
tables, verify the coefficient-function properties, and locate the index
from which rounding a single geometric term reproduces a target sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from gmpy2 import mpq

from .binet import _round_certificate, coefficient_m, coefficient_m_exact, dominant_term
from .charpoly import dominant_root
from .enclosure import RealEnclosure
from .errors import (
    CertificationError,
    IndexDomainError,
    MalformedRangeError,
    OrderError,
)
from .exact import kbonacci_range

_PRECISION_CAP = 1 << 20


@dataclass(frozen=True)
class ErrorRow:
    """One line of the error table: exact term, dominant term, difference."""

    n: int
    exact: int
    approx: RealEnclosure
    error: RealEnclosure


@dataclass(frozen=True)
class ThresholdReport:
    """Outcome of a rounding-threshold scan over a finite target sequence."""

    coefficient: object
    base: object
    target: tuple[int, ...]
    n_start: int
    threshold: Optional[int]
    verified_up_to: int
    matches: tuple[bool, ...]


@dataclass(frozen=True)
class MPropertyReport:
    """Pass/fail record for the coefficient-function properties on [2 - 1/k, 2]."""

    k: int
    samples: int
    endpoint_value_is_one: bool
    endpoint_value_is_half: bool
    strictly_decreasing: bool
    dominates_reciprocal: bool
    intersection_at_two_and_k: bool

    @property
    def passed(self) -> bool:
        return (
            self.endpoint_value_is_one
            and self.endpoint_value_is_half
            and self.strictly_decreasing
            and self.dominates_reciprocal
            and self.intersection_at_two_and_k
        )


# --------------------------------------------------------------------------
# error table
# --------------------------------------------------------------------------


def _certified_row(k: int, n: int, exact: int, precision_bits: int) -> ErrorRow:
    bits = max(precision_bits, (n if n > 0 else 0) + 64)
    while bits <= _PRECISION_CAP:
        approx = dominant_term(k, n, bits)
        error = exact - approx
        if error.strictly_inside(mpq(-1, 2), mpq(1, 2)):
            return ErrorRow(n=n, exact=exact, approx=approx, error=error)
        bits *= 2
    raise CertificationError(f"could not certify |E({n})| < 1/2 for k={k} within the precision cap")


def error_table(k: int, n_lo: int, n_hi: int, precision_bits: int = 96) -> list[ErrorRow]:
    """Rows (n, F(n), dominant term, error) with certified |error| < 1/2.

    Precision escalates per row until the error enclosure lies strictly
    inside (-1/2, 1/2), so the bound in every returned row is proven.
    """
    if n_hi < n_lo:
        raise IndexDomainError(f"empty range: n_lo={n_lo} > n_hi={n_hi}")
    exact_vals = kbonacci_range(k, n_lo, n_hi)
    return [
        _certified_row(k, n, exact_vals[n - n_lo], precision_bits)
        for n in range(n_lo, n_hi + 1)
    ]


def _check_contiguous(rows: Sequence[ErrorRow]) -> None:
    if not rows:
        raise MalformedRangeError("no rows supplied")
    for prev, cur in zip(rows, rows[1:]):
        if cur.n != prev.n + 1:
            raise MalformedRangeError(
                f"rows must cover a contiguous index range; gap between n={prev.n} and n={cur.n}"
            )


def check_error_recurrence(rows: Sequence[ErrorRow], k: int) -> list[tuple[int, RealEnclosure]]:
    """Residual enclosures of ``E(n) - (E(n-1) + ... + E(n-k))``.

    The rows must cover a contiguous range longer than k; the recurrence is
    checked at every n >= 2 whose full k-window is available.  Each residual
    must contain 0 (the identity is exact); the enclosure width reflects the
    rows' precision.
    """
    if not isinstance(k, int) or k < 2:
        raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")
    _check_contiguous(rows)
    if len(rows) <= k:
        raise MalformedRangeError(f"need more than k={k} contiguous rows, got {len(rows)}")
    first = rows[0].n
    residuals = []
    for i, row in enumerate(rows):
        if row.n < 2 or i < k:
            continue
        acc = rows[i - 1].error
        for j in range(2, k + 1):
            acc = acc + rows[i - j].error
        residuals.append((row.n, row.error - acc))
    return residuals


def two_step_residuals(rows: Sequence[ErrorRow], k: int) -> list[tuple[int, RealEnclosure]]:
    """Residual enclosures of ``E(n+1) - (2 E(n) - E(n-k))`` on the rows.

    The two-step identity follows from subtracting consecutive k-term sums,
    so it applies at n >= 2 with rows present at n+1, n, and n-k.
    """
    if not isinstance(k, int) or k < 2:
        raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")
    _check_contiguous(rows)
    first = rows[0].n
    out = []
    for i, row in enumerate(rows):
        n = row.n
        if n < 2 or i + 1 >= len(rows) or i - k < 0:
            continue
        residual = rows[i + 1].error - (row.error * 2 - rows[i - k].error)
        out.append((n, residual))
    return out


# --------------------------------------------------------------------------
# coefficient-function properties
# --------------------------------------------------------------------------


def check_m_properties(k: int, samples: int = 1024, precision_bits: int = 128) -> MPropertyReport:
    """Verify the coefficient-function claims on [2 - 1/k, 2].

    Endpoint values (exactly 1 and exactly 1/2) and the intersection of the
    curve with 1/x (a quadratic with roots exactly {2, k}) are checked in
    exact rational arithmetic; strict decrease and domination of 1/x are
    checked on a rational sample grid with enclosure arithmetic.
    """
    if not isinstance(k, int) or k < 2:
        raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")

    a = 2 - Fraction(1, k)
    b = Fraction(2)
    part1 = coefficient_m_exact(k, a) == 1
    part2 = coefficient_m_exact(k, b) == Fraction(1, 2)

    # 1/x = m(x) cross-multiplies to x^2 - (k+2) x + 2k = 0; confirm the
    # factorization (x - 2)(x - k) by exact substitution and discriminant.
    quad = lambda x: x * x - (k + 2) * x + 2 * k
    part_roots = quad(2) == 0 and quad(k) == 0 and (k + 2) ** 2 - 8 * k == (k - 2) ** 2

    step = (b - a) / (samples - 1)
    grid = [a + i * step for i in range(samples)]
    values = [coefficient_m(k, RealEnclosure.from_value(x, precision_bits)) for x in grid]

    part3 = all(values[i].lo > values[i + 1].hi for i in range(samples - 1))
    part4 = all(
        values[i].strictly_gt(1 / grid[i]) for i in range(1, samples - 1)
    )

    return MPropertyReport(
        k=k,
        samples=samples,
        endpoint_value_is_one=part1,
        endpoint_value_is_half=part2,
        strictly_decreasing=part3,
        dominates_reciprocal=part4,
        intersection_at_two_and_k=part_roots,
    )


# --------------------------------------------------------------------------
# rounding thresholds
# --------------------------------------------------------------------------


def _round_exact(value: "mpq") -> int:
    shifted = value + mpq(1, 2)
    return int(shifted.numerator // shifted.denominator)


def rounding_threshold(
    coefficient,
    base,
    target: Sequence[int],
    n_start: int = 0,
) -> ThresholdReport:
    """Smallest index from which ``Round(coefficient * base^n)`` matches ``target``.

    ``target[i]`` is compared at index ``n = n_start + i``.  The threshold is
    the smallest tested n from which every later tested index matches; when
    even the last index mismatches there is no threshold and ``None`` is
    reported.  Exact rational inputs are evaluated exactly; enclosure inputs
    go through certified rounding (raising :class:`CertificationError` if an
    enclosure is too wide to round unambiguously).
    """
    target = tuple(int(t) for t in target)
    if not target:
        raise ValueError("target sequence must be non-empty")

    if isinstance(coefficient, RealEnclosure) or isinstance(base, RealEnclosure):
        bits = max(
            e.precision_bits for e in (coefficient, base) if isinstance(e, RealEnclosure)
        )
        c = coefficient if isinstance(coefficient, RealEnclosure) else RealEnclosure.from_value(coefficient, bits)
        b = base if isinstance(base, RealEnclosure) else RealEnclosure.from_value(base, bits)
        if not b.strictly_gt(1):
            raise ValueError("base must certifiably exceed 1")
        rounded = []
        for i in range(len(target)):
            cert = _round_certificate(c * b ** (n_start + i))
            if cert is None:
                raise CertificationError(
                    f"enclosure at index {n_start + i} is too wide to round; "
                    "supply inputs at higher precision"
                )
            rounded.append(cert[0])
    else:
        c = mpq(Fraction(str(coefficient)) if isinstance(coefficient, str) else Fraction(coefficient))
        b = mpq(Fraction(str(base)) if isinstance(base, str) else Fraction(base))
        if not b > 1:
            raise ValueError("base must exceed 1")
        rounded = [_round_exact(c * b ** (n_start + i)) for i in range(len(target))]

    matches = tuple(r == t for r, t in zip(rounded, target))
    threshold: Optional[int] = None
    if matches[-1]:
        i = len(matches)
        while i > 0 and matches[i - 1]:
            i -= 1
        threshold = n_start + i
    return ThresholdReport(
        coefficient=coefficient,
        base=base,
        target=target,
        n_start=n_start,
        threshold=threshold,
        verified_up_to=n_start + len(target) - 1,
        matches=matches,
    )


# --------------------------------------------------------------------------
# counterexample presets
# --------------------------------------------------------------------------


def preset_scaled_fib(n_terms: int = 40, precision_bits: int = 256):
    """Fibonacci scaled by 10: single-term rounding works only from n = 5.

    Returns (coefficient, base, target, n_start) with the coefficient
    10 / sqrt(5) and base (1 + sqrt(5)) / 2 as enclosures.
    """
    sqrt5 = RealEnclosure.from_value(5, precision_bits).sqrt()
    coefficient = 10 / sqrt5
    base = (sqrt5 + 1) / 2
    target = [10 * f for f in kbonacci_range(2, 0, n_terms - 1)]
    return coefficient, base, target, 0


def preset_gn(n_terms: int = 40, precision_bits: int = 256):
    """G(n) = 2 G(n-1) + 4 G(n-2): both characteristic roots exceed modulus 1,
    so no single-term rounding threshold exists.

    Returns (coefficient, base, target, n_start) with coefficient
    1 / (2 sqrt(5)) and base 1 + sqrt(5).
    """
    sqrt5 = RealEnclosure.from_value(5, precision_bits).sqrt()
    coefficient = 1 / (sqrt5 * 2)
    base = sqrt5 + 1
    target = [1, 2]
    while len(target) < n_terms:
        target.append(2 * target[-1] + 4 * target[-2])
    return coefficient, base, target[:n_terms], 1


def preset_fib(n_terms: int = 40, precision_bits: int = 256):
    """Plain Fibonacci driven by the dominant-root data: threshold 0.

    Returns (coefficient, base, target, n_start) with the certified dominant
    root as base and its coefficient as weight, scaled by one power of the
    base so index n gets base^n (the term formula uses base^(n-1))."""
    alpha = dominant_root(2, precision_bits)
    coefficient = coefficient_m(2, alpha) / alpha
    target = kbonacci_range(2, 0, n_terms - 1)
    return coefficient, alpha, target, 0
