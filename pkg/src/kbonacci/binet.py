"""Binet-style evaluation: coefficient forms, the full k-root sum, and the
rounded single-term formula with a per-call rounding certificate.

The weight attached to a root x is ``m(x) = (x - 1) / (2 + (k+1)(x - 2))``.
Two published alternatives are evaluated for cross-checking: the
Spickerman-Joyner form ``(x^(k+1) - x^k) / (2 x^k - (k+1))`` (equal to m(x)
at every root of the characteristic polynomial) and, for k = 3, Spickerman's
``a^2 / ((a - s)(a - conj(s)))`` built from the root set.

``binet_round`` is the certified path: it encloses ``m(alpha) alpha^(n-1)``
with directed rounding at escalating precision until the enclosure excludes
both neighboring half-integer boundaries, so the returned integer is proven,
not sampled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .charpoly import ComplexRootSet, all_roots, dominant_root
from .enclosure import RealEnclosure
from .errors import (
    CertificationError,
    DegenerateDenominatorError,
    IndexDomainError,
    OrderError,
    PoleProximityError,
)

_PRECISION_CAP = 1 << 20
_PRECISION_STEP = 64


class CoefficientForm(enum.Enum):
    M_FUNCTION = "m_function"
    SPICKERMAN_JOYNER = "spickerman_joyner"
    SPICKERMAN_K3 = "spickerman_k3"


@dataclass(frozen=True)
class CoefficientValue:
    """A coefficient evaluated at one root, tagged with the form used."""

    k: int
    form: CoefficientForm
    value: Union[RealEnclosure, "gmpy2.mpc"]
    at_root: Union[RealEnclosure, "gmpy2.mpc"]
    residual_bound: Optional["gmpy2.mpfr"] = None


@dataclass(frozen=True)
class CertifiedInteger:
    """An integer with a rounding certificate.

    ``proof_gap`` is the certified distance from the value's enclosure to the
    nearest half-integer boundary; it is strictly positive for every value
    this package returns.
    """

    value: int
    proof_gap: float
    precision_used: int


@dataclass(frozen=True)
class BinetSum:
    """Result of the full k-root sum (non-certified cross-check path)."""

    value: "gmpy2.mpfr"
    imag_magnitude: "gmpy2.mpfr"
    max_root_residual: "gmpy2.mpfr"


def _require_order(k: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")


def _require_domain(k: int, n: int) -> None:
    _require_order(k)
    if not isinstance(n, int) or n < 2 - k:
        raise IndexDomainError(
            f"index below sequence domain: need n >= 2 - k = {2 - k}, got {n!r}"
        )


# --------------------------------------------------------------------------
# coefficient forms
# --------------------------------------------------------------------------


def coefficient_m(k: int, x) -> RealEnclosure:
    """Enclosure of ``(x - 1) / (2 + (k+1)(x - 2))``.

    ``x`` may be a :class:`RealEnclosure` or an exact scalar.  Raises
    :class:`PoleProximityError` when the denominator enclosure touches zero
    (pole at ``x = 2 - 2/(k+1)``).
    """
    _require_order(k)
    if not isinstance(x, RealEnclosure):
        x = RealEnclosure.from_value(x, 96)
    denom = (x - 2) * (k + 1) + 2
    if denom.sign() == 0:
        raise PoleProximityError(
            f"coefficient denominator encloses zero near the pole at 2 - 2/(k+1) for k={k}"
        )
    return (x - 1) / denom


def coefficient_m_exact(k: int, x: Fraction) -> Fraction:
    """Exact rational value of the coefficient function at a rational point."""
    _require_order(k)
    x = Fraction(x)
    denom = 2 + (k + 1) * (x - 2)
    if denom == 0:
        raise PoleProximityError(f"x={x} is the pole of the coefficient function for k={k}")
    return (x - 1) / denom


def _m_value_mpc(k: int, z):
    return (z - 1) / (2 + (k + 1) * (z - 2))


def coefficient_sj(k: int, root, precision_bits: int = 128) -> CoefficientValue:
    """Spickerman-Joyner coefficient ``(z^(k+1) - z^k) / (2 z^k - (k+1))`` at a root.

    Plain complex arithmetic at the requested precision; the reported
    residual bound is a rounding-noise estimate, not a certified disk.
    """
    _require_order(k)
    with gmpy2.context(precision=precision_bits + 32):
        z = mpc(root)
        zk = z**k
        denom = 2 * zk - (k + 1)
        if abs(denom) < mpfr(2) ** (-(precision_bits // 4)):
            raise DegenerateDenominatorError(
                f"coefficient denominator too small at root {complex(z)} for k={k}"
            )
        value = (zk * z - zk) / denom
        noise = (1 + abs(value)) * (4 * k + 8) * mpfr(2) ** (-(precision_bits + 24))
    return CoefficientValue(
        k=k,
        form=CoefficientForm.SPICKERMAN_JOYNER,
        value=value,
        at_root=z,
        residual_bound=noise,
    )


def coefficient_spickerman_k3(roots: ComplexRootSet) -> RealEnclosure:
    """Spickerman's k=3 coefficient ``a^2 / ((a - s)(a - conj(s)))``.

    Built literally from the root set: the conjugate pair makes the
    denominator real up to residual leakage, which is folded into the
    returned radius together with the imaginary remnant.
    """
    if roots.k != 3:
        raise OrderError(f"Spickerman's coefficient needs a k=3 root set, got k={roots.k}")
    bits = roots.dominant.precision_bits
    with gmpy2.context(precision=bits):
        alpha = mpc(roots.dominant.midpoint(), 0)
        s1, s2 = (r.as_mpc() for r in roots.others)
        value = alpha**2 / ((alpha - s1) * (alpha - s2))
        leak = abs(value.imag)
        sensitivity = sum((r.residual_bound for r in roots.others), mpfr(0)) * 8
        rounding = (1 + abs(value)) * mpfr(2) ** (-(bits - 8))
        radius = leak + sensitivity + rounding + mpfr(roots.dominant.radius())
        lo = value.real - radius
        hi = value.real + radius
    return RealEnclosure.from_bounds(lo, hi, bits)


# --------------------------------------------------------------------------
# Binet-style evaluation
# --------------------------------------------------------------------------


def dominant_term(k: int, n: int, precision_bits: int = 96) -> RealEnclosure:
    """Certified enclosure of ``m(alpha) * alpha^(n-1)``.

    Defined for every integer n (the expression needs no sequence domain);
    the working precision is the requested one plus the root enclosure's
    guard bits.
    """
    _require_order(k)
    if not isinstance(n, int):
        raise IndexDomainError(f"index must be an integer, got {n!r}")
    alpha = dominant_root(k, precision_bits)
    return coefficient_m(k, alpha) * alpha ** (n - 1)


def binet_full(k: int, n: int, precision_bits: int = 128) -> BinetSum:
    """The full sum of ``m(root) * root^(n-1)`` over all k roots.

    Non-certified complex arithmetic at fixed precision; the imaginary part
    should vanish up to rounding and is reported for inspection.
    """
    _require_domain(k, n)
    roots = all_roots(k, precision_bits)
    with gmpy2.context(precision=precision_bits + 32):
        total = mpc(0)
        for z in roots.all_values():
            total += _m_value_mpc(k, z) * z ** (n - 1)
        value = total.real
        imag = abs(total.imag)
        max_residual = max(
            (r.residual_bound for r in roots.others), default=mpfr(0)
        )
    return BinetSum(value=value, imag_magnitude=imag, max_root_residual=max_residual)


def _round_certificate(enc: RealEnclosure):
    """Return (rounded integer, proof gap) when the enclosure stays strictly
    between two half-integer boundaries, else None."""
    q_lo, q_hi = enc.mpq_bounds()
    half = mpq(1, 2)
    shifted_lo = q_lo + half
    m = shifted_lo.numerator // shifted_lo.denominator
    shifted_hi = q_hi + half
    if shifted_hi.numerator // shifted_hi.denominator != m:
        return None
    gap_lo = shifted_lo - m
    gap_hi = m + 1 - shifted_hi
    if gap_lo <= 0:
        return None
    return int(m), min(gap_lo, gap_hi)


def binet_round(k: int, n: int) -> CertifiedInteger:
    """Round(m(alpha) * alpha^(n-1)) with a certificate.

    Round(x) = floor(x + 1/2).  Starting precision is max(64, n + 64) bits
    (rounded up to a 64-bit step so root enclosures cache well) and doubles
    until the enclosure excludes both neighboring half-integer boundaries.
    """
    _require_domain(k, n)
    start = max(64, n + 64)
    bits = ((start + _PRECISION_STEP - 1) // _PRECISION_STEP) * _PRECISION_STEP
    while bits <= _PRECISION_CAP:
        cert = _round_certificate(dominant_term(k, n, bits))
        if cert is not None:
            value, gap = cert
            return CertifiedInteger(value=value, proof_gap=float(gap), precision_used=bits)
        bits *= 2
    raise CertificationError(
        f"rounding certification for (k={k}, n={n}) exceeded the {_PRECISION_CAP}-bit cap"
    )
