"""Characteristic polynomial of the k-step recurrence and its roots.

The monic polynomial is ``x^k - x^(k-1) - ... - x - 1``.  Multiplying by
``(x - 1)`` gives the auxiliary form ``x^(k+1) - 2 x^k + 1 = x^k (x - 2) + 1``
whose factored shape is numerically stable near ``x = 2`` and is what all
root bracketing here works with.

The dominant root ``alpha`` (the single root of modulus above 1) is isolated
on ``[2 - 1/k, 2]`` by exact rational bisection followed by interval-Newton
refinement, still in exact rational arithmetic, so every bracket in the
refinement chain provably contains ``alpha``.  The chain is memoized per k
and only ever extended, which makes enclosures at growing precision nested
by construction.  The remaining k - 1 roots are polished from double
precision seeds by an Aberth-Ehrlich simultaneous iteration and carry
residual bounds rather than certified disks.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr, mpq

from .enclosure import RealEnclosure, _down, _up
from .errors import ConvergenceError, OrderError, RootIsolationError

_NEWTON_CAP = 64
_ABERTH_CAP = 120


def _require_order(k: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")


def _require_precision(precision_bits: int) -> None:
    if not isinstance(precision_bits, int) or precision_bits < 32:
        raise ValueError(f"precision_bits must be an integer >= 32, got {precision_bits!r}")


@dataclass(frozen=True)
class CharPoly:
    """Coefficients of ``x^k - x^(k-1) - ... - x - 1``, degree-descending."""

    k: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.k + 1 or self.coeffs[0] != 1 or any(c != -1 for c in self.coeffs[1:]):
            raise ValueError("malformed characteristic polynomial coefficients")

    def evaluate(self, z):
        """Horner evaluation; works for any ring element (int, mpq, mpc, ...)."""
        acc = 0
        for c in self.coeffs:
            acc = acc * z + c
        return acc

    def derivative_at(self, z):
        acc = 0
        n = self.k
        for i, c in enumerate(self.coeffs[:-1]):
            acc = acc * z + c * (n - i)
        return acc


def char_poly(k: int) -> CharPoly:
    """The monic degree-k polynomial with all lower coefficients -1."""
    _require_order(k)
    return CharPoly(k, (1,) + (-1,) * k)


@dataclass(frozen=True)
class ApproxRoot:
    """A non-dominant root approximation with a residual magnitude bound."""

    re: "gmpy2.mpfr"
    im: "gmpy2.mpfr"
    residual_bound: "gmpy2.mpfr"

    def as_mpc(self) -> "gmpy2.mpc":
        return mpc(self.re, self.im)

    def modulus(self) -> "gmpy2.mpfr":
        return abs(mpc(self.re, self.im))


@dataclass(frozen=True)
class ComplexRootSet:
    """Certified dominant root plus residual-bounded approximations of the rest."""

    dominant: RealEnclosure
    others: tuple[ApproxRoot, ...]
    k: int

    def all_values(self) -> list["gmpy2.mpc"]:
        """Dominant midpoint plus the complex approximations."""
        return [mpc(self.dominant.midpoint(), 0)] + [r.as_mpc() for r in self.others]


# --------------------------------------------------------------------------
# auxiliary polynomial, exact rational evaluation
# --------------------------------------------------------------------------


def _aux_exact(k: int, x: "gmpy2.mpq") -> "gmpy2.mpq":
    """f(x) = x^k (x - 2) + 1 in exact rational arithmetic."""
    return x**k * (x - 2) + 1


def eval_aux(k: int, x, precision_bits: int = 96) -> RealEnclosure:
    """Enclosure of the auxiliary polynomial ``f(x) = x^k (x - 2) + 1``.

    Accepts an exact scalar or a :class:`RealEnclosure`.  The factored form
    avoids the catastrophic cancellation of ``x^(k+1) - 2 x^k + 1`` near 2.
    """
    _require_order(k)
    _require_precision(precision_bits)
    if isinstance(x, RealEnclosure):
        enc = x
        if enc.precision_bits < precision_bits:
            enc = RealEnclosure(enc.lo, enc.hi, precision_bits)
    else:
        enc = RealEnclosure.from_value(x, precision_bits)
    return enc**k * (enc - 2) + 1


def root_bounds(k: int) -> tuple[Fraction, Fraction, Fraction]:
    """Rational bounds for the dominant root: (2 - 1/k, 2, best lower bound).

    The tight lower bound is the larger of 2 - 1/(3k) (valid for k >= 4) and
    2 (1 - 2^-k) (valid for every k).
    """
    _require_order(k)
    lower = 2 - Fraction(1, k)
    upper = Fraction(2)
    candidates = [2 - Fraction(1, 2 ** (k - 1))]
    if k >= 4:
        candidates.append(2 - Fraction(1, 3 * k))
    return lower, upper, max(candidates)


# --------------------------------------------------------------------------
# dominant root: exact bracket chain, nested across precisions
# --------------------------------------------------------------------------


class _BracketChain:
    """Nested brackets around alpha for one k, extended on demand.

    Brackets are exact rationals.  Bisection handles widths above 1/(16k)
    (signs of f at rational points are exact, so every step is certified);
    interval Newton takes over below that and contracts quadratically.  A
    Newton step that fails to halve the width falls back to one bisection
    step, so progress is unconditional.
    """

    def __init__(self, k: int):
        self.k = k
        self.lock = threading.Lock()
        lo = mpq(2 * k - 1, k)
        hi = mpq(2)
        if not (_aux_exact(k, lo) < 0 < _aux_exact(k, hi)):
            raise RootIsolationError(f"no certified sign change on the initial bracket for k={k}")
        self.brackets: list[tuple["gmpy2.mpq", "gmpy2.mpq"]] = [(lo, hi)]

    # -- helpers

    def _width(self, br) -> "gmpy2.mpq":
        return br[1] - br[0]

    def _bisect(self, br):
        k = self.k
        mid = (br[0] + br[1]) / 2
        fm = _aux_exact(k, mid)
        if fm == 0:  # alpha is irrational; a rational midpoint cannot hit it
            raise RootIsolationError(f"rational midpoint evaluated to zero for k={k}")
        return (mid, br[1]) if fm < 0 else (br[0], mid)

    def _derivative_range(self, br):
        # f'(x) = x^(k-1) ((k+1) x - 2k); both factors positive and increasing
        # on [2 - 1/k, 2], so endpoint products bound the range.
        k = self.k
        lo, hi = br
        d_lo = lo ** (k - 1) * ((k + 1) * lo - 2 * k)
        d_hi = hi ** (k - 1) * ((k + 1) * hi - 2 * k)
        if d_lo <= 0:
            raise RootIsolationError(f"derivative not certified positive on bracket for k={k}")
        return d_lo, d_hi

    def _newton(self, br):
        k = self.k
        lo, hi = br
        mid = (lo + hi) / 2
        fm = _aux_exact(k, mid)
        if fm == 0:
            raise RootIsolationError(f"rational midpoint evaluated to zero for k={k}")
        d_lo, d_hi = self._derivative_range(br)
        if fm > 0:
            n_lo, n_hi = mid - fm / d_lo, mid - fm / d_hi
        else:
            n_lo, n_hi = mid - fm / d_hi, mid - fm / d_lo
        new_lo = max(lo, n_lo)
        new_hi = min(hi, n_hi)
        if new_lo > new_hi:
            raise RootIsolationError(f"interval Newton produced an empty bracket for k={k}")
        s_lo, s_hi = self._simplify(new_lo, new_hi)
        # outward rounding must not escape the parent bracket (nesting)
        return max(lo, s_lo), min(hi, s_hi)

    @staticmethod
    def _simplify(lo, hi):
        # Round endpoints outward onto a dyadic grid so rational sizes track
        # the bracket width instead of compounding across Newton steps.
        width = hi - lo
        if width <= 0:
            return lo, hi
        wbits = max(0, -_floor_log2(width))
        shift = 2 * wbits + 64
        scale = mpq(2) ** shift
        new_lo = mpq((lo * scale).numerator // (lo * scale).denominator, 1) / scale
        num, den = (hi * scale).numerator, (hi * scale).denominator
        new_hi = mpq(-((-num) // den), 1) / scale
        return new_lo, new_hi

    # -- public

    def ensure(self, width_bits: int) -> tuple["gmpy2.mpq", "gmpy2.mpq"]:
        """Extend until the last bracket is narrower than 2^-width_bits and
        certifies the strict root bounds, then return the first bracket that
        already meets the width target (keeping results nested across calls)."""
        k = self.k
        target = mpq(1, 2**width_bits)
        with self.lock:
            self._extend(target)
            for br in self.brackets:
                if self._width(br) <= target and self._bounds_ok(br):
                    return br
            return self.brackets[-1]

    def _bounds_ok(self, br) -> bool:
        lo, hi = br
        k = self.k
        if not (lo > mpq(2 * k - 1, k) and hi < 2):
            return False
        if not lo > 2 - mpq(2, 2**k):
            return False
        if k >= 4 and not lo > 2 - mpq(1, 3 * k):
            return False
        return True

    def _extend(self, target) -> None:
        k = self.k
        switch = min(mpq(1, 16), mpq(1, 16 * k))
        newton_steps = 0
        while self._width(self.brackets[-1]) > target or not self._bounds_ok(self.brackets[-1]):
            br = self.brackets[-1]
            if self._width(br) > switch:
                self.brackets.append(self._bisect(br))
                continue
            new = self._newton(br)
            if self._width(new) > self._width(br) / 2:
                new = self._bisect(br)
            self.brackets.append(new)
            newton_steps += 1
            if newton_steps > _NEWTON_CAP:
                raise RootIsolationError(f"bracket refinement did not converge for k={k}")


def _floor_log2(q: "gmpy2.mpq") -> int:
    """floor(log2(q)) for positive rational q, exact."""
    num, den = q.numerator, q.denominator
    e = num.bit_length() - den.bit_length()
    return e if (num >> e if e >= 0 else num << -e) >= den else e - 1


_CHAINS: dict[int, _BracketChain] = {}
_CHAINS_LOCK = threading.Lock()


def _chain(k: int) -> _BracketChain:
    with _CHAINS_LOCK:
        chain = _CHAINS.get(k)
        if chain is None:
            chain = _CHAINS[k] = _BracketChain(k)
        return chain


@lru_cache(maxsize=4096)
def dominant_root(k: int, precision_bits: int = 96) -> RealEnclosure:
    """Certified enclosure of the dominant root alpha, width <= 2^-precision_bits.

    The result always lies strictly inside (2 - 1/k, 2), above 2 (1 - 2^-k),
    and, for k >= 4, strictly inside (2 - 1/(3k), 2).  Enclosures at doubled
    precision are contained in the coarser ones.
    """
    _require_order(k)
    _require_precision(precision_bits)
    lo_q, hi_q = _chain(k).ensure(precision_bits + 2)
    out_bits = precision_bits + 64
    zero = mpfr(0)
    return RealEnclosure(
        _down(out_bits).add(lo_q, zero),
        _up(out_bits).add(hi_q, zero),
        out_bits,
    )


def sign_change_certificate(k: int, enclosure: RealEnclosure) -> bool:
    """Exact check that the auxiliary polynomial changes sign across the enclosure."""
    _require_order(k)
    lo_q, hi_q = enclosure.mpq_bounds()
    return _aux_exact(k, lo_q) < 0 < _aux_exact(k, hi_q)


# --------------------------------------------------------------------------
# full root set
# --------------------------------------------------------------------------


def _horner_mpc(coeffs, z):
    acc = mpc(0)
    for c in coeffs:
        acc = acc * z + c
    return acc


def _aberth(coeffs, seeds, step_target):
    """Aberth-Ehrlich simultaneous iteration; returns polished roots."""
    n = len(coeffs) - 1
    deriv = [c * (n - i) for i, c in enumerate(coeffs[:-1])]
    roots = list(seeds)
    for _ in range(_ABERTH_CAP):
        max_step = mpfr(0)
        for i in range(n):
            z = roots[i]
            p = _horner_mpc(coeffs, z)
            dp = _horner_mpc(deriv, z)
            if dp == 0:
                roots[i] = z + mpfr("0.125") * (1 + abs(z))
                max_step = max(max_step, abs(roots[i] - z))
                continue
            w = p / dp
            s = mpc(0)
            for j in range(n):
                if j != i:
                    s += 1 / (z - roots[j])
            denom = 1 - w * s
            step = w if denom == 0 else w / denom
            roots[i] = z - step
            max_step = max(max_step, abs(step))
        if max_step <= step_target:
            return roots
    return roots


@lru_cache(maxsize=1024)
def all_roots(k: int, precision_bits: int = 96) -> ComplexRootSet:
    """Dominant root (certified) plus the k - 1 interior roots (residual-bounded).

    Interior roots are polished until each residual |p(z)| falls below
    2^(-precision_bits / 2); failing that a :class:`ConvergenceError` carrying
    the best residuals is raised.
    """
    _require_order(k)
    _require_precision(precision_bits)
    poly = char_poly(k)
    work = precision_bits + 64

    seeds_np = np.roots(np.array(poly.coeffs, dtype=float))
    with gmpy2.context(precision=work):
        seeds = [mpc(complex(z)) for z in seeds_np]
        roots = _aberth(poly.coeffs, seeds, mpfr(2) ** (-(work - 8)))

        dominant_enc = dominant_root(k, precision_bits)
        alpha_mid = dominant_enc.midpoint()
        # drop the iterate that landed on alpha; keep the k - 1 interior ones
        by_dist = sorted(range(len(roots)), key=lambda i: abs(roots[i] - alpha_mid))
        interior = [roots[i] for i in by_dist[1:]]

        residual_target = mpfr(2) ** (-(precision_bits // 2))
        others = []
        for z in interior:
            residual = abs(_horner_mpc(poly.coeffs, z))
            # coarse Horner rounding allowance on top of the computed residual
            slack = mpfr(2 * k + 2) * max(mpfr(1), abs(z)) ** k * mpfr(2) ** (-(work - 4))
            others.append(ApproxRoot(z.real, z.imag, residual + slack))
        bad = [float(r.residual_bound) for r in others if not r.residual_bound < residual_target]
        if bad:
            raise ConvergenceError(
                f"root polishing missed the residual target for k={k}",
                residuals=sorted(float(r.residual_bound) for r in others),
            )
        if any(not r.modulus() < 1 for r in others):
            raise RootIsolationError(f"an interior root approximation has modulus >= 1 for k={k}")

    others.sort(key=lambda r: (r.re, r.im))
    return ComplexRootSet(dominant=dominant_enc, others=tuple(others), k=k)
