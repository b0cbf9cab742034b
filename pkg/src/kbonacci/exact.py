"""Exact big-integer evaluation of the k-step Fibonacci recurrence.

Terms follow the indexing with domain start at ``n = 2 - k``: the k initial
terms are ``0, 0, ..., 0, 1`` (indices 2-k through 1) and every later term is
the sum of the preceding k terms.  Two independent evaluators are provided,
a sliding-window iteration and a companion-matrix power, so each can serve
as an oracle for the other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IndexDomainError, OrderError


def _validate(k: int, n: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")
    if not isinstance(n, int) or n < 2 - k:
        raise IndexDomainError(
            f"index below sequence domain: need n >= 2 - k = {2 - k}, got {n!r}"
        )


@dataclass(frozen=True)
class SequenceWindow:
    """The most recent k terms, newest last; ``n_head`` indexes the newest."""

    k: int
    terms: tuple[int, ...]
    n_head: int

    def __post_init__(self):
        if len(self.terms) != self.k:
            raise ValueError(f"window must hold exactly k={self.k} terms")

    @staticmethod
    def initial(k: int) -> "SequenceWindow":
        if k < 2:
            raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")
        return SequenceWindow(k, (0,) * (k - 1) + (1,), 1)

    def advance(self) -> "SequenceWindow":
        """Slide one step: append the sum of the current window."""
        return SequenceWindow(self.k, self.terms[1:] + (sum(self.terms),), self.n_head + 1)


def kbonacci(k: int, n: int) -> int:
    """The n-th k-step Fibonacci number, by the defining sum."""
    _validate(k, n)
    if n <= 0:
        return 0
    if n == 1:
        return 1
    window = list(SequenceWindow.initial(k).terms)
    for _ in range(n - 1):
        window.append(sum(window))
        del window[0]
    return window[-1]


def kbonacci_range(k: int, n_lo: int, n_hi: int) -> list[int]:
    """The contiguous slice [F(n_lo), ..., F(n_hi)] in one pass."""
    _validate(k, n_lo)
    if n_hi < n_lo:
        raise IndexDomainError(f"empty range: n_lo={n_lo} > n_hi={n_hi}")
    out = []
    window = list(SequenceWindow.initial(k).terms)  # indices 2-k .. 1
    n_head = 1
    for n in range(n_lo, n_hi + 1):
        while n_head < n:
            window.append(sum(window))
            del window[0]
            n_head += 1
        out.append(window[n - n_head - 1])  # negative offset from the newest term
    return out


@dataclass(frozen=True)
class CompanionMatrix:
    """k x k companion form: top row all ones, subdiagonal identity."""

    k: int
    entries: tuple[tuple[int, ...], ...]

    @staticmethod
    def build(k: int) -> "CompanionMatrix":
        if k < 2:
            raise OrderError(f"recurrence order must be an integer >= 2, got {k!r}")
        rows = [tuple(1 for _ in range(k))]
        for i in range(k - 1):
            rows.append(tuple(1 if j == i else 0 for j in range(k)))
        return CompanionMatrix(k, tuple(rows))


def _mat_mul(a, b, k):
    bt = list(zip(*b))
    return tuple(
        tuple(sum(row[i] * col[i] for i in range(k)) for col in bt) for row in a
    )


def _mat_pow(m, e, k):
    result = tuple(tuple(1 if i == j else 0 for j in range(k)) for i in range(k))
    base = m
    while e:
        if e & 1:
            result = _mat_mul(result, base, k)
        e >>= 1
        if e:
            base = _mat_mul(base, base, k)
    return result


def kbonacci_matrix(k: int, n: int) -> int:
    """Same value as :func:`kbonacci`, via companion-matrix exponentiation.

    The state vector (F(n), ..., F(n-k+1)) advances by one matrix multiply;
    starting from the unit state at n = 1, F(n) is the top-left entry of the
    (n-1)-th matrix power.  O(k^3 log n) big-integer multiplies.
    """
    _validate(k, n)
    if n <= 0:
        return 0
    power = _mat_pow(CompanionMatrix.build(k).entries, n - 1, k)
    return power[0][0]
