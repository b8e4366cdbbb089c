"""Representation counts in progressions and their comparison with the main term.

``R(n) = sum_{n1 + n2 = n, n1, n2 >= 1} Lambda(r n1 + b1) Lambda(r n2 + b2)`` is
predicted by ``(r / phi(r))^2 * S_r(r n + b1 + b2) * n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._parallel import blocks, ordered_map
from ..arith import euler_phi
from ..errors import ArgumentError
from ..expsum import progression_weights
from ..progression import ResidueClass
from ..sieve import LambdaTable
from ..singular import DEFAULT_PRODUCT_BOUND, product_tail_bound, singular_series_many, singular_series_product
from .convolution import DEFAULT_TOL, Convolution, convolve

SCAN_BLOCK = 1 << 16


def _same_modulus(rc1: ResidueClass, rc2: ResidueClass) -> int:
    if rc1.r != rc2.r:
        raise ArgumentError(f"residue classes use different moduli {rc1.r} and {rc2.r}")
    return rc1.r


@dataclass(frozen=True)
class RepCounts:
    """``values[n] = R(n)`` for ``0 <= n <= N`` (``values[0] = 0``)."""

    rc1: ResidueClass
    rc2: ResidueClass
    N: int
    values: np.ndarray
    method: str
    error_bound: float


def rep_counts(
    table: LambdaTable,
    rc1: ResidueClass,
    rc2: ResidueClass,
    N: int,
    method: str = "auto",
    tol: float = DEFAULT_TOL,
) -> RepCounts:
    """All ``R(n)``, ``n <= N``, from one convolution of the class weights.

    ``method`` is ``auto``, ``fft``, ``ntt`` or ``direct`` (``N <= 10**4``).
    """
    _same_modulus(rc1, rc2)
    if N < 1:
        raise ArgumentError(f"N must be >= 1, got {N}")
    w1 = progression_weights(table, rc1, N)
    w2 = progression_weights(table, rc2, N)
    conv: Convolution = convolve(w1, w2, N + 1, method=method, tol=tol)
    values = conv.values
    # n = 0, 1 have no decomposition with n1, n2 >= 1
    values[:2] = 0.0
    # the product of two non-negative sequences is non-negative; this only clears rounding noise
    np.maximum(values, 0.0, out=values)
    values.setflags(write=False)
    return RepCounts(rc1, rc2, N, values, conv.method, conv.error_bound)


def main_term(rc1: ResidueClass, rc2: ResidueClass, n: int, P: int = DEFAULT_PRODUCT_BOUND) -> float:
    r = _same_modulus(rc1, rc2)
    factor = (r / euler_phi(r)) ** 2
    return factor * singular_series_product(r, r * n + rc1.b + rc2.b, P).value * n


def main_terms(
    rc1: ResidueClass,
    rc2: ResidueClass,
    ns,
    P: int = DEFAULT_PRODUCT_BOUND,
    spf: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Vectorised :func:`main_term` over an integer array ``ns``."""
    r = _same_modulus(rc1, rc2)
    ns = np.asarray(ns, dtype=np.int64)
    s = singular_series_many(r, r * ns + rc1.b + rc2.b, P, spf)
    return (r / euler_phi(r)) ** 2 * s * ns


@dataclass(frozen=True)
class DiscrepancyReport:
    """Per-n rows ``(n, R, main, delta, relative)`` and aggregate statistics.

    ``relative`` is NaN where the main term vanishes; those rows are counted
    in ``zero_main`` and left out of the relative statistics.
    """

    r: int
    b1: int
    b2: int
    N: int
    window: tuple[int, int]
    n: np.ndarray
    R: np.ndarray
    main: np.ndarray
    method: str
    error_bound: float
    product_bound: int
    tail_bound: float
    delta: np.ndarray = field(init=False)
    relative: np.ndarray = field(init=False)

    def __post_init__(self):
        delta = self.R - self.main
        rel = np.full(delta.shape, np.nan)
        pos = self.main > 0
        rel[pos] = delta[pos] / self.main[pos]
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "relative", rel)

    @property
    def aggregates(self) -> dict:
        rel = np.abs(self.relative[~np.isnan(self.relative)])
        return {
            "rows": int(self.n.size),
            "zero_main": int(np.count_nonzero(self.main <= 0)),
            "mean_abs_relative": float(rel.mean()) if rel.size else math.nan,
            "median_abs_relative": float(np.median(rel)) if rel.size else math.nan,
            "max_abs_relative": float(rel.max()) if rel.size else math.nan,
            "sum_abs_delta": math.fsum(np.abs(self.delta)),
        }

    def rows(self):
        for i in range(self.n.size):
            yield (int(self.n[i]), float(self.R[i]), float(self.main[i]), float(self.delta[i]), float(self.relative[i]))


def discrepancy_scan(
    table: LambdaTable,
    rc1: ResidueClass,
    rc2: ResidueClass,
    N: int,
    window: Optional[tuple[int, int]] = None,
    threads: int = 1,
    P: int = DEFAULT_PRODUCT_BOUND,
    method: str = "auto",
) -> DiscrepancyReport:
    """Compare ``R(n)`` with the main term for ``n`` in ``window`` (default ``[1, N]``)."""
    lo, hi = window if window is not None else (1, N)
    if not 1 <= lo <= hi <= N:
        raise ArgumentError(f"window [{lo}, {hi}] is not inside [1, {N}]")
    reps = rep_counts(table, rc1, rc2, N, method=method)
    spf = table.spf if table.limit >= rc1.r * hi + rc1.b + rc2.b else None
    parts = ordered_map(
        lambda blk: main_terms(rc1, rc2, np.arange(blk[0], blk[1] + 1), P, spf),
        blocks(lo, hi, SCAN_BLOCK),
        threads,
    )
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    return DiscrepancyReport(
        rc1.r,
        rc1.b,
        rc2.b,
        N,
        (lo, hi),
        ns,
        reps.values[lo : hi + 1].copy(),
        np.concatenate(parts),
        reps.method,
        reps.error_bound,
        P,
        product_tail_bound(P),
    )


@dataclass(frozen=True)
class ExceptionScan:
    """Even ``m <= N`` in the right class mod ``r`` with no decomposition ``m = p1 + p2``.

    ``evens`` lists the exceptional even numbers themselves (``m = 2n``).
    """

    r: int
    b1: int
    b2: int
    N: int
    evens: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.evens)

    def count_above(self, floor: int) -> int:
        return sum(1 for m in self.evens if m > floor)


def admissible_evens(r: int, b1: int, b2: int, N: int) -> np.ndarray:
    """Even ``2 <= m <= N`` with ``m = b1 + b2 (mod r)``."""
    m = np.arange(2, N + 1, 2, dtype=np.int64)
    return m[(m - b1 - b2) % r == 0]


def exception_scan(table: LambdaTable, rc1: ResidueClass, rc2: ResidueClass, N: int) -> ExceptionScan:
    """Enumerate the exceptional even numbers up to ``N`` (primes only, no prime powers)."""
    r = _same_modulus(rc1, rc2)
    if N < 2:
        raise ArgumentError(f"N must be >= 2, got {N}")
    table.check_range(N, "N")
    n = np.arange(N + 1, dtype=np.int64)
    in1 = table.is_prime[: N + 1] & (n % r == rc1.b % r)
    primes2 = np.flatnonzero(table.is_prime[: N + 1] & (n % r == rc2.b % r))
    p1_min = int(np.argmax(in1)) if in1.any() else N + 1
    open_ = admissible_evens(r, rc1.b, rc2.b, N)
    # below the smallest possible sum nothing can be resolved
    stuck = open_[open_ < p1_min + (int(primes2[0]) if primes2.size else N + 1)]
    open_ = open_[open_ >= p1_min + (int(primes2[0]) if primes2.size else N + 1)]
    for p2 in primes2:
        if open_.size == 0:
            break
        reach = open_ - p2 >= p1_min
        if not reach.any():
            break
        cand = open_[reach]
        hit = in1[cand - p2]
        if hit.any():
            open_ = np.concatenate([open_[~reach], cand[~hit]])
            open_.sort()
    evens = np.sort(np.concatenate([stuck, open_]))
    return ExceptionScan(r, rc1.b, rc2.b, N, tuple(int(m) for m in evens))
