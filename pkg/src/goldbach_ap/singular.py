"""The singular series S_r(h) and its truncated Ramanujan-series expansion.

Product form::

    S_r(h) = prod_{p !| r, p !| h} (1 - 1/(p-1)^2) * prod_{p !| r, p | h} (1 + 1/(p-1))

Series form::

    sum_{q >= 1, (q, r) = 1} mu(q)^2 / phi(q)^2 * c_q(h)

The product over primes not dividing ``h`` is truncated at ``P``; its tail is
bounded by ``sum_{p > P} 1/(p-1)^2 < 2 / (P log P)``.  The product over
primes dividing ``h`` is finite and evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import factorize
from .errors import ArgumentError
from .sieve import _small_primes, _spf_sieve

DEFAULT_PRODUCT_BOUND = 10**7
DEFAULT_SERIES_BOUND = 10**5


@dataclass(frozen=True)
class SingularSeriesValue:
    r: int
    h: int
    value: float
    form: str  # "product" or "truncated"
    truncation: int
    tail_bound: Optional[float] = None


def product_tail_bound(P: int) -> float:
    """Upper bound for ``sum_{p > P} 1/(p-1)^2``."""
    return 2.0 / (P * math.log(P))


@lru_cache(maxsize=8)
def _primes_upto(P: int) -> np.ndarray:
    primes = _small_primes(P)
    primes.setflags(write=False)
    return primes


@lru_cache(maxsize=256)
def _odd_base_product(r: int, P: int) -> float:
    """``prod_{3 <= p <= P, p !| r} (1 - 1/(p-1)^2)`` via a summed log."""
    p = _primes_upto(P)[1:].astype(np.float64)
    keep = (r % _primes_upto(P)[1:]) != 0
    return math.exp(math.fsum(np.log1p(-1.0 / (p[keep] - 1.0) ** 2)))


def _check(r: int, h: int, bound: int, name: str) -> None:
    if r < 1:
        raise ArgumentError(f"r must be >= 1, got {r}")
    if bound < 1:
        raise ArgumentError(f"{name} must be >= 1, got {bound}")
    if h == 0:
        raise ArgumentError("the singular series diverges at h = 0")


def singular_series_product(r: int, h: int, P: int = DEFAULT_PRODUCT_BOUND) -> SingularSeriesValue:
    """Euler-product form of ``S_r(h)`` truncated at primes ``p <= P``.

    Evaluated as a cached product over all ``p <= P`` not dividing ``r``,
    corrected exactly at each prime dividing ``h``.
    """
    _check(r, h, P, "P")
    if P < 2:
        raise ArgumentError(f"P must be >= 2, got {P}")
    value = _odd_base_product(r, P) if P >= 3 else 1.0
    for p in factorize(abs(h)).primes:
        if r % p == 0:
            continue
        if p == 2:
            value *= 2.0
        elif p <= P:
            value *= (p - 1) / (p - 2)
        else:
            value *= p / (p - 1)
    if r % 2 and h % 2:
        value = 0.0
    return SingularSeriesValue(r, h, value, "product", P, product_tail_bound(P))


def singular_series_product_literal(r: int, h: int, P: int = DEFAULT_PRODUCT_BOUND) -> float:
    """Direct masked product over ``p <= P``, with the finite ``p | h`` part above ``P``."""
    _check(r, h, P, "P")
    primes = _primes_upto(P)
    pf = primes.astype(np.float64)
    not_r = (r % primes) != 0
    div_h = (abs(h) % primes) == 0
    first = np.prod(1.0 - 1.0 / (pf[not_r & ~div_h] - 1.0) ** 2)
    second = np.prod(1.0 + 1.0 / (pf[not_r & div_h] - 1.0))
    for p in factorize(abs(h)).primes:
        if p > P and r % p:
            second *= 1.0 + 1.0 / (p - 1)
    return float(first * second)


def singular_series_many(
    r: int, hs, P: int = DEFAULT_PRODUCT_BOUND, spf: Optional[np.ndarray] = None
) -> np.ndarray:
    """Product form of ``S_r(h)`` for an array of positive ``h``.

    ``spf`` is a smallest-prime-factor table covering ``max(hs)``; one is
    sieved when absent or too short.
    """
    hs = np.asarray(hs, dtype=np.int64)
    if hs.size == 0:
        return np.zeros(0)
    if hs.min() < 1:
        raise ArgumentError("singular_series_many expects positive h")
    top = int(hs.max())
    if spf is None or len(spf) <= top:
        spf = _spf_sieve(max(top, 2))
    value = np.full(hs.shape, _odd_base_product(r, P) if P >= 3 else 1.0)
    if r % 2:
        value[hs % 2 == 1] = 0.0
        value[hs % 2 == 0] *= 2.0
    rem = hs.copy()
    last = np.zeros_like(rem)
    active = np.flatnonzero(rem > 1)
    while active.size:
        p = spf[rem[active]].astype(np.int64)
        fresh = (p != last[active]) & (p != 2) & ((r % p) != 0)
        pf = p.astype(np.float64)
        ratio = np.where(pf <= P, (pf - 1.0) / (pf - 2.0 + (pf == 2)), pf / (pf - 1.0))
        idx = active[fresh]
        value[idx] *= ratio[fresh]
        last[active] = p
        rem[active] //= p
        active = active[rem[active] > 1]
    return value


@lru_cache(maxsize=4)
def _series_tables(Q: int):
    """Squarefree ``q <= Q`` with ``phi(q)`` and ``mu(q)`` for all ``q <= Q``."""
    mu = np.ones(Q + 1, dtype=np.int64)
    phi = np.arange(Q + 1, dtype=np.int64)
    for p in _small_primes(Q):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
    mu[0] = 0
    q = np.flatnonzero(mu != 0)
    for arr in (mu, phi, q):
        arr.setflags(write=False)
    return q, mu, phi


def _series_terms(h: int, Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Squarefree ``q`` and the terms ``mu(q)^2/phi(q)^2 * c_q(h)``."""
    q, mu, phi = _series_tables(Q)
    k = q // np.gcd(q, abs(h))
    return q, mu[k] / (phi[q].astype(np.float64) * phi[k])


def singular_series_truncated(r: int, h: int, Q: int = DEFAULT_SERIES_BOUND) -> SingularSeriesValue:
    """``sum_{q <= Q, (q, r) = 1} mu(q)^2/phi(q)^2 c_q(h)``."""
    _check(r, h, Q, "Q")
    q, terms = _series_terms(h, Q)
    value = math.fsum(terms[np.gcd(q, r) == 1])
    return SingularSeriesValue(r, h, value, "truncated", Q)


def singular_series_truncated_grid(rs, hs, Q: int = DEFAULT_SERIES_BOUND) -> np.ndarray:
    """Truncated series for every pair in ``rs x hs`` (rows follow ``hs``)."""
    rs = [int(r) for r in rs]
    hs = [int(h) for h in hs]
    for r in rs:
        _check(r, 1, Q, "Q")
    if 0 in hs:
        raise ArgumentError("the singular series diverges at h = 0")
    q, _, _ = _series_tables(Q)
    mask = np.stack([(np.gcd(q, r) == 1).astype(np.float64) for r in rs], axis=1)
    terms = np.stack([_series_terms(h, Q)[1] for h in hs])
    return terms @ mask
