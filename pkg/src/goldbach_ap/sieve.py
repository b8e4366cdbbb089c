"""Sieved von Mangoldt tables and the prime-counting error term E_d(x).

``E_d(x)`` is the largest deviation of ``psi(t; d, h)`` from ``t / phi(d)``
over real ``t <= x`` and reduced residues ``h``, plus one.  Between two
consecutive members of a residue class the sum is constant while the drift
``t / phi(d)`` grows linearly, so the supremum is reached either at a class
member, just before the next one (a left limit), or at ``t = x``.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from ._parallel import ordered_map
from .arith import euler_phi
from .errors import ArgumentError, RangeError, ResourceError

log = logging.getLogger(__name__)

DEFAULT_TABLE_BUDGET = 2 * 1024**3
# float64 lambda + bool is_prime + int32 spf
BYTES_PER_ENTRY = 13
SEGMENT = 1 << 22

CACHE_MAGIC = b"GAPL"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def limit_cap(budget_bytes: int = DEFAULT_TABLE_BUDGET) -> int:
    return budget_bytes // BYTES_PER_ENTRY


@dataclass(eq=False)
class LambdaTable:
    """Von Mangoldt values ``lam[n] = Lambda(n)`` for ``0 <= n <= limit``.

    Attributes
    ----------
    limit : int
        Largest tabulated argument.
    lam : numpy.ndarray
        float64 array of length ``limit + 1``; ``log p`` at prime powers.
    is_prime : numpy.ndarray
        Boolean primality flags.
    """

    limit: int
    lam: np.ndarray
    is_prime: np.ndarray
    _spf: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.lam.setflags(write=False)
        self.is_prime.setflags(write=False)
        if self._spf is not None:
            self._spf.setflags(write=False)

    @property
    def spf(self) -> np.ndarray:
        """Smallest prime factor of each ``n >= 2`` (0 for n < 2)."""
        if self._spf is None:
            spf = _spf_sieve(self.limit)
            spf.setflags(write=False)
            self._spf = spf
        return self._spf

    @cached_property
    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime)

    def check_range(self, n, what: str = "argument") -> None:
        if n > self.limit:
            raise RangeError(f"{what} {n} exceeds table limit {self.limit}")


def _small_primes(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def _spf_sieve(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int32)
    base = _small_primes(math.isqrt(limit))
    for lo in range(0, limit + 1, SEGMENT):
        hi = min(lo + SEGMENT, limit + 1)
        seg = spf[lo:hi]
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            sub = seg[start - lo :: p]
            sub[sub == 0] = p
        idx = np.flatnonzero(seg == 0) + lo
        idx = idx[idx >= 2]
        spf[idx] = idx
    return spf


def build_lambda_table(limit: int, budget_bytes: int = DEFAULT_TABLE_BUDGET) -> LambdaTable:
    """Sieve ``Lambda(n)`` and primality for ``n <= limit``."""
    limit = int(limit)
    if limit < 2:
        raise ArgumentError(f"limit must be >= 2, got {limit}")
    cap = limit_cap(budget_bytes)
    if limit > cap:
        raise ResourceError(
            f"limit {limit} exceeds the memory cap of {cap} entries "
            f"({budget_bytes} bytes at {BYTES_PER_ENTRY} bytes/entry)"
        )
    spf = _spf_sieve(limit)
    n = np.arange(limit + 1, dtype=np.int64)
    is_prime = (spf == n) & (n >= 2)
    primes = np.flatnonzero(is_prime)
    lam = np.zeros(limit + 1, dtype=np.float64)
    lam[primes] = np.log(primes)
    for p in primes[: np.searchsorted(primes, math.isqrt(limit), side="right")]:
        p = int(p)
        lp = lam[p]
        pk = p * p
        while pk <= limit:
            lam[pk] = lp
            pk *= p
    log.debug("sieved %d primes up to %d", primes.size, limit)
    return LambdaTable(limit, lam, is_prime, spf)


def _class_start(d: int, h: int) -> int:
    s = h % d
    return s if s else d


def psi(table: LambdaTable, t: float, d: int = 1, h: int = 0) -> float:
    """``sum_{1 <= n <= t, n = h (mod d)} Lambda(n)``, correctly rounded."""
    if d < 1:
        raise ArgumentError(f"modulus must be >= 1, got {d}")
    table.check_range(t, "t")
    top = math.floor(t)
    if top < 1:
        return 0.0
    return math.fsum(table.lam[_class_start(d, h) : top + 1 : d])


@dataclass(frozen=True)
class ErrorTermResult:
    """``E_d(x)`` with the location of the maximising deviation.

    ``argmax_t`` is a class member or ``x``; with ``from_left`` set, the
    supremum is the limit as t increases to ``argmax_t``.
    """

    d: int
    x: float
    value: float
    argmax_t: float
    argmax_h: int
    from_left: bool
    plus_one: bool = True

    @property
    def deviation(self) -> float:
        return self.value - 1.0 if self.plus_one else self.value


def deviation_at(table: LambdaTable, d: int, h: int, t: float, from_left: bool = False) -> float:
    """``|psi(t; d, h) - t/phi(d)|``, or its left limit at ``t``."""
    s = psi(table, math.ceil(t) - 1 if from_left else t, d, h)
    return abs(s - t / euler_phi(d))


def _class_extremum(lam: np.ndarray, start: int, d: int, top: int, x: float, phi: int):
    """Largest candidate deviation for one residue class.

    Returns ``(value, t, from_left)``.
    """
    members = np.arange(start, top + 1, d, dtype=np.int64)
    if members.size == 0:
        return x / phi, x, False
    sums = np.cumsum(lam[start : top + 1 : d], dtype=np.longdouble)
    drift = members.astype(np.longdouble) / phi
    right = np.abs(sums - drift)
    before = np.empty_like(sums)
    before[0] = 0
    before[1:] = sums[:-1]
    left = np.abs(before - drift)
    tail = abs(sums[-1] - np.longdouble(x) / phi)

    i_r = int(np.argmax(right))
    i_l = int(np.argmax(left))
    best = (right[i_r], float(members[i_r]), False)
    if left[i_l] > best[0]:
        best = (left[i_l], float(members[i_l]), True)
    if tail > best[0]:
        best = (tail, float(x), False)
    return best


def error_term(table: LambdaTable, d: int, x: float, strip_plus_one: bool = False) -> ErrorTermResult:
    """Evaluate ``E_d(x)`` in one pass over ``n <= x``.

    Class sums are accumulated in extended precision; the returned value is
    rounded to float64 once.  With ``strip_plus_one`` the trailing ``+ 1`` of
    the definition is dropped.
    """
    if d < 1:
        raise ArgumentError(f"modulus must be >= 1, got {d}")
    if x < 0:
        raise ArgumentError(f"x must be >= 0, got {x}")
    table.check_range(x, "x")
    phi = euler_phi(d)
    top = math.floor(x)
    best = (np.longdouble(-1), 0.0, 0, False)
    for h in range(d):
        if math.gcd(h, d) != 1:
            continue
        val, t, from_left = _class_extremum(table.lam, _class_start(d, h), d, top, x, phi)
        if val > best[0]:
            best = (val, t, h, from_left)
    val, t, h, from_left = best
    value = float(val) + (0.0 if strip_plus_one else 1.0)
    return ErrorTermResult(d, x, value, t, h, from_left, plus_one=not strip_plus_one)


def error_term_profile(table: LambdaTable, d: int, X: int, strip_plus_one: bool = False) -> np.ndarray:
    """``E_d(x)`` for every integer ``0 <= x <= X`` (entry 0 is the empty max).

    Builds each class sum as a dense step function and takes a running
    maximum, so it costs ``O(X phi(d))`` memory traffic rather than one pass
    per ``x``.
    """
    if d < 1:
        raise ArgumentError(f"modulus must be >= 1, got {d}")
    table.check_range(X, "X")
    phi = euler_phi(d)
    t = np.arange(X + 1, dtype=np.longdouble)
    drift = t / phi
    worst = np.zeros(X + 1, dtype=np.longdouble)
    for h in range(d):
        if math.gcd(h, d) != 1:
            continue
        dense = np.zeros(X + 1)
        start = _class_start(d, h)
        dense[start::d] = table.lam[start : X + 1 : d]
        sums = np.cumsum(dense, dtype=np.longdouble)
        cand = np.abs(sums - drift)
        cand[1:] = np.maximum(cand[1:], np.abs(sums[:-1] - drift[1:]))
        np.maximum(worst, cand, out=worst)
    worst = np.maximum.accumulate(worst).astype(np.float64)
    return worst if strip_plus_one else worst + 1.0


@dataclass(frozen=True)
class BVScan:
    """Rows ``(r, E_{qr}(rN))`` for ``r <= R`` and their mean."""

    R: int
    N: int
    q: int
    rows: tuple[tuple[int, float], ...]
    mean: float


def bv_scan(
    table: LambdaTable, R: int, N: int, q: int = 1, threads: int = 1, strip_plus_one: bool = False
) -> BVScan:
    """Error terms ``E_{qr}(rN)`` for every ``r <= R``, averaged over ``r``."""
    if R < 1 or N < 1 or q < 1:
        raise ArgumentError("R, N and q must all be >= 1")
    table.check_range(R * N, "largest evaluation point rN")
    values = ordered_map(
        lambda r: error_term(table, q * r, r * N, strip_plus_one).value, range(1, R + 1), threads
    )
    rows = tuple(zip(range(1, R + 1), values))
    return BVScan(R, N, q, rows, math.fsum(values) / R)


def fnv1a64(data) -> int:
    """64-bit FNV-1a hash of a bytes-like object."""
    from ._fnv import fnv1a64_bytes

    return fnv1a64_bytes(np.frombuffer(memoryview(data).cast("B"), dtype=np.uint8))


def save_table(table: LambdaTable, path) -> None:
    """Write the lambda array as a checksummed ``GAPL`` cache file."""
    raw = np.ascontiguousarray(table.lam, dtype="<f8").tobytes()
    header = _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.limit, fnv1a64(raw))
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(raw)
    tmp.replace(path)


class CacheError(ArgumentError):
    """A cache file is malformed or fails its checksum."""


def load_table(path, budget_bytes: int = DEFAULT_TABLE_BUDGET) -> LambdaTable:
    """Read a ``GAPL`` cache file, verifying its checksum."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise CacheError(f"{path}: truncated header")
        magic, version, limit, checksum = _HEADER.unpack(head)
        if magic != CACHE_MAGIC:
            raise CacheError(f"{path}: bad magic {magic!r}")
        if version != CACHE_VERSION:
            raise CacheError(f"{path}: unsupported version {version}")
        if limit > limit_cap(budget_bytes):
            raise ResourceError(f"{path}: cached limit {limit} exceeds the memory cap")
        raw = fh.read()
    if len(raw) != 8 * (limit + 1):
        raise CacheError(f"{path}: expected {8 * (limit + 1)} payload bytes, found {len(raw)}")
    if fnv1a64(raw) != checksum:
        raise CacheError(f"{path}: checksum mismatch")
    lam = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    n = np.arange(limit + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        # prime powers p^k, k >= 2, sit at least log 2 below log n
        is_prime = (lam > 0) & (np.log(n) - lam < 0.25)
    return LambdaTable(int(limit), lam, is_prime)
