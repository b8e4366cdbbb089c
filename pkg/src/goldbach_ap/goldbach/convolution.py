"""Certified linear convolution of non-negative weight vectors.

Three engines:

* ``direct`` - O(N^2) schoolbook product (reference path).
* ``fft`` - real float64 FFT with an a-priori rounding certificate.
* ``ntt`` - exact number-theoretic transforms modulo several primes below
  2**31 on fixed-point scaled weights, recombined by Garner's algorithm.

The FFT certificate is Percival's bound for a radix-2 transform of length
``L = 2**k``::

    |err|_inf <= |x|_2 |y|_2 ((1+eps)^{3k} (1+eps*sqrt5)^{3k+1} (1+mu)^{3k} - 1)

with unit roundoff ``eps`` and twiddle error ``mu``.  The NTT route is exact
in integers, so its only error is the fixed-point quantisation of the inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..arith import factorize
from ..errors import AccuracyError, ArgumentError

DEFAULT_TOL = 1e-6
DIRECT_LIMIT = 10**4
EPS = 2.0**-53
TWIDDLE_ERR = EPS

# p = c * 2^k + 1 < 2^31, all with k >= 23
NTT_PRIMES = (2013265921, 469762049, 1811939329, 2113929217, 754974721, 167772161, 998244353)
MAX_NTT_LOG2 = 23


@dataclass(frozen=True)
class Convolution:
    values: np.ndarray
    method: str
    error_bound: float


def _check(x: np.ndarray, y: np.ndarray) -> None:
    if x.ndim != 1 or y.ndim != 1:
        raise ArgumentError("convolution inputs must be 1-D")
    if (x < 0).any() or (y < 0).any():
        raise ArgumentError("convolution inputs must be non-negative")


def direct_convolution(x, y, size: int) -> np.ndarray:
    """First ``size`` coefficients of the product, by direct summation."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if max(x.size, y.size) > DIRECT_LIMIT + 1:
        raise ArgumentError(f"direct path is limited to length {DIRECT_LIMIT + 1}")
    out = np.zeros(size)
    full = np.convolve(x, y)[:size]
    out[: full.size] = full
    return out


def fft_length(size: int) -> int:
    return 1 << max(1, (2 * size - 1).bit_length())


def fft_error_bound(x, y, length: int) -> float:
    k = int(math.log2(length))
    log_growth = (
        3 * k * math.log1p(EPS) + (3 * k + 1) * math.log1p(EPS * math.sqrt(5)) + 3 * k * math.log1p(TWIDDLE_ERR)
    )
    return float(np.linalg.norm(x) * np.linalg.norm(y)) * math.expm1(log_growth)


def fft_convolution(x, y, size: int) -> tuple[np.ndarray, float]:
    """FFT product truncated to ``size`` coefficients, with its error bound."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    L = fft_length(max(x.size, y.size))
    prod = np.fft.rfft(x, L) * np.fft.rfft(y, L)
    out = np.fft.irfft(prod, L)[:size]
    return out, fft_error_bound(x, y, L)


@lru_cache(maxsize=None)
def _primitive_root(p: int) -> int:
    fs = factorize(p - 1).primes
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in fs):
            return g
    raise ArgumentError(f"no primitive root mod {p}")


def _powers(w: int, m: int, p: int) -> np.ndarray:
    out = np.ones(m, dtype=np.uint64)
    k = 1
    while k < m:
        step = np.uint64(pow(w, k, p))
        n = min(k, m - k)
        out[k : k + n] = out[:n] * step % np.uint64(p)
        k *= 2
    return out


@lru_cache(maxsize=64)
def _twiddles(p: int, L: int, inverse: bool) -> dict[int, np.ndarray]:
    g = _primitive_root(p)
    out = {}
    m = 1
    while m < L:
        w = pow(g, (p - 1) // (2 * m), p)
        if inverse:
            w = pow(w, -1, p)
        tw = _powers(w, m, p)
        tw.setflags(write=False)
        out[m] = tw
        m *= 2
    return out


def _ntt_forward(a: np.ndarray, p: int) -> np.ndarray:
    """Decimation in frequency; natural order in, bit-reversed order out."""
    L = a.size
    P = np.uint64(p)
    tw = _twiddles(p, L, False)
    m = L // 2
    while m >= 1:
        v = a.reshape(-1, 2 * m)
        u = v[:, :m].copy()
        w = v[:, m:]
        v[:, :m] = (u + w) % P
        v[:, m:] = (u + P - w) % P * tw[m] % P
        m //= 2
    return a


def _ntt_inverse(a: np.ndarray, p: int) -> np.ndarray:
    """Decimation in time; bit-reversed order in, natural order out."""
    L = a.size
    P = np.uint64(p)
    tw = _twiddles(p, L, True)
    m = 1
    while m < L:
        v = a.reshape(-1, 2 * m)
        u = v[:, :m].copy()
        w = v[:, m:] * tw[m] % P
        v[:, :m] = (u + w) % P
        v[:, m:] = (u + P - w) % P
        m *= 2
    return a * np.uint64(pow(L, -1, p)) % P


def _garner(residues: list[np.ndarray], primes: tuple[int, ...]) -> np.ndarray:
    """Recombine residues into float values (extended precision)."""
    digits = [residues[0].copy()]
    for i in range(1, len(primes)):
        p = primes[i]
        P = np.uint64(p)
        t = residues[i].copy()
        prefix = 1
        for j, d in enumerate(digits):
            # t <- (t - d_j * prod_{l<j} p_l) mod p
            t = (t + P - d % P * np.uint64(prefix % p) % P) % P
            prefix *= primes[j]
        digits.append(t * np.uint64(pow(prefix, -1, p)) % P)
    value = np.zeros(residues[0].size, dtype=np.longdouble)
    scale = np.longdouble(1)
    for d, p in zip(digits, primes):
        value += d.astype(np.longdouble) * scale
        scale *= p
    return value


def ntt_plan(x, y, size: int, tol: float = DEFAULT_TOL):
    """Choose the fixed-point scale and prime count for the modular route."""
    n = min(x.size, y.size, size)
    peak = max(float(np.max(x, initial=0.0)), float(np.max(y, initial=0.0)), 1.0)
    quant_tol = tol / 10
    # each coefficient gathers <= n products, each off by <= 2^-s * peak + 2^-(2s+2)
    bits = max(32, math.ceil(math.log2(max(n, 1) * peak * 2 / quant_tol)))
    bound = max(n, 1) * (peak * 2.0**-bits + 2.0 ** (-2 * bits - 2))
    coeff_max = max(n, 1) * (peak * 2.0**bits + 1) ** 2
    primes = []
    prod = 1
    for p in NTT_PRIMES:
        primes.append(p)
        prod *= p
        if prod > 2 * coeff_max:
            break
    else:
        raise AccuracyError("not enough NTT primes for the requested precision")
    return bits, tuple(primes), bound


def ntt_convolution(x, y, size: int, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Convolution through exact modular transforms on scaled weights."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    L = fft_length(max(x.size, y.size))
    if L.bit_length() - 1 > MAX_NTT_LOG2:
        raise AccuracyError(f"transform length {L} exceeds the NTT primes' 2-adic order")
    bits, primes, bound = ntt_plan(x, y, size, tol)
    xi = [int(v) for v in np.rint(np.ldexp(x, bits))]
    yi = [int(v) for v in np.rint(np.ldexp(y, bits))]
    residues = []
    for p in primes:
        a = np.zeros(L, dtype=np.uint64)
        b = np.zeros(L, dtype=np.uint64)
        a[: x.size] = [v % p for v in xi]
        b[: y.size] = [v % p for v in yi]
        fa = _ntt_forward(a, p)
        fb = _ntt_forward(b, p)
        residues.append(_ntt_inverse(fa * fb % np.uint64(p), p)[:size])
    values = _garner(residues, primes)
    return np.ldexp(values, -2 * bits).astype(np.float64), bound


def convolve(x, y, size: int, method: str = "auto", tol: float = DEFAULT_TOL) -> Convolution:
    """First ``size`` coefficients of ``x * y`` with a certified error bound.

    ``auto`` takes the FFT when its certificate is within ``tol`` and the
    modular route otherwise.  Raises ``AccuracyError`` when the chosen route
    cannot certify ``tol``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check(x, y)
    if method == "direct":
        return Convolution(direct_convolution(x, y, size), "direct", 0.0)
    if method not in ("auto", "fft", "ntt"):
        raise ArgumentError(f"unknown convolution method {method!r}")
    if method in ("auto", "fft"):
        L = fft_length(max(x.size, y.size))
        bound = fft_error_bound(x, y, L)
        if bound <= tol:
            values, bound = fft_convolution(x, y, size)
            return Convolution(values, "fft", bound)
        if method == "fft":
            raise AccuracyError(f"FFT rounding certificate {bound:.3g} exceeds tolerance {tol:.3g}")
    values, bound = ntt_convolution(x, y, size, tol)
    if bound > tol:
        raise AccuracyError(f"modular route certificate {bound:.3g} exceeds tolerance {tol:.3g}")
    values = np.pad(values, (0, max(0, size - values.size)))
    return Convolution(values, "ntt", bound)
