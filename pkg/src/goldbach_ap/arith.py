"""Exact elementary arithmetic on machine-size integers.

Everything here works on Python ints, so nothing overflows; the explicit
bound checks keep inputs inside the unsigned 64-bit range the rest of the
package assumes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ArgumentError

U64_MAX = 2**64 - 1
I63_MAX = 2**63 - 1


@dataclass(frozen=True)
class Factorization:
    """Prime factorization ``value = prod(p**k for p, k in factors)``."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, k in self.factors:
            if p <= last or k < 1:
                raise ArgumentError(f"malformed factor list {self.factors!r}")
            prod *= p**k
            last = p
        if prod != self.value:
            raise ArgumentError(f"factors multiply to {prod}, not {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def divisors(self) -> list[int]:
        divs = [1]
        for p, k in self.factors:
            divs = [d * p**e for d in divs for e in range(k + 1)]
        return sorted(divs)


def _check_positive(n: int, name: str = "n") -> None:
    if n < 1:
        raise ArgumentError(f"{name} must be >= 1, got {n}")
    if n > U64_MAX:
        raise ArgumentError(f"{name}={n} exceeds the 64-bit range")


def factorize(n: int, spf_hint: Optional[Sequence[int]] = None) -> Factorization:
    """Factor ``n`` into primes.

    Uses the smallest-prime-factor table ``spf_hint`` while the cofactor is
    inside it, trial division otherwise.
    """
    n = int(n)
    _check_positive(n)
    if n > I63_MAX:
        raise ArgumentError(f"factorize supports n <= 2**63 - 1, got {n}")
    factors: list[tuple[int, int]] = []
    m = n
    if spf_hint is not None:
        size = len(spf_hint)
        while 1 < m < size:
            p = int(spf_hint[m])
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            factors.append((p, k))
    if m > 1:
        factors.extend(_trial_division(m, start=factors[-1][0] + 1 if factors else 2))
    return Factorization(n, tuple(factors))


def _trial_division(m: int, start: int = 2) -> list[tuple[int, int]]:
    out = []
    p = max(start, 2)
    if p == 2:
        k = 0
        while m % 2 == 0:
            m //= 2
            k += 1
        if k:
            out.append((2, k))
        p = 3
    elif p % 2 == 0:
        p += 1
    while p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            out.append((p, k))
        p += 2
    if m > 1:
        out.append((m, 1))
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n).factors:
        result = result // p * (p - 1)
    return result


def moebius(n: int) -> int:
    f = factorize(n)
    if any(k > 1 for _, k in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def divisor_tau(n: int) -> int:
    out = 1
    for _, k in factorize(n).factors:
        out *= k + 1
    return out


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """``base**exp mod modulus`` by square-and-multiply.

    Python ints give the 128-bit intermediates for free; the result always
    lies in ``[0, modulus)``, so ``mod_pow(q, 0, 1) == 0``.
    """
    if modulus < 1:
        raise ArgumentError(f"modulus must be >= 1, got {modulus}")
    if exp < 0:
        raise ArgumentError(f"exponent must be >= 0, got {exp}")
    if modulus > U64_MAX:
        raise ArgumentError(f"modulus {modulus} exceeds the 64-bit range")
    result = 1 % modulus
    b = base % modulus
    e = exp
    while e:
        if e & 1:
            result = result * b % modulus
        b = b * b % modulus
        e >>= 1
    return result


def mod_inverse(a: int, modulus: int) -> int:
    if math.gcd(a, modulus) != 1:
        raise ArgumentError(f"{a} is not invertible modulo {modulus}")
    return pow(a, -1, modulus)


def ramanujan_sum(q: int, a: int) -> int:
    """Ramanujan sum ``c_q(a)`` via the closed form mu(q/g) phi(q) / phi(q/g), g = (a, q)."""
    _check_positive(q, "q")
    g = math.gcd(a, q)
    k = q // g
    return moebius(k) * euler_phi(q) // euler_phi(k)


def ramanujan_sum_direct(q: int, a: int) -> complex:
    """Defining sum of ``c_q(a)`` over reduced residues, in floating point."""
    _check_positive(q, "q")
    total = 0j
    for t in range(1, q + 1):
        if math.gcd(t, q) == 1:
            total += cmath.exp(2j * math.pi * ((a * t) % q) / q)
    return total


def e(x) -> complex:
    """``exp(2 pi i x)``; rational arguments are reduced mod 1 exactly first."""
    if isinstance(x, Fraction):
        x = x - math.floor(x)
        return cmath.exp(2j * math.pi * float(x))
    x = float(x)
    return cmath.exp(2j * math.pi * (x - math.floor(x)))


def e_q(n: int, q: int) -> complex:
    """``e(n / q)`` with ``n`` reduced mod ``q`` in integer arithmetic."""
    return cmath.exp(2j * math.pi * ((n % q) / q))
