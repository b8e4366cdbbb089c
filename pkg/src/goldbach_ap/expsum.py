"""Exponential sums over primes in a progression.

Covers the generating function ``S_{b,r}(N, alpha) = sum_{1<=n<=N} Lambda(rn+b) e(alpha n)``,
the rational-point identity behind its major-arc approximation, Vaughan's
identity as an exact decomposition, and direct evaluation of Type I / II
bilinear sums for comparison with their bound envelopes.

Phases are always reduced mod 1 before exponentiation.  Rational frequencies
(``Fraction`` or ``RationalApprox``) are reduced in integer arithmetic, so
identity checks do not pick up float drift.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .arith import e_q, euler_phi, factorize, mod_pow, moebius
from .errors import ArgumentError
from .progression import ResidueClass
from .sieve import LambdaTable, error_term

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RationalApprox:
    """``alpha = a/q + beta`` with ``1 <= a <= q`` and ``gcd(a, q) = 1``."""

    a: int
    q: int
    beta: float = 0.0

    def __post_init__(self):
        if self.q < 1 or not 1 <= self.a <= self.q or math.gcd(self.a, self.q) != 1:
            raise ArgumentError(f"need 1 <= a <= q, gcd(a, q) = 1; got a={self.a}, q={self.q}")

    @property
    def alpha(self) -> float:
        x = self.a / self.q + self.beta
        return x - math.floor(x)


Frequency = Union[float, Fraction, RationalApprox]


def _phases(alpha: Frequency, n: np.ndarray, divisor: int = 1) -> np.ndarray:
    """``(alpha * n / divisor) mod 1`` for an integer array ``n``."""
    if isinstance(alpha, RationalApprox):
        den = alpha.q * divisor
        rat = (alpha.a * (n % den)) % den / den
        frac = np.mod(alpha.beta * n.astype(np.float64) / divisor, 1.0)
        return np.mod(rat + frac, 1.0)
    if isinstance(alpha, Fraction):
        den = alpha.denominator * divisor
        num = alpha.numerator % den
        return (num * (n % den)) % den / den
    return np.mod(float(alpha) * n.astype(np.float64) / divisor, 1.0)


def _cis(phase: np.ndarray) -> np.ndarray:
    return np.exp(1j * TWO_PI * phase)


def progression_weights(table: LambdaTable, rc: ResidueClass, N: int) -> np.ndarray:
    """``w[n] = Lambda(r n + b)`` for ``0 <= n <= N`` with ``w[0] = 0``."""
    if N < 0:
        raise ArgumentError(f"N must be >= 0, got {N}")
    table.check_range(rc.r * N + rc.b, "r*N + b")
    w = np.zeros(N + 1)
    w[1:] = table.lam[rc.r + rc.b : rc.r * N + rc.b + 1 : rc.r]
    return w


@dataclass(frozen=True)
class ExpSumValue:
    value: complex
    N: int
    residue_class: ResidueClass
    alpha: Frequency


def exp_sum(table: LambdaTable, rc: ResidueClass, N: int, alpha: Frequency) -> ExpSumValue:
    """Evaluate ``S_{b,r}(N, alpha)`` term by term."""
    w = progression_weights(table, rc, N)[1:]
    n = np.arange(1, N + 1, dtype=np.int64)
    value = complex(np.sum(w * _cis(_phases(alpha, n))))
    return ExpSumValue(value, N, rc, alpha)


def rational_character_sum(r: int, b: int, q: int, a: int) -> tuple[complex, complex]:
    """Both sides of the rational sum identity

    ``sum_{1<=h<=rq, h=b (r), (h,q)=1} e_{rq}(a h) = 1_{(q,r)=1} mu(q) e_{rq}(a b q^{phi(r)})``.

    Returns ``(lhs, rhs)``; ``lhs`` by enumeration, ``rhs`` in closed form.
    """
    if r < 1 or q < 1:
        raise ArgumentError("r and q must be >= 1")
    if math.gcd(a, q) != 1 or math.gcd(b, r) != 1:
        raise ArgumentError(f"need gcd(a, q) = gcd(b, r) = 1; got a={a}, q={q}, b={b}, r={r}")
    m = r * q
    b0 = b % r or r
    lhs = 0j
    for h in range(b0, m + 1, r):
        if math.gcd(h, q) == 1:
            lhs += e_q(a * h, m)
    if math.gcd(q, r) != 1:
        return lhs, 0j
    rhs = moebius(q) * e_q(a * b * mod_pow(q, euler_phi(r), m), m)
    return lhs, rhs


def geometric_sum(beta: float, N: int) -> complex:
    """``sum_{n=1}^{N} e(beta n)`` in closed form; equals ``N`` at integer ``beta``."""
    beta -= round(beta)
    s = math.sin(math.pi * beta)
    if s == 0.0:
        return complex(N)
    return cmath.exp(1j * math.pi * beta * (N + 1)) * (math.sin(math.pi * beta * N) / s)


@dataclass(frozen=True)
class ApproxResidual:
    main: complex
    actual: complex
    residual: float
    envelope: float

    @property
    def ratio(self) -> float:
        return self.residual / self.envelope if self.envelope else math.inf


def major_arc_main(rc: ResidueClass, N: int, ra: RationalApprox) -> complex:
    """Predicted value of ``S_{b,r}(N, a/q + beta)`` near ``a/q``."""
    r, b, q, a = rc.r, rc.b, ra.q, ra.a
    if math.gcd(q, r) != 1:
        return 0j
    m = r * q
    shift = a * b * (mod_pow(q, euler_phi(r), m) - 1)
    coeff = moebius(q) * e_q(shift, m) * r / euler_phi(m)
    return coeff * geometric_sum(ra.beta, N)


def approx_residual(
    table: LambdaTable, rc: ResidueClass, N: int, ra: RationalApprox, strip_plus_one: bool = False
) -> ApproxResidual:
    """Compare ``S_{b,r}(N, alpha)`` with its major-arc prediction.

    The envelope is ``q (1 + |beta| N) E_{rq}(rN + b)``.
    """
    actual = exp_sum(table, rc, N, ra).value
    main = major_arc_main(rc, N, ra)
    err = error_term(table, rc.r * ra.q, rc.r * N + rc.b, strip_plus_one).value
    envelope = ra.q * (1 + abs(ra.beta) * N) * err
    return ApproxResidual(main, actual, abs(actual - main), envelope)


def major_arc_samples(N: int, A: float, count: int, rng: np.random.Generator) -> list[RationalApprox]:
    """Random points ``a/q + beta`` of the major arcs at level ``A``."""
    L = math.log(N) ** A
    Q = max(1, math.floor(L))
    width = min(L / N, 0.5)
    out = []
    while len(out) < count:
        q = int(rng.integers(1, Q + 1))
        a = int(rng.integers(1, q + 1))
        if math.gcd(a, q) != 1:
            continue
        out.append(RationalApprox(a, q, float(rng.uniform(-width, width))))
    return out


def fit_constant(
    table: LambdaTable, rc: ResidueClass, N: int, A: float = 1.0, samples: int = 32, seed: int = 0
) -> float:
    """Largest ``residual / envelope`` over sampled major-arc points."""
    rng = np.random.default_rng(seed)
    return max(approx_residual(table, rc, N, ra).ratio for ra in major_arc_samples(N, A, samples, rng))


def _mu_of_divisor(d: int, exps: dict[int, int]) -> int:
    k = 0
    for p in exps:
        if d % p == 0:
            if d % (p * p) == 0:
                return 0
            k += 1
    return -1 if k % 2 else 1


def vaughan_check(table: LambdaTable, n: int, y: float) -> tuple[float, float]:
    """Both sides of Vaughan's identity at ``n`` with cut-off ``y``.

    ``rhs = sum_{b|n, b<=y} mu(b) log(n/b) - sum_{bc|n, b,c<=y} mu(b) Lambda(c)
    + sum_{bc|n, b,c>y} mu(b) Lambda(c)``.
    """
    if y < 1:
        raise ArgumentError(f"y must be >= 1, got {y}")
    if n <= y:
        raise ArgumentError(f"need n > y, got n={n}, y={y}")
    table.check_range(n, "n")
    f = factorize(n, table.spf)
    exps = dict(f.factors)
    divs = f.divisors()
    lam = table.lam
    terms = []
    for b in divs:
        mu = _mu_of_divisor(b, exps)
        if mu == 0:
            continue
        if b <= y:
            terms.append(mu * math.log(n / b))
        for c in divs:
            if c == 1 or (n // b) % c:
                continue
            if b <= y and c <= y:
                terms.append(-mu * lam[c])
            elif b > y and c > y:
                terms.append(mu * lam[c])
    return float(lam[n]), math.fsum(terms)


@dataclass(frozen=True)
class Coefficients:
    """Coefficient choice for bilinear sums.

    ``a`` is ``"unit"`` or ``"moebius"``; ``b`` is ``"unit"``, ``"log"`` or
    ``"lambda-tail"`` (``sum_{k | n, k > y} Lambda(k)``, needs ``y``).
    """

    a: str = "unit"
    b: str = "unit"
    y: Optional[float] = None

    def __post_init__(self):
        if self.a not in ("unit", "moebius"):
            raise ArgumentError(f"unknown m-coefficient {self.a!r}")
        if self.b not in ("unit", "log", "lambda-tail"):
            raise ArgumentError(f"unknown n-coefficient {self.b!r}")
        if self.b == "lambda-tail" and self.y is None:
            raise ArgumentError("lambda-tail coefficients need a cut-off y")


def lambda_tail(table: LambdaTable, n: int, y: float) -> float:
    """``sum_{k | n, k > y} Lambda(k)`` by divisor enumeration."""
    return math.fsum(table.lam[k] for k in factorize(n, table.spf).divisors() if k > y)


def _b_coeffs(table: LambdaTable, ns: np.ndarray, coeffs: Coefficients) -> np.ndarray:
    if coeffs.b == "unit":
        return np.ones(ns.size)
    if coeffs.b == "log":
        return np.log(ns.astype(np.float64))
    return np.array([lambda_tail(table, int(n), coeffs.y) for n in ns])


def bilinear_sum(
    table: LambdaTable,
    rc: ResidueClass,
    M: int,
    N: int,
    X: int,
    coeffs: Coefficients = Coefficients(),
    alpha: Frequency = 0.0,
    scaled_by_r: bool = True,
) -> complex:
    """``sum_{mn<=X, m~M, n~N, mn=b (r)} a_m b_n e(alpha m n / r)`` by a double loop.

    ``m ~ M`` means ``M <= m < 2M``; the sum is empty when ``M * N > X``.
    With ``scaled_by_r=False`` the phase is ``e(alpha m n)`` instead.
    """
    if M < 1 or N < 1:
        raise ArgumentError("M and N must be >= 1")
    table.check_range(X, "X")
    if M * N > X:
        # the hyperbola region misses the dyadic box entirely
        return 0j
    r, b = rc.r, rc.b
    divisor = r if scaled_by_r else 1
    n_all = np.arange(N, 2 * N, dtype=np.int64)
    b_all = _b_coeffs(table, n_all, coeffs)
    terms = []
    for m in range(M, min(2 * M, X // N + 1)):
        a_m = moebius(m) if coeffs.a == "moebius" else 1
        if a_m == 0:
            continue
        k = np.searchsorted(n_all, X // m, side="right")
        mn = m * n_all[:k]
        sel = (mn - b) % r == 0
        if not sel.any():
            continue
        ph = _phases(alpha, mn[sel], divisor)
        terms.append(a_m * np.sum(b_all[:k][sel] * _cis(ph)))
    return complex(sum(terms)) if terms else 0j


def convergents(alpha: Union[float, Fraction], max_q: Optional[int] = None) -> list[tuple[int, int]]:
    """Continued-fraction convergents ``(a, q)`` of ``alpha`` with ``q <= max_q``."""
    x = Fraction(alpha)
    out = []
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        ai = math.floor(x)
        h0, h1 = h1, ai * h1 + h0
        k0, k1 = k1, ai * k1 + k0
        if max_q is not None and k1 > max_q:
            break
        out.append((h1, k1))
        frac = x - ai
        if frac == 0:
            break
        x = 1 / frac
    return out


def rational_approx(alpha: float, max_q: int) -> RationalApprox:
    """Last convergent of ``alpha`` with denominator ``<= max_q``, as ``a/q + beta``.

    Convergents satisfy ``|alpha - a/q| <= q**-2``.  The numerator is
    shifted into ``[1, q]``; for ``q = 1`` this means ``a = 1``.
    """
    a, q = [c for c in convergents(alpha, max_q) if c[1] >= 1][-1]
    a_red = a % q or q
    return RationalApprox(a_red, q, alpha - a / q)


def xy_envelope(X: float, Y: float, q: int) -> float:
    """``(XY/q + X + q) log(2qX)``."""
    return (X * Y / q + X + q) * math.log(2 * q * X)


def type_one_envelope(M: int, N: int, r: int, q: int) -> float:
    """``(MN/(rq) + M + q) log(2qM)``."""
    return (M * N / (r * q) + M + q) * math.log(2 * q * M)


def minor_mean_square(table: LambdaTable, r: int, X: int, alpha: Frequency) -> float:
    """``sum_{b mod r, (b,r)=1} |sum_{n<=X, n=b (r)} Lambda(n) e(alpha n / r)|^2``."""
    if r < 1:
        raise ArgumentError(f"r must be >= 1, got {r}")
    table.check_range(X, "X")
    total = []
    for b in range(1, r + 1):
        if math.gcd(b, r) != 1:
            continue
        n = np.arange(b, X + 1, r, dtype=np.int64)
        s = np.sum(table.lam[b : X + 1 : r] * _cis(_phases(alpha, n, r)))
        total.append(abs(s) ** 2)
    return math.fsum(total)
