"""Major/minor arc split of the circle-method integral, by exact quadrature.

``S_1(alpha) S_2(alpha) e(-alpha n)`` is a trigonometric polynomial whose
frequencies lie in ``[2 - n, 2N - n]``; averaging it over ``G >= 2N + 2``
equally spaced nodes returns its constant coefficient ``R(n)`` exactly.
Restricting the average to nodes inside / outside the major arcs gives the
two arc contributions, which therefore add up to ``R(n)``.

Arcs live on the circle R/Z: distance to ``a/q`` is measured mod 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .._parallel import ordered_map
from ..errors import ArgumentError
from ..expsum import progression_weights
from ..progression import ResidueClass
from ..sieve import LambdaTable
from .reps import main_term, rep_counts


@dataclass(frozen=True)
class ArcPartition:
    """Major arcs ``|alpha - a/q| <= log(N)^A / N`` for ``q <= log(N)^A``."""

    A: float
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ArgumentError(f"N must be >= 2, got {self.N}")
        if self.A < 0:
            raise ArgumentError(f"A must be >= 0, got {self.A}")

    @property
    def level(self) -> float:
        return math.log(self.N) ** self.A

    @property
    def max_q(self) -> int:
        return max(1, math.floor(self.level))

    @property
    def half_width(self) -> float:
        return self.level / self.N

    @property
    def everything_major(self) -> bool:
        return self.half_width >= 0.5

    @cached_property
    def arcs(self) -> tuple[tuple[int, int, float, float], ...]:
        """``(q, a, a/q, half_width)`` for each arc."""
        hw = self.half_width
        return tuple(
            (q, a, a / q, hw) for q in range(1, self.max_q + 1) for a in range(1, q + 1) if math.gcd(a, q) == 1
        )

    def contains(self, alpha) -> np.ndarray:
        """Membership of ``alpha`` (array) in the major arcs."""
        alpha = np.mod(np.asarray(alpha, dtype=np.float64), 1.0)
        if self.everything_major:
            return np.ones(alpha.shape, dtype=bool)
        hw = self.half_width
        inside = np.zeros(alpha.shape, dtype=bool)
        # a non-reduced nearest fraction is caught at its reduced denominator
        for q in range(1, self.max_q + 1):
            x = alpha * q
            inside |= np.abs(x - np.rint(x)) <= hw * q
        return inside

    def measure(self) -> float:
        """Length of the union of arcs on the circle."""
        if self.everything_major:
            return 1.0
        hw = self.half_width
        ivs = []
        for _, _, c, _ in self.arcs:
            lo, hi = c - hw, c + hw
            if hi > 1.0:
                ivs.append((0.0, hi - 1.0))
            ivs.append((max(lo, 0.0), min(hi, 1.0)))
        ivs.sort()
        total = 0.0
        cur_lo, cur_hi = ivs[0]
        for lo, hi in ivs[1:]:
            if lo > cur_hi:
                total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        total += cur_hi - cur_lo
        return min(total, 1.0)


@dataclass(frozen=True)
class ArcIntegral:
    n: int
    major: complex
    minor: complex
    R: float
    main: float

    @property
    def total_check(self) -> float:
        return abs(self.major + self.minor - self.R)

    @property
    def relative_gap(self) -> float:
        """``|major - main| / main`` (NaN when the main term vanishes)."""
        return abs(self.major - self.main) / self.main if self.main > 0 else math.nan


def min_grid(N: int) -> int:
    return 2 * N + 2


def _generating_values(table: LambdaTable, rc: ResidueClass, N: int, G: int) -> np.ndarray:
    """``S_{b,r}(N, j/G)`` for ``j = 0..G-1``."""
    w = progression_weights(table, rc, N)
    return np.fft.ifft(w, G) * G


def arc_integrals(
    table: LambdaTable,
    rc1: ResidueClass,
    rc2: ResidueClass,
    N: int,
    targets,
    partition: ArcPartition,
    grid: int | None = None,
    threads: int = 1,
) -> list[ArcIntegral]:
    """Major and minor arc contributions to ``R(n)`` for each ``n`` in ``targets``."""
    G = min_grid(N) if grid is None else int(grid)
    if G < min_grid(N):
        raise ArgumentError(
            f"grid of {G} nodes is too coarse: exact quadrature of a degree-2N polynomial needs >= {min_grid(N)}"
        )
    targets = [int(n) for n in targets]
    for n in targets:
        if not 1 <= n <= N:
            raise ArgumentError(f"target n={n} is not in [1, {N}]")
    s = _generating_values(table, rc1, N, G) * _generating_values(table, rc2, N, G)
    j = np.arange(G, dtype=np.int64)
    major_mask = partition.contains(j / G)
    reps = rep_counts(table, rc1, rc2, N)

    def one(n: int) -> ArcIntegral:
        integrand = s * np.exp(-2j * math.pi * ((n * j) % G) / G)
        major = complex(integrand[major_mask].sum() / G)
        minor = complex(integrand[~major_mask].sum() / G)
        return ArcIntegral(n, major, minor, float(reps.values[n]), main_term(rc1, rc2, n))

    return ordered_map(one, targets, threads)


def arc_integral(
    table: LambdaTable,
    rc1: ResidueClass,
    rc2: ResidueClass,
    N: int,
    n: int,
    partition: ArcPartition,
    grid: int | None = None,
) -> ArcIntegral:
    return arc_integrals(table, rc1, rc2, N, [n], partition, grid)[0]
