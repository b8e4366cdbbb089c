from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ArgumentError


@dataclass(frozen=True, order=True)
class ResidueClass:
    """The progression ``r*n + b`` with ``1 <= b <= r`` and ``gcd(b, r) == 1``."""

    r: int
    b: int

    def __post_init__(self):
        if self.r < 1:
            raise ArgumentError(f"modulus must be >= 1, got {self.r}")
        if not 1 <= self.b <= self.r:
            raise ArgumentError(f"residue must lie in [1, {self.r}], got {self.b}")
        if math.gcd(self.b, self.r) != 1:
            raise ArgumentError(f"gcd({self.b}, {self.r}) != 1")

    @classmethod
    def normalized(cls, r: int, b: int) -> "ResidueClass":
        """Build from any representative of ``b`` mod ``r``."""
        b = b % r
        return cls(r, b if b else r)

    def term(self, n: int) -> int:
        return self.r * n + self.b


def coprime_residues(r: int) -> list[int]:
    """Residues ``1 <= b <= r`` coprime to ``r``."""
    return [b for b in range(1, r + 1) if math.gcd(b, r) == 1]
