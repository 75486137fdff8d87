"""Exact rational depth values ``count / n``."""

import functools
from dataclasses import dataclass
from fractions import Fraction


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class DepthValue:
    """Empirical depth ``count / n``.

    The unreduced numerator and denominator are kept so that printed values
    keep the sample size (``2/4`` rather than ``1/2``).  Comparisons and hashing
    use the reduced fraction, so ``DepthValue(2, 4) == DepthValue(1, 2) == 0.5``.
    """

    count: int
    n: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.count <= self.n:
            raise ValueError(f"invalid depth {self.count}/{self.n}")

    @property
    def fraction(self):
        return Fraction(self.count, self.n)

    def __float__(self):
        return self.count / self.n

    def __str__(self):
        return f"{self.count}/{self.n}"

    def __repr__(self):
        return f"DepthValue({self.count}/{self.n})"

    def _other(self, other):
        if isinstance(other, DepthValue):
            return other.fraction
        if isinstance(other, (int, Fraction)):
            return Fraction(other)
        if isinstance(other, float):
            return Fraction(other)
        return NotImplemented

    def __eq__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.fraction == o

    def __lt__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.fraction < o

    def __hash__(self):
        return hash(self.fraction)

    @classmethod
    def parse(cls, text):
        num, _, den = str(text).partition("/")
        return cls(int(num), int(den))
