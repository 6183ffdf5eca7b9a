"""Minimal outward-rounded interval arithmetic.

Used to bound group coordinates when one truncation has to contain every
set that can touch another.  Only the operations the coordinate formulas
need are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @staticmethod
    def of(x: "Interval | float") -> "Interval":
        return x if isinstance(x, Interval) else Interval(float(x), float(x))

    def __add__(self, other: "Interval | float") -> "Interval":
        o = Interval.of(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: "Interval | float") -> "Interval":
        return self + (-Interval.of(other))

    def __rsub__(self, other: float) -> "Interval":
        return Interval.of(other) - self

    def __mul__(self, other: "Interval | float") -> "Interval":
        o = Interval.of(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(_down(min(p)), _up(max(p)))

    __rmul__ = __mul__

    def exp(self) -> "Interval":
        return Interval(_down(math.exp(self.lo)), _up(math.exp(self.hi)))

    @property
    def magnitude(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def iexp(x: "Interval | float"):
    return x.exp() if isinstance(x, Interval) else math.exp(x)
