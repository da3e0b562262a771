"""Closed real intervals used as enclosures."""

from __future__ import annotations

from dataclasses import dataclass
import math


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval bounds must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= x <= self.upper + tol

    def overlaps(self, other: "Interval", tol: float = 0.0) -> bool:
        return self.lower <= other.upper + tol and other.lower <= self.upper + tol

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lower, other.lower), min(self.upper, other.upper))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lower, other.lower), max(self.upper, other.upper))

    def scale(self, c: float) -> "Interval":
        """Multiply by a nonnegative constant."""
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        return Interval(c * self.lower, c * self.upper)

    def __mul__(self, other: "Interval") -> "Interval":
        # only used for nonnegative quantities such as indices
        if self.lower < 0 or other.lower < 0:
            raise ValueError("product is defined for nonnegative intervals")
        return Interval(self.lower * other.lower, self.upper * other.upper)

    def clamp(self, lo: float = 0.0, hi: float = math.inf) -> "Interval":
        return Interval(min(max(self.lower, lo), hi), min(max(self.upper, lo), hi))

    def __iter__(self):
        yield self.lower
        yield self.upper

    def __str__(self) -> str:
        return f"[{self.lower:.12g}, {self.upper:.12g}]"
