"""Measure oracles: certified rational bounds on |E intersect I|.

Sets produced by infinite constructions cannot be held as finite interval
unions, so they are represented by immutable oracle descriptions that
answer window queries with two-sided rational bounds at a requested
truncation depth.  Depth is a per-query parameter, never oracle state, so
queries are pure and reproducible.

Three variants cover everything the constructions need: ``FiniteOracle``
wraps an explicit interval set (bounds are tight), ``UnionOracle`` combines
finitely many oracles, and the middle-interval construction oracle lives in
:mod:`lipsetlab.cantor` to keep the dependency one-way.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded
from .intervals import Interval, IntervalSet, ZERO

DEFAULT_REALIZE_BUDGET = 1 << 16

# Depth at which union members are realized to probe pairwise disjointness;
# outer stages only shrink, so disjoint supersets certify disjoint sets.
_DISJOINT_PROBE_DEPTH = 8


@dataclass(frozen=True)
class Enclosure:
    """A two-sided rational enclosure lower <= value <= upper."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"empty enclosure [{self.lower}, {self.upper}]")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


@dataclass(frozen=True)
class MeasureBounds(Enclosure):
    """Certified enclosure 0 <= lower <= |E ∩ window| <= upper."""

    def __post_init__(self) -> None:
        if self.lower < 0 or self.lower > self.upper:
            raise ValueError(f"invalid bounds [{self.lower}, {self.upper}]")

    def is_exact(self) -> bool:
        return self.lower == self.upper

    def scale(self, factor: Fraction) -> "MeasureBounds":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return MeasureBounds(self.lower * factor, self.upper * factor)

    @staticmethod
    def exact(value: Fraction) -> "MeasureBounds":
        return MeasureBounds(value, value)


class MeasureOracle:
    """Query interface; subclasses implement bounds() and realize()."""

    def bounds(self, window: Interval, depth: int) -> MeasureBounds:
        raise NotImplementedError

    def realize(self, depth: int, max_parts: int = DEFAULT_REALIZE_BUDGET) -> IntervalSet:
        """Outer approximation at `depth`: a superset whose measure excess
        is bounded by the same tail bound bounds() reports."""
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteOracle(MeasureOracle):
    """An explicitly known finite interval set; bounds are always tight."""

    parts: IntervalSet

    def bounds(self, window: Interval, depth: int) -> MeasureBounds:
        return MeasureBounds.exact(self.parts.measure_in(window))

    def realize(self, depth: int, max_parts: int = DEFAULT_REALIZE_BUDGET) -> IntervalSet:
        return self.parts


@dataclass(frozen=True)
class UnionOracle(MeasureOracle):
    """Finite union of member oracles."""

    members: tuple[MeasureOracle, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("union oracle needs at least one member")

    def bounds(self, window: Interval, depth: int) -> MeasureBounds:
        member_bounds = [m.bounds(window, depth) for m in self.members]
        upper = min(sum((b.upper for b in member_bounds), ZERO), window.length)
        if self._members_disjoint(depth):
            lower = sum((b.lower for b in member_bounds), ZERO)
        else:
            lower = max(b.lower for b in member_bounds)
        lower = min(lower, upper)
        return MeasureBounds(lower, upper)

    def realize(self, depth: int, max_parts: int = DEFAULT_REALIZE_BUDGET) -> IntervalSet:
        out = IntervalSet.empty()
        for m in self.members:
            out = out.union(m.realize(depth, max_parts))
            if len(out) > max_parts:
                raise BudgetExceeded(
                    f"union realization exceeds {max_parts} parts at depth {depth}"
                )
        return out

    def _members_disjoint(self, depth: int) -> bool:
        probe = min(depth, _DISJOINT_PROBE_DEPTH)
        realized = [m.realize(probe) for m in self.members]
        merged: list = []
        for r in realized:
            merged.extend(r.parts)
        merged.sort(key=lambda p: (p.lo, p.hi))
        for a, b in zip(merged, merged[1:]):
            if b.lo < a.hi:
                return False
        return True
