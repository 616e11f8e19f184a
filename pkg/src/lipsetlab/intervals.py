"""Exact interval-set algebra on the rational line.

Endpoints are ``fractions.Fraction``; no floating point enters any set or
measure computation, so additivity and inclusion-exclusion hold as exact
rational equalities rather than approximations.

An :class:`IntervalSet` is the canonical form of a finite union of bounded
intervals: parts sorted by position, consecutive parts separated by a gap
of positive length (touching or overlapping parts are merged), and
zero-length parts dropped.  Single points carry no measure, so this one
canonical representation serves open, closed and half-open unions alike;
callers that care about endpoint topology track that separately.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)


def as_rational(value: RationalLike) -> Fraction:
    """Coerce an int, an exact string like ``"3/8"``, or a Fraction.

    Floats are rejected: one binary-rounded endpoint would silently break
    every exactness guarantee downstream.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}: {value!r}")


@dataclass(frozen=True)
class Interval:
    """A bounded interval [lo, hi] with rational endpoints, lo <= hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval with lo > hi: ({self.lo}, {self.hi})")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: RationalLike) -> bool:
        x = as_rational(x)
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def clip(self, other: "Interval") -> "Interval | None":
        """The intersection with `other`, or None when it has length zero."""
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo < hi:
            return Interval(lo, hi)
        return None

    def overlap_length(self, other: "Interval") -> Fraction:
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return hi - lo if hi > lo else ZERO

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


IntervalLike = Union[Interval, Sequence[RationalLike]]


def _coerce_interval(item: IntervalLike) -> Interval:
    if isinstance(item, Interval):
        return item
    lo, hi = item
    return Interval(as_rational(lo), as_rational(hi))


class IntervalSet:
    """Canonical finite union of intervals with exact Lebesgue measure."""

    __slots__ = ("parts", "_los")

    parts: tuple[Interval, ...]

    def __init__(self, parts: Iterable[IntervalLike] = ()):
        canon = _normalize_parts(_coerce_interval(p) for p in parts)
        object.__setattr__(self, "parts", canon)
        object.__setattr__(self, "_los", tuple(p.lo for p in canon))

    @classmethod
    def _trusted(cls, parts: Sequence[Interval]) -> "IntervalSet":
        """Wrap parts already known canonical (sorted, gapped, nondegenerate)."""
        obj = cls.__new__(cls)
        object.__setattr__(obj, "parts", tuple(parts))
        object.__setattr__(obj, "_los", tuple(p.lo for p in obj.parts))
        return obj

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls._trusted(())

    @classmethod
    def of(cls, *pairs: IntervalLike) -> "IntervalSet":
        return cls(pairs)

    # -- set algebra ----------------------------------------------------

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet._trusted(_normalize_parts(iter(self.parts + other.parts)))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out: list[Interval] = []
        a, b = self.parts, other.parts
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i].lo, b[j].lo)
            hi = min(a[i].hi, b[j].hi)
            if lo < hi:
                out.append(Interval(lo, hi))
            if a[i].hi < b[j].hi:
                i += 1
            else:
                j += 1
        return IntervalSet._trusted(out)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        out: list[Interval] = []
        b = other.parts
        j = 0
        for p in self.parts:
            lo = p.lo
            while j < len(b) and b[j].hi <= lo:
                j += 1
            k = j
            while k < len(b) and b[k].lo < p.hi:
                if b[k].lo > lo:
                    out.append(Interval(lo, b[k].lo))
                lo = max(lo, b[k].hi)
                if lo >= p.hi:
                    break
                k += 1
            if lo < p.hi:
                out.append(Interval(lo, p.hi))
        return IntervalSet._trusted(out)

    def complement_in(self, window: Interval) -> "IntervalSet":
        """Closure of window minus this set (the window's gap structure)."""
        return IntervalSet.of((window.lo, window.hi)).difference(self)

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    # -- measure ----------------------------------------------------------

    def measure(self) -> Fraction:
        total = ZERO
        for p in self.parts:
            total += p.hi - p.lo
        return total

    def measure_in(self, window: Interval) -> Fraction:
        """Exact measure of (self intersect window)."""
        total = ZERO
        i = max(0, bisect_right(self._los, window.lo) - 1)
        for p in self.parts[i:]:
            if p.hi <= window.lo:
                continue
            if p.lo >= window.hi:
                break
            total += min(p.hi, window.hi) - max(p.lo, window.lo)
        return total

    def clip_to(self, window: Interval) -> "IntervalSet":
        """Intersection with a single interval (bisected, not scanned)."""
        out: list[Interval] = []
        i = max(0, bisect_right(self._los, window.lo) - 1)
        for p in self.parts[i:]:
            if p.hi <= window.lo:
                continue
            if p.lo >= window.hi:
                break
            lo = max(p.lo, window.lo)
            hi = min(p.hi, window.hi)
            if lo < hi:
                out.append(Interval(lo, hi))
        return IntervalSet._trusted(out)

    # -- queries ----------------------------------------------------------

    def contains_point(self, x: RationalLike) -> bool:
        """Membership with closed-interval semantics at part endpoints."""
        x = as_rational(x)
        i = bisect_right(self._los, x)
        return i > 0 and x <= self.parts[i - 1].hi

    def is_empty(self) -> bool:
        return not self.parts

    def span(self) -> Interval | None:
        if not self.parts:
            return None
        return Interval(self.parts[0].lo, self.parts[-1].hi)

    def endpoints(self) -> Iterator[Fraction]:
        for p in self.parts:
            yield p.lo
            yield p.hi

    # -- dunder -----------------------------------------------------------

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        inner = ", ".join(repr(p) for p in self.parts)
        return f"IntervalSet([{inner}])"


def _normalize_parts(raw: Iterator[Interval]) -> tuple[Interval, ...]:
    items = sorted(((p.lo, p.hi) for p in raw))
    out: list[Interval] = []
    cur_lo: Fraction | None = None
    cur_hi = ZERO
    for lo, hi in items:
        if lo == hi:
            continue  # degenerate: carries no measure
        if cur_lo is None:
            cur_lo, cur_hi = lo, hi
        elif lo <= cur_hi:
            if hi > cur_hi:
                cur_hi = hi
        else:
            out.append(Interval(cur_lo, cur_hi))
            cur_lo, cur_hi = lo, hi
    if cur_lo is not None:
        out.append(Interval(cur_lo, cur_hi))
    return tuple(out)


def normalize(raw: Iterable[IntervalLike]) -> IntervalSet:
    """Canonical merged, sorted form of a list of intervals.

    Rejects any interval with lo > hi; the measure of the result equals
    the measure of the union of the inputs.
    """
    return IntervalSet(raw)


def combine(op: str, s: IntervalSet, t: IntervalSet) -> IntervalSet:
    """Dispatch union/intersection/difference by name (CLI entry point)."""
    if op == "union":
        return s.union(t)
    if op == "intersection":
        return s.intersection(t)
    if op == "difference":
        return s.difference(t)
    raise ValueError(f"unknown set operation: {op!r}")


def symdiff_measure(s: IntervalSet, t: IntervalSet) -> Fraction:
    """|S triangle T|, zero iff S and T agree up to endpoints."""
    return s.measure() + t.measure() - 2 * s.intersection(t).measure()
