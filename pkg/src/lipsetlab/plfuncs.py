"""Exact piecewise-linear functions and their oscillation calculus.

A PLFunction is a sorted list of rational breakpoints with linear
interpolation between them and constant extension beyond the first and
last; the constant extension keeps slope bounds valid on the whole line.
For such functions the scaled oscillation sup{|f(x)-f(y)| : |x-y| <= r}/r
is attained at a breakpoint or a window endpoint, so every quantity here
is an exact rational, and the local steepness at a point is simply the
larger adjacent slope magnitude.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .intervals import Interval, ZERO, as_rational
from .oracles import MeasureOracle


class PLFunction:
    __slots__ = ("xs", "ys")

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]

    def __init__(self, breakpoints: Iterable[tuple[Fraction, Fraction]]):
        pts = [(as_rational(x), as_rational(y)) for x, y in breakpoints]
        if not pts:
            raise ValueError("a PL function needs at least one breakpoint")
        xs = tuple(p[0] for p in pts)
        for a, b in zip(xs, xs[1:]):
            if a >= b:
                raise ValueError("breakpoint abscissae must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", tuple(p[1] for p in pts))

    @classmethod
    def constant(cls, value: Fraction) -> "PLFunction":
        return cls([(ZERO, as_rational(value))])

    @classmethod
    def from_pairs(cls, *pairs: tuple[Fraction, Fraction]) -> "PLFunction":
        return cls(pairs)

    def __call__(self, x: Fraction) -> Fraction:
        x = as_rational(x)
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, x)
        x0, x1 = xs[i - 1], xs[i]
        y0, y1 = ys[i - 1], ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def breakpoints(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(zip(self.xs, self.ys))

    def segment_slopes(self) -> list[Fraction]:
        return [
            (y1 - y0) / (x1 - x0)
            for (x0, x1, y0, y1) in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])
        ]

    def slope_left(self, x: Fraction) -> Fraction:
        """Slope immediately to the left of x (0 in the constant extension)."""
        return _adjacent_slope(self, as_rational(x), left=True)

    def slope_right(self, x: Fraction) -> Fraction:
        """Slope immediately to the right of x (0 in the constant extension)."""
        return _adjacent_slope(self, as_rational(x), left=False)

    def max_abs_slope(self) -> Fraction:
        best = ZERO
        for s in self.segment_slopes():
            best = max(best, abs(s))
        return best

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PLFunction):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __hash__(self) -> int:
        return hash((self.xs, self.ys))

    def __repr__(self) -> str:
        pts = ", ".join(f"({x}, {y})" for x, y in zip(self.xs, self.ys))
        return f"PLFunction([{pts}])"


def mf(f: PLFunction, x: Fraction, r: Fraction) -> Fraction:
    """Exact sup{|f(x) - f(y)| : |x - y| <= r} / r.

    Piecewise linearity pins the sup to a breakpoint inside the window or
    to one of the window endpoints, so a finite candidate sweep is exact.
    """
    x = as_rational(x)
    r = as_rational(r)
    if r <= 0:
        raise ValueError("oscillation scale r must be positive")
    fx = f(x)
    lo, hi = x - r, x + r
    best = ZERO
    for y in _window_candidates(f, lo, hi):
        dev = abs(f(y) - fx)
        if dev > best:
            best = dev
    return best / r


def _window_candidates(f: PLFunction, lo: Fraction, hi: Fraction):
    yield lo
    yield hi
    i = bisect_right(f.xs, lo)
    while i < len(f.xs) and f.xs[i] < hi:
        yield f.xs[i]
        i += 1


def lip_pl(f: PLFunction, x: Fraction) -> Fraction:
    """max(|left slope|, |right slope|) at x.

    For a function with finitely many breakpoints the limsup and liminf of
    the scaled oscillation as r -> 0+ agree and equal this value, so it
    serves as both the upper and lower local Lipschitz constant.
    """
    x = as_rational(x)
    return max(abs(_adjacent_slope(f, x, left=True)), abs(_adjacent_slope(f, x, left=False)))


def _adjacent_slope(f: PLFunction, x: Fraction, left: bool) -> Fraction:
    xs, ys = f.xs, f.ys
    if left:
        if x <= xs[0] or x > xs[-1]:
            return ZERO
        i = bisect_left(xs, x)  # xs[i-1] < x <= xs[i]
    else:
        if x < xs[0] or x >= xs[-1]:
            return ZERO
        i = bisect_right(xs, x)  # xs[i-1] <= x < xs[i]
    return (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])


def lip_profile(
    f: PLFunction, x: Fraction, r_list: Sequence[Fraction]
) -> list[tuple[Fraction, Fraction]]:
    """Exact scaled-oscillation values per scale, largest scale first."""
    rs = [as_rational(r) for r in r_list]
    if any(r <= 0 for r in rs):
        raise ValueError("profile scales must be positive")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise ValueError("profile scales must be strictly decreasing")
    return [(r, mf(f, x, r)) for r in rs]


def sup_norm_diff(f: PLFunction, g: PLFunction) -> Fraction:
    """Exact sup |f - g|; the difference is PL, so the sup sits at a
    breakpoint of either function (constant extensions beyond)."""
    best = ZERO
    for x in sorted(set(f.xs) | set(g.xs)):
        dev = abs(f(x) - g(x))
        if dev > best:
            best = dev
    return best


@dataclass(frozen=True)
class GrowthRow:
    x: Fraction
    y: Fraction
    diff: Fraction  # |f(x) - f(y)|
    mass_lower: Fraction  # certified bounds on |[x, y] ∩ E|
    mass_upper: Fraction
    status: str  # "ok" (diff <= lower), "gap" (within oracle gap), "violation"


def growth_check(
    f: PLFunction,
    target: MeasureOracle,
    pairs: Sequence[tuple[Fraction, Fraction]],
    depth: int,
) -> list[GrowthRow]:
    """Audit |f(x) - f(y)| <= |[x, y] ∩ E| per pair against oracle bounds.

    A pair is a violation only when the difference exceeds the certified
    upper bound; differences inside the oracle gap are flagged "gap".
    """
    rows: list[GrowthRow] = []
    for x, y in pairs:
        x = as_rational(x)
        y = as_rational(y)
        if not x < y:
            raise ValueError(f"pairs must satisfy x < y, got ({x}, {y})")
        b = target.bounds(Interval(x, y), depth)
        diff = abs(f(x) - f(y))
        if diff <= b.lower:
            status = "ok"
        elif diff <= b.upper:
            status = "gap"
        else:
            status = "violation"
        rows.append(GrowthRow(x, y, diff, b.lower, b.upper, status))
    return rows
