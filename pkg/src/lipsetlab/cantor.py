"""Middle-interval Cantor constructions with exact stage arithmetic.

A construction starts from a base interval and, at step n, removes from
each remaining interval the open middle piece of relative length alpha_n,
leaving 2^n closed intervals of a common length d_n with
2*d_n = (1 - alpha_n) * d_{n-1}.  When sum(alpha_n) converges the limit
set keeps positive measure; all certified bounds here are driven by the
exact tail sums of the alpha rule.

Alpha sequences are an explicit finite head plus a geometric tail
c*q^k (0 <= q < 1), the only shape accepted because it is the one whose
tails we can sum exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterator, Sequence

from .errors import BudgetExceeded, GapsExhausted
from .intervals import Interval, IntervalSet, ZERO, as_rational
from .oracles import (
    DEFAULT_REALIZE_BUDGET,
    Enclosure,
    MeasureBounds,
    MeasureOracle,
    UnionOracle,
)

ONE = Fraction(1)
HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

DEFAULT_STAGE_BUDGET = 1 << 16

UNIT = Interval(ZERO, ONE)


@dataclass(frozen=True)
class AlphaRule:
    """Removal proportions: head list for k <= len(head), then c*q^k."""

    head: tuple[Fraction, ...] = ()
    tail_c: Fraction = ZERO
    tail_q: Fraction = ZERO

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", tuple(as_rational(a) for a in self.head))
        object.__setattr__(self, "tail_c", as_rational(self.tail_c))
        object.__setattr__(self, "tail_q", as_rational(self.tail_q))
        for a in self.head:
            if not 0 <= a < 1:
                raise ValueError(f"alpha entries must lie in [0, 1), got {a}")
        if self.tail_c < 0:
            raise ValueError("tail coefficient must be nonnegative")
        if not 0 <= self.tail_q < 1:
            # q >= 1 would make the tail non-summable; no certified bounds exist then.
            raise ValueError("tail ratio must satisfy 0 <= q < 1 for a computable tail")
        if self.tail_c > 0:
            first_tail = self.tail_c * self.tail_q ** (len(self.head) + 1)
            if first_tail >= 1:
                raise ValueError("tail values must stay below 1")
        if self.tail_c > 0 and self.tail_q == 0:
            raise ValueError("positive tail coefficient needs a positive ratio")

    @classmethod
    def geometric(cls, first: Fraction, ratio: Fraction) -> "AlphaRule":
        """Pure geometric rule alpha_k = first * ratio^(k-1)."""
        first = as_rational(first)
        ratio = as_rational(ratio)
        if ratio == 0:
            return cls(head=(first,))
        return cls(head=(), tail_c=first / ratio, tail_q=ratio)

    def alpha(self, k: int) -> Fraction:
        """alpha_k for k >= 1."""
        if k < 1:
            raise ValueError("alpha index starts at 1")
        if k <= len(self.head):
            return self.head[k - 1]
        if self.tail_c == 0:
            return ZERO
        return self.tail_c * self.tail_q**k

    def tail_sum(self, depth: int) -> Fraction:
        """Exact sum of alpha_k over k > depth."""
        total = ZERO
        for k in range(depth + 1, len(self.head) + 1):
            total += self.head[k - 1]
        if self.tail_c > 0:
            start = max(depth, len(self.head)) + 1
            total += self.tail_c * self.tail_q**start / (1 - self.tail_q)
        return total

    def total_sum(self) -> Fraction:
        return self.tail_sum(0)

    def alpha_sup_after(self, depth: int) -> Fraction:
        """An exact upper bound for alpha_k over k > depth."""
        best = ZERO
        for k in range(depth + 1, len(self.head) + 1):
            best = max(best, self.head[k - 1])
        if self.tail_c > 0:
            start = max(depth, len(self.head)) + 1
            best = max(best, self.tail_c * self.tail_q**start)
        return best

    def max_alpha(self) -> Fraction:
        return self.alpha_sup_after(0)

    def last_positive(self, n: int) -> int:
        """Largest k <= n with alpha_k > 0 (0 when none): beyond it, stage
        splits are measure-neutral and the canonical stage set stops changing."""
        if self.tail_c > 0:
            return n
        k = min(n, len(self.head))
        while k > 0 and self.head[k - 1] == 0:
            k -= 1
        return k


@dataclass(frozen=True)
class CantorSpec:
    """A middle-interval construction on a base interval."""

    alpha: AlphaRule
    base: Interval = UNIT
    require_small: bool = False  # enforce alpha_n < 1/3 throughout

    def __post_init__(self) -> None:
        if self.base.length <= 0:
            raise ValueError("base interval must have positive length")
        if self.require_small and self.alpha.max_alpha() >= THIRD:
            raise ValueError("alpha rule violates the alpha_n < 1/3 restriction")

    def d_sequence(self, n: int) -> list[Fraction]:
        """Common part lengths d_0..d_n (d_0 = |base|)."""
        d = [self.base.length]
        for k in range(1, n + 1):
            d.append((1 - self.alpha.alpha(k)) * d[-1] / 2)
        return d

    def stage_measure(self, n: int) -> Fraction:
        """|stage n| = |base| * prod_{k<=n} (1 - alpha_k), via the d recursion."""
        return (1 << n) * self.d_sequence(n)[n]

    def rebase(self, placement: Interval) -> "CantorSpec":
        """The same construction carried onto another interval; removal
        proportions are scale-free, so this is the homothetic image."""
        return CantorSpec(self.alpha, placement, self.require_small)


# -- stage enumeration ----------------------------------------------------


def stage_endpoints_scaled(spec: CantorSpec, n: int) -> tuple[int, list[int], int]:
    """Left endpoints of the stage-n intervals as exact scaled integers.

    Returns (denominator, sorted left endpoints * denominator,
    part length * denominator).  This is the streaming-friendly path: deep
    stages are enumerated in plain integer arithmetic and converted to
    fractions only when a caller materializes them.
    """
    eff = spec.alpha.last_positive(n)
    d = spec.d_sequence(eff)
    gaps = [d[k - 1] - d[k] for k in range(1, eff + 1)]
    denom = lcm(spec.base.lo.denominator, d[eff].denominator,
                *(g.denominator for g in gaps))
    lo0 = int(spec.base.lo * denom)
    gap_ints = [int(g * denom) for g in gaps]
    length = int(d[eff] * denom)
    endpoints = [lo0]
    for g in gap_ints:
        endpoints = [x for a in endpoints for x in (a, a + g)]
    return denom, endpoints, length


def stage(spec: CantorSpec, n: int, max_parts: int = DEFAULT_STAGE_BUDGET) -> IntervalSet:
    """The stage-n set as a canonical IntervalSet (2^n equal closed parts
    when every alpha is positive; zero-alpha splits merge back)."""
    if n < 0:
        raise ValueError("stage index must be >= 0")
    eff = spec.alpha.last_positive(n)
    if (1 << eff) > max_parts:
        raise BudgetExceeded(
            f"stage {n} needs 2^{eff} parts, over the budget of {max_parts}"
        )
    if eff == 0:
        return IntervalSet.of(spec.base)
    denom, endpoints, length = stage_endpoints_scaled(spec, eff)
    parts = [
        Interval(Fraction(a, denom), Fraction(a + length, denom)) for a in endpoints
    ]
    return IntervalSet(parts)


def iter_stage_lengths(spec: CantorSpec, n: int) -> Iterator[tuple[int, int]]:
    """Stream (scaled lo, scaled hi) pairs of stage n in increasing order."""
    denom, endpoints, length = stage_endpoints_scaled(spec, n)
    for a in endpoints:
        yield a, a + length


def stage_measure_in(spec: CantorSpec, n: int, window: Interval) -> Fraction:
    """Exact |stage_n ∩ window| by pruned descent (no enumeration).

    Only subtrees cut by the window boundary are expanded, so the cost is
    O(n) regardless of 2^n.
    """
    d = spec.d_sequence(n)
    # measure of a full level-m subtree: 2^(n-m) * d_n
    full = [(1 << (n - m)) * d[n] for m in range(n + 1)]

    def rec(lo: Fraction, hi: Fraction, m: int) -> Fraction:
        if window.hi <= lo or hi <= window.lo:
            return ZERO
        if window.lo <= lo and hi <= window.hi:
            return full[m]
        if m == n:
            return min(hi, window.hi) - max(lo, window.lo)
        child = d[m + 1]
        return rec(lo, lo + child, m + 1) + rec(hi - child, hi, m + 1)

    return rec(spec.base.lo, spec.base.hi, 0)


def stage_lower_in(
    spec: CantorSpec, n: int, window: Interval, per_part_deficit: Fraction
) -> Fraction:
    """Sum over stage-n parts of max(0, |part ∩ window| - deficit).

    With deficit an upper bound on |part \\ E| this is a certified lower
    bound on |E ∩ window|; computed by the same pruned descent.
    """
    d = spec.d_sequence(n)
    per_full = max(ZERO, d[n] - per_part_deficit)
    full = [(1 << (n - m)) * per_full for m in range(n + 1)]

    def rec(lo: Fraction, hi: Fraction, m: int) -> Fraction:
        if window.hi <= lo or hi <= window.lo:
            return ZERO
        if window.lo <= lo and hi <= window.hi:
            return full[m]
        if m == n:
            part = min(hi, window.hi) - max(lo, window.lo)
            return max(ZERO, part - per_part_deficit)
        child = d[m + 1]
        return rec(lo, lo + child, m + 1) + rec(hi - child, hi, m + 1)

    return rec(spec.base.lo, spec.base.hi, 0)


@dataclass(frozen=True)
class LocateResult:
    """Where a point sits relative to the construction at a given depth."""

    kind: str  # "endpoint" | "interior" | "gap" | "outside"
    chain: tuple[Interval, ...]  # containing stage interval per level
    endpoint_side: str | None = None  # "lo"/"hi" once x pins to an endpoint
    endpoint_level: int | None = None
    gap: Interval | None = None  # open gap containing x, when kind == "gap"


def locate(spec: CantorSpec, x: Fraction, depth: int) -> LocateResult:
    """Descend the construction tree around x down to `depth` levels.

    A point equal to the lo (hi) of its stage interval stays the lo (hi)
    of a child at every deeper level, which is what makes one-sided
    density ladders certifiable for it.
    """
    x = as_rational(x)
    if not spec.base.contains(x):
        return LocateResult("outside", ())
    d = spec.d_sequence(depth)
    lo, hi = spec.base.lo, spec.base.hi
    chain: list[Interval] = [Interval(lo, hi)]
    for m in range(1, depth + 1):
        if x == lo:
            return LocateResult("endpoint", tuple(chain), "lo", m - 1)
        if x == hi:
            return LocateResult("endpoint", tuple(chain), "hi", m - 1)
        child = d[m]
        if x <= lo + child:
            # boundary x == lo + child descends left and pins to its hi
            hi = lo + child
        elif x >= hi - child:
            lo = hi - child
        else:
            return LocateResult(
                "gap", tuple(chain), gap=Interval(lo + child, hi - child)
            )
        chain.append(Interval(lo, hi))
    if x == lo:
        return LocateResult("endpoint", tuple(chain), "lo", depth)
    if x == hi:
        return LocateResult("endpoint", tuple(chain), "hi", depth)
    return LocateResult("interior", tuple(chain))


# -- certificate parameters ------------------------------------------------


@dataclass(frozen=True)
class CantorParams:
    """Per-stage certificate quantities derived from the alpha rule.

    beta bounds the fraction of a stage part's length that survives every
    later removal (the infinite product of (1 - alpha_k) past n), gamma is
    the affine image 1 - 12*(1 - beta), and delta = d_n / 2 is the scale
    below which the one-sided density guarantee is claimed.
    """

    n: int
    part_length: Fraction  # d_n
    stage_measure: Fraction  # 2^n * d_n
    beta: MeasureBounds
    gamma: Enclosure  # can dip below zero at shallow n; vacuous threshold then
    delta: Fraction
    d_ratio_ok: bool  # d_{n+1} > d_n / 3
    r_range_ok: bool  # alpha_{n+1} < 1/3, the hypothesis backing the scale range


def params(spec: CantorSpec, n: int, tail_depth: int) -> CantorParams:
    if tail_depth < n + 1:
        raise ValueError("tail_depth must be at least n + 1")
    d = spec.d_sequence(tail_depth)
    beta_upper = ONE
    for k in range(n + 1, tail_depth + 1):
        beta_upper *= 1 - spec.alpha.alpha(k)
    tail = spec.alpha.tail_sum(tail_depth)
    beta_lower = max(ZERO, beta_upper * (1 - tail))
    # gamma is an affine increasing image of beta, so bounds map directly;
    # early stages can push the lower end below zero, which stays honest.
    gamma = Enclosure(1 - 12 * (1 - beta_lower), 1 - 12 * (1 - beta_upper))
    return CantorParams(
        n=n,
        part_length=d[n],
        stage_measure=(1 << n) * d[n],
        beta=MeasureBounds(beta_lower, beta_upper),
        gamma=gamma,
        delta=d[n] / 2,
        d_ratio_ok=d[n + 1] > d[n] / 3,
        r_range_ok=spec.alpha.alpha(n + 1) < THIRD,
    )


# -- oracle -----------------------------------------------------------------


@dataclass(frozen=True)
class CantorOracle(MeasureOracle):
    """Certified bounds for the limit set of a middle-interval construction."""

    spec: CantorSpec

    def bounds(self, window: Interval, depth: int) -> MeasureBounds:
        upper = stage_measure_in(self.spec, depth, window)
        tail = self.spec.alpha.tail_sum(depth)
        d_n = self.spec.d_sequence(depth)[depth]
        lower = stage_lower_in(self.spec, depth, window, tail * d_n)
        return MeasureBounds(min(lower, upper), upper)

    def realize(self, depth: int, max_parts: int = DEFAULT_REALIZE_BUDGET) -> IntervalSet:
        return stage(self.spec, depth, max_parts)


# -- packing -----------------------------------------------------------------


def halving_rule(n: int) -> AlphaRule:
    """An alpha rule whose limit set has measure exactly 2^-n on [0, 1].

    Each block (1/5, 1/6, 1/4) multiplies the surviving measure by 1/2
    exactly while keeping every entry below 1/3; the tail is zero, so the
    limit set equals its stage-3n set and all oracle bounds are tight.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    block = (Fraction(1, 5), Fraction(1, 6), Fraction(1, 4))
    return AlphaRule(head=block * n)


@dataclass(frozen=True)
class PackedSpec:
    """A finite packing of scaled middle-interval sets into mutual gaps."""

    count: int
    rules: tuple[AlphaRule, ...]
    placements: tuple[Interval, ...]
    placement_policy: str
    depth: int
    base: Interval = UNIT
    gap_log: tuple[Interval, ...] = field(default=())

    def oracle(self, index: int) -> CantorOracle:
        return CantorOracle(CantorSpec(self.rules[index], self.placements[index]))

    def oracles(self) -> tuple[CantorOracle, ...]:
        return tuple(self.oracle(i) for i in range(self.count))


def _widest_gap(gaps: Sequence[Interval]) -> Interval:
    best = gaps[0]
    for g in gaps[1:]:
        if g.length > best.length:
            best = g
    return best


def pack(
    budget: int,
    gap_policy: str = "widest-gap-first",
    depth: int = 12,
    base: Interval = UNIT,
) -> tuple[PackedSpec, UnionOracle]:
    """Place `budget` sets of measure 2^-1, 2^-2, ... so that each new set
    is a scaled copy centered in a gap of the union built so far.

    The copy occupies the middle third of its host gap, which keeps it
    strictly interior and leaves room on both sides for later placements.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if gap_policy != "widest-gap-first":
        raise ValueError(f"unknown gap policy: {gap_policy!r}")
    rules = [halving_rule(m) for m in range(1, budget + 1)]
    placements: list[Interval] = [base]
    gap_log: list[Interval] = []
    union_so_far = stage(CantorSpec(rules[0], base), depth)
    for m in range(1, budget):
        gaps = union_so_far.complement_in(base)
        if gaps.is_empty():
            raise GapsExhausted(f"no gap left for placement {m + 1}")
        host = _widest_gap(gaps.parts)
        third = host.length / 3
        placement = Interval(host.lo + third, host.hi - third)
        gap_log.append(host)
        placements.append(placement)
        union_so_far = union_so_far.union(stage(CantorSpec(rules[m], placement), depth))
    packed = PackedSpec(
        count=budget,
        rules=tuple(rules),
        placements=tuple(placements),
        placement_policy=gap_policy,
        depth=depth,
        base=base,
        gap_log=tuple(gap_log),
    )
    return packed, UnionOracle(packed.oracles())


@dataclass(frozen=True)
class GapRow:
    """One audited gap of a packing-stage union."""

    gap: Interval
    ratio_upper: Fraction  # certified bound on |E ∩ gap| / |gap| over placed sets
    future_allowance: Fraction  # worst-case ratio a continued packing could add


def gap_report(packed: PackedSpec, n: int, depth: int) -> list[GapRow]:
    """Audit every gap of the union of the first n placed sets.

    ratio_upper certifies |E ∩ (a,b)| / (b-a) for the placed sets; the
    future allowance column states what placements beyond the budget could
    contribute (each later set has measure 2^-j and lands scaled into a
    sub-gap at no more than a third of its host's length).
    """
    if not 1 <= n <= packed.count:
        raise ValueError("n must be within the packed count")
    union_n = IntervalSet.empty()
    for i in range(n):
        union_n = union_n.union(packed.oracle(i).realize(depth))
    gaps = union_n.complement_in(packed.base)
    all_oracles = packed.oracles()
    # Hypothetical continuation: sum over j > count of 2^-j, scaled by the
    # worst placement fraction (a third of the enclosing gap).
    future = Fraction(1, 3) * Fraction(1, 1 << packed.count)
    rows: list[GapRow] = []
    for gap in gaps.parts:
        total_upper = ZERO
        for oracle in all_oracles:
            total_upper += oracle.bounds(gap, depth).upper
        rows.append(
            GapRow(
                gap=gap,
                ratio_upper=total_upper / gap.length,
                future_allowance=future,
            )
        )
    return rows
