from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipsetlab.intervals import (
    Interval,
    IntervalSet,
    as_rational,
    combine,
    normalize,
    symdiff_measure,
)

WIDE = Interval(F(-10), F(10))


def test_normalize_touching_merge():
    assert normalize([(0, 1), (1, 2)]) == IntervalSet.of((0, 2))


def test_normalize_empty():
    assert normalize([]) == IntervalSet.empty()


def test_normalize_overlap_and_sort():
    assert normalize([(2, 5), (0, 1), (4, 6)]) == IntervalSet.of((0, 1), (2, 6))


def test_normalize_rejects_reversed():
    with pytest.raises(ValueError):
        normalize([(1, 0)])


def test_normalize_drops_degenerate_points():
    assert normalize([(1, 1), (2, 3)]) == IntervalSet.of((2, 3))


def test_intersection_example():
    got = combine("intersection", IntervalSet.of((0, 1)), IntervalSet.of((F(1, 2), 2)))
    assert got == IntervalSet.of((F(1, 2), 1))


def test_difference_example():
    got = combine("difference", IntervalSet.of((0, 3)), IntervalSet.of((1, 2)))
    assert got == IntervalSet.of((0, 1), (2, 3))


def test_union_example():
    got = combine("union", IntervalSet.of((0, 1), (2, 3)), IntervalSet.of((F(1, 2), F(5, 2))))
    assert got == IntervalSet.of((0, 3))


def test_measure_in_examples():
    s = IntervalSet.of((0, 1), (2, 5))
    assert s.measure_in(WIDE) == 4
    assert IntervalSet.of((0, 1)).measure_in(Interval(F(1, 2), F(3, 4))) == F(1, 4)
    assert s.measure_in(Interval(F(1, 2), 3)) == F(3, 2)


def test_symdiff_examples():
    one = IntervalSet.of((0, 1))
    assert symdiff_measure(one, one) == 0
    assert symdiff_measure(one, IntervalSet.of((0, F(1, 2)))) == F(1, 2)
    # |S\T| = 1/2 + 1/2, |T\S| = 1
    assert symdiff_measure(
        IntervalSet.of((0, 1), (2, 3)), IntervalSet.of((F(1, 2), F(5, 2)))
    ) == 2


def test_as_rational_rejects_floats():
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_contains_point_closed_semantics():
    s = IntervalSet.of((0, 1), (2, 3))
    assert s.contains_point(0) and s.contains_point(1) and s.contains_point(F(5, 2))
    assert not s.contains_point(F(3, 2))


def test_clip_to_matches_intersection():
    s = IntervalSet.of((0, 1), (2, 5), (7, 9))
    w = Interval(F(1, 2), F(8))
    assert s.clip_to(w) == s.intersection(IntervalSet.of(w))


rats = st.fractions(min_value=-8, max_value=8, max_denominator=16)


@st.composite
def interval_sets(draw):
    n = draw(st.integers(min_value=0, max_value=5))
    pairs = []
    for _ in range(n):
        a = draw(rats)
        b = draw(rats)
        pairs.append((min(a, b), max(a, b)))
    return IntervalSet(pairs)


@given(interval_sets())
def test_normalize_idempotent(s):
    assert IntervalSet(s.parts) == s


@given(interval_sets(), interval_sets())
def test_inclusion_exclusion(s, t):
    assert s.measure() + t.measure() == s.union(t).measure() + s.intersection(t).measure()


@given(interval_sets(), interval_sets())
def test_difference_partitions(s, t):
    # S = (S\T) ⊔ (S∩T) exactly
    assert s.difference(t).measure() + s.intersection(t).measure() == s.measure()
    assert s.difference(t).intersection(t).measure() == 0


@given(interval_sets(), interval_sets())
def test_union_additive_when_disjoint(s, t):
    if s.intersection(t).measure() == 0:
        assert s.union(t).measure() == s.measure() + t.measure()


@given(interval_sets(), interval_sets())
def test_symdiff_is_metric_like(s, t):
    assert symdiff_measure(s, t) == symdiff_measure(t, s)
    assert symdiff_measure(s, s) == 0


@settings(max_examples=30)
@given(interval_sets())
def test_grid_oracle_agreement(s):
    # counting measure on an h-grid approximates the exact measure to
    # within h per part boundary pair
    h = F(1, 50)
    k = int(WIDE.lo / h)
    count = 0
    while k * h <= WIDE.hi:
        if s.contains_point(k * h):
            count += 1
        k += 1
    assert abs(s.measure_in(WIDE) - h * count) <= h * len(s.parts) * 2


@given(interval_sets(), interval_sets())
def test_measure_in_additive_over_partition(s, t):
    mid = F(0)
    left = Interval(WIDE.lo, mid)
    right = Interval(mid, WIDE.hi)
    assert s.measure_in(left) + s.measure_in(right) == s.measure_in(WIDE)
