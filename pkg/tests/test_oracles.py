from fractions import Fraction as F

import pytest

from lipsetlab.cantor import AlphaRule, CantorOracle, CantorSpec
from lipsetlab.intervals import Interval, IntervalSet
from lipsetlab.oracles import FiniteOracle, MeasureBounds, UnionOracle

QUARTER = CantorSpec(AlphaRule.geometric(F(1, 4), F(1, 4)))
UNIT = Interval(F(0), F(1))


def test_finite_bounds_tight_at_any_depth():
    oracle = FiniteOracle(IntervalSet.of((0, 1)))
    for depth in (0, 3, 17):
        b = oracle.bounds(Interval(F(0), F(2)), depth)
        assert b.lower == b.upper == 1


def test_cantor_bounds_depth3_frozen_values():
    # stage-3 mass is 2835/4096 and the removal tail past depth 3 sums to
    # 1/192, so the per-part deficit bound gives exactly that product
    oracle = CantorOracle(QUARTER)
    b = oracle.bounds(UNIT, 3)
    assert b.upper == F(2835, 4096)
    assert b.lower == F(2835, 4096) * (1 - F(1, 192))


def test_union_disjoint_additive():
    u = UnionOracle(
        (FiniteOracle(IntervalSet.of((0, 1))), FiniteOracle(IntervalSet.of((2, 3))))
    )
    b = u.bounds(Interval(F(0), F(3)), 4)
    assert b.lower == b.upper == 2


def test_union_overlapping_stays_sound():
    u = UnionOracle(
        (FiniteOracle(IntervalSet.of((0, 2))), FiniteOracle(IntervalSet.of((1, 3))))
    )
    b = u.bounds(Interval(F(0), F(3)), 4)
    assert b.lower <= 3 <= b.upper  # true union measure is 3
    assert b.upper <= 3  # window clamp


def test_realize_finite_identity():
    s = IntervalSet.of((0, 1), (4, 5))
    assert FiniteOracle(s).realize(9) == s


def test_realize_depth1_example():
    got = CantorOracle(QUARTER).realize(1)
    assert got == IntervalSet.of((0, F(3, 8)), (F(5, 8), 1))


def test_realize_union_is_normalized_union():
    u = UnionOracle(
        (FiniteOracle(IntervalSet.of((0, 1))), FiniteOracle(IntervalSet.of((F(1, 2), 2))))
    )
    assert u.realize(2) == IntervalSet.of((0, 2))


def test_realize_nesting():
    oracle = CantorOracle(QUARTER)
    for d in range(0, 6):
        outer = oracle.realize(d)
        inner = oracle.realize(d + 1)
        assert inner.difference(outer).measure() == 0
        assert inner.difference(outer).is_empty()


def test_bounds_width_monotone_in_depth():
    oracle = CantorOracle(QUARTER)
    windows = [UNIT, Interval(F(1, 3), F(2, 3)), Interval(F(0), F(3, 8))]
    for w in windows:
        widths = [oracle.bounds(w, d).width for d in range(0, 8)]
        assert all(b <= a for a, b in zip(widths, widths[1:]))


def test_bounds_enclose_deeper_realizations():
    oracle = CantorOracle(QUARTER)
    w = Interval(F(1, 8), F(7, 8))
    b = oracle.bounds(w, 4)
    for deeper in (4, 6, 8):
        stage_m = oracle.realize(deeper).measure_in(w)
        assert b.lower <= stage_m <= b.upper


def test_convergence_bound_on_base_window():
    oracle = CantorOracle(QUARTER)
    rule = QUARTER.alpha
    for d in range(1, 8):
        width = oracle.bounds(UNIT, d).width
        assert width <= UNIT.length * rule.tail_sum(d)


def test_measure_bounds_validation():
    with pytest.raises(ValueError):
        MeasureBounds(F(2), F(1))
    with pytest.raises(ValueError):
        MeasureBounds(F(-1), F(1))


def test_alpha_rule_rejects_non_summable_tail():
    with pytest.raises(ValueError):
        AlphaRule(head=(), tail_c=F(1), tail_q=F(1))


def test_alpha_tail_sum_geometric():
    rule = AlphaRule.geometric(F(1, 4), F(1, 4))
    # sum over k > 3 of 4^-k = (1/256) / (1 - 1/4)
    assert rule.tail_sum(3) == F(1, 192)
    assert rule.total_sum() == F(1, 3)


def test_alpha_head_plus_tail():
    rule = AlphaRule(head=(F(1, 2), F(0)), tail_c=F(1), tail_q=F(1, 4))
    assert rule.alpha(1) == F(1, 2)
    assert rule.alpha(2) == 0
    assert rule.alpha(3) == F(1, 64)
    assert rule.tail_sum(1) == 0 + F(1, 64) / (1 - F(1, 4))
