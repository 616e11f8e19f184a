from fractions import Fraction as F

import pytest

from lipsetlab.cantor import (
    AlphaRule,
    CantorOracle,
    CantorSpec,
    gap_report,
    halving_rule,
    locate,
    pack,
    params,
    stage,
    stage_measure_in,
)
from lipsetlab.errors import BudgetExceeded, GapsExhausted
from lipsetlab.intervals import Interval, IntervalSet

QUARTER = CantorSpec(AlphaRule.geometric(F(1, 4), F(1, 4)))
UNIT = Interval(F(0), F(1))


def test_stage_zero_is_base():
    assert stage(QUARTER, 0) == IntervalSet.of(UNIT)


def test_stage_one_example():
    assert stage(QUARTER, 1) == IntervalSet.of((0, F(3, 8)), (F(5, 8), 1))


def test_stage_two_example():
    s2 = stage(QUARTER, 2)
    assert len(s2) == 4
    assert all(p.length == F(45, 256) for p in s2.parts)
    assert s2.measure_in(UNIT) == F(45, 64)


def test_stage_measure_matches_product():
    expected = F(1)
    for n in range(1, 12):
        expected *= 1 - F(1, 4**n)
        assert stage(QUARTER, n).measure() == expected
        assert stage_measure_in(QUARTER, n, UNIT) == expected


def test_stage_nesting_and_gap_structure():
    prev = stage(QUARTER, 4)
    nxt = stage(QUARTER, 5)
    assert nxt.difference(prev).is_empty()
    # every part of stage n contains a gap of stage n+1
    for part in prev.parts:
        inside = nxt.clip_to(part)
        assert len(inside) == 2
        assert inside.measure() < part.length


def test_stage_budget_error():
    with pytest.raises(BudgetExceeded):
        stage(QUARTER, 20, max_parts=1 << 10)


def test_stage_respects_rebase():
    placed = QUARTER.rebase(Interval(F(2), F(4)))
    s1 = stage(placed, 1)
    assert s1 == IntervalSet.of((2, F(11, 4)), (F(13, 4), 4))
    assert s1.measure() == 2 * stage(QUARTER, 1).measure()


def test_params_examples():
    p1 = params(QUARTER, 1, tail_depth=10)
    assert p1.part_length == F(3, 8)
    assert p1.delta == F(3, 16)

    p2 = params(QUARTER, 2, tail_depth=10)
    beta_upper = F(1)
    for k in range(3, 11):
        beta_upper *= 1 - F(1, 4**k)
    assert p2.beta.upper == beta_upper
    tail = QUARTER.alpha.tail_sum(10)
    assert p2.beta.lower == beta_upper * (1 - tail)
    assert p2.gamma.lower == 1 - 12 * (1 - p2.beta.lower)


def test_params_degenerate_zero_alpha():
    rule = AlphaRule(head=(F(1, 4), F(0), F(0)))
    spec = CantorSpec(rule)
    p = params(spec, 1, tail_depth=4)
    assert p.beta.upper == 1
    assert p.gamma.upper == 1
    # zero-alpha splits merge back: the stage set stops changing
    assert stage(spec, 3) == stage(spec, 1)


def test_params_ratio_flags():
    p = params(QUARTER, 5, tail_depth=8)
    assert p.d_ratio_ok and p.r_range_ok
    steep = CantorSpec(AlphaRule(head=(F(1, 2), F(1, 2), F(1, 2))))
    q = params(steep, 1, tail_depth=3)
    assert not q.d_ratio_ok and not q.r_range_ok


def test_require_small_flag():
    with pytest.raises(ValueError):
        CantorSpec(AlphaRule(head=(F(1, 2),)), require_small=True)
    CantorSpec(QUARTER.alpha, require_small=True)  # fine: sup is 1/4


def test_halving_rule_measures():
    for n in (1, 2, 3):
        spec = CantorSpec(halving_rule(n))
        assert spec.stage_measure(3 * n) == F(1, 1 << n)
        assert spec.alpha.max_alpha() < F(1, 3)
        assert spec.alpha.tail_sum(3 * n) == 0


def test_locate_kinds():
    assert locate(QUARTER, F(0), 6).kind == "endpoint"
    assert locate(QUARTER, F(1), 6).endpoint_side == "hi"
    mid = locate(QUARTER, F(1, 2), 6)
    assert mid.kind == "gap"
    assert mid.gap == Interval(F(3, 8), F(5, 8))
    assert locate(QUARTER, F(5, 8), 6).endpoint_side == "lo"
    assert locate(QUARTER, F(3), 6).kind == "outside"


def test_pack_single_set():
    packed, oracle = pack(1, depth=6)
    assert packed.count == 1
    assert packed.placements == (UNIT,)
    b = oracle.bounds(UNIT, 6)
    assert b.lower == b.upper == F(1, 2)  # zero-tail rule: bounds are tight


def test_pack_two_sets_widest_gap():
    packed, _ = pack(2, depth=6)
    host = packed.gap_log[0]
    # the widest gap of the first set is its middle one
    assert host == Interval(F(2, 5), F(3, 5))
    third = host.length / 3
    assert packed.placements[1] == Interval(host.lo + third, host.hi - third)


def test_pack_three_sets_disjoint_and_bounded():
    packed, oracle = pack(3, depth=9)
    placed = [stage(CantorSpec(r, p), 9) for r, p in zip(packed.rules, packed.placements)]
    for i in range(3):
        for j in range(i + 1, 3):
            assert placed[i].intersection(placed[j]).is_empty()
    total = oracle.bounds(UNIT, 9)
    assert total.upper <= F(1, 2) + F(1, 4) + F(1, 8)


def test_pack_unknown_policy():
    with pytest.raises(ValueError):
        pack(2, gap_policy="round-robin")


def test_pack_exhaustion():
    # a full-measure "construction" leaves no gaps to host the second set
    full = AlphaRule(head=(F(0),))
    import lipsetlab.cantor as cantor_mod

    original = cantor_mod.halving_rule
    cantor_mod.halving_rule = lambda n: full  # type: ignore[assignment]
    try:
        with pytest.raises(GapsExhausted):
            pack(2, depth=3)
    finally:
        cantor_mod.halving_rule = original


def test_gap_report_untouched_gap_is_zero():
    packed, _ = pack(1, depth=6)
    rows = gap_report(packed, 1, depth=6)
    assert rows and all(r.ratio_upper == 0 for r in rows)


def test_gap_report_hosting_gap_under_half():
    packed, _ = pack(3, depth=9)
    for level in (1, 2, 3):
        for row in gap_report(packed, level, depth=9):
            assert row.ratio_upper < F(1, 2)
    # the gap hosting set 2 sees its mass
    rows1 = gap_report(packed, 1, depth=9)
    host = packed.gap_log[0]
    hosting = [r for r in rows1 if r.gap.lo <= host.lo and host.hi <= r.gap.hi]
    assert hosting and hosting[0].ratio_upper > 0
