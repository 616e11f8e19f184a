"""Acceptance battery: one self-contained check per shipped guarantee.

Every criterion is exact-arithmetic (the only floats are runtime clocks),
runs on a fixed seed by default, and reports a single pass/fail line.  The
battery is what `lipsetlab check --suite acceptance` executes and what the
test suite asserts criterion by criterion.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .builder import BuildKnobs, build_stages, verify_conditions
from .cantor import (
    AlphaRule,
    CantorOracle,
    CantorSpec,
    gap_report,
    pack,
    params,
    stage,
    stage_endpoints_scaled,
)
from .density import (
    CertificateSeq,
    alternating_gap_candidates,
    certificate_check,
    egd_member,
    egd_min_ratio,
    nonmember_radius,
    onesided_failure_scan,
)
from .intervals import Interval, IntervalSet, ZERO
from .oracles import FiniteOracle
from .plfuncs import PLFunction, growth_check, lip_pl, mf

ONE = Fraction(1)
HALF = Fraction(1, 2)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    runtime: float
    limit: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} criterion {self.number:2d} [{self.name}] "
            f"({self.runtime:.2f}s / limit {self.limit:.0f}s): {self.detail}"
        )


def _timed(
    number: int, name: str, limit: float, body: Callable[[], tuple[bool, str]]
) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - t0
    return CriterionResult(number, name, ok and elapsed < limit, elapsed, limit, detail)


@lru_cache(maxsize=None)
def _quarter_spec() -> CantorSpec:
    """The workhorse example: removal proportions 4^-k on [0, 1]."""
    return CantorSpec(AlphaRule.geometric(Fraction(1, 4), Fraction(1, 4)))


@lru_cache(maxsize=None)
def _stage8_certificate_report():
    spec = _quarter_spec()
    points = tuple(p.lo for p in stage(spec, 8).parts)
    cert = CertificateSeq.from_cantor_params(spec, [4, 5, 6, 7], tail_depth=24)
    return certificate_check(points, CantorOracle(spec), cert, k_range=[1, 2], depth=20)


@lru_cache(maxsize=None)
def _interval_sudt_report():
    parts = IntervalSet.of((0, 1))
    ns = range(1, 11)
    cert = CertificateSeq(
        tuple(1 - Fraction(1, 1 << n) for n in ns),
        tuple(Fraction(1, 1 << n) for n in ns),
        labels=tuple(ns),
    )
    points = tuple(Fraction(j, 101) for j in range(1, 101))
    return certificate_check(points, FiniteOracle(parts), cert, k_range=[1], depth=8)


@lru_cache(maxsize=None)
def _builder_case(case: str):
    if case == "unit":
        target = FiniteOracle(IntervalSet.of((0, 1)))
        window = Interval(Fraction(-2), Fraction(3))
        knobs = BuildKnobs(depth=6)
    elif case == "cantor8":
        target = FiniteOracle(stage(_quarter_spec(), 8))
        window = Interval(Fraction(-1), Fraction(2))
        knobs = BuildKnobs(depth=8)
    else:
        raise ValueError(case)
    states = build_stages(target, window, 4, knobs=knobs)
    return target, states


def criterion_1() -> CriterionResult:
    def body() -> tuple[bool, str]:
        spec = _quarter_spec()
        expected = ONE
        for n in range(1, 21):
            expected *= 1 - Fraction(1, 4**n)
            denom, lows, length = stage_endpoints_scaled(spec, n)
            if len(lows) != 1 << n:
                return False, f"stage {n}: wrong part count"
            if not all(b > a + length for a, b in zip(lows, lows[1:])):
                return False, f"stage {n}: parts not separated"
            if Fraction(len(lows) * length, denom) != expected:
                return False, f"stage {n}: enumerated measure != product"
        s3 = stage(spec, 3)
        if s3.measure() != Fraction(2835, 4096):
            return False, "stage 3 measure mismatch"
        if s3.measure_in(spec.base) != Fraction(2835, 4096):
            return False, "stage 3 windowed measure mismatch"
        return True, "enumerated stage measures equal the removal product for n=1..20"

    return _timed(1, "exact stage measures", 5.0, body)


def criterion_2() -> CriterionResult:
    def body() -> tuple[bool, str]:
        report = _stage8_certificate_report()
        if len(report.points) != 256:
            return False, "expected 256 stage-8 left endpoints"
        if not report.all_member():
            bad = sum(
                1 for p in report.points for s in p.statuses if s != "member"
            )
            return False, f"{bad} uncertified point/threshold pairs"
        return True, "256 endpoints certified at all four thresholds, depth 20"

    return _timed(2, "density-core certificate battery", 60.0, body)


def criterion_3() -> CriterionResult:
    def body() -> tuple[bool, str]:
        spec = _quarter_spec()
        d = spec.d_sequence(21)
        for n in range(0, 20):
            if not d[n + 1] > d[n] / 3:
                return False, f"length ratio fails at n={n}"
            if not params(spec, n, tail_depth=n + 2).d_ratio_ok:
                return False, f"params ratio flag fails at n={n}"
        return True, "d_(n+1) > d_n/3 exactly for n = 0..19"

    return _timed(3, "part-length ratio chain", 1.0, body)


def criterion_4() -> CriterionResult:
    def body() -> tuple[bool, str]:
        packed, _ = pack(4, depth=12)
        audited = 0
        worst = ZERO
        for n in range(1, 5):
            for row in gap_report(packed, n, depth=12):
                audited += 1
                worst = max(worst, row.ratio_upper)
                if not row.ratio_upper < HALF:
                    return False, f"gap {row.gap} at union level {n} has ratio {row.ratio_upper}"
        return True, f"{audited} gaps audited, worst ratio {float(worst):.4f} < 1/2"

    return _timed(4, "packing gap estimate", 60.0, body)


def _random_finite_set(rng: random.Random) -> IntervalSet:
    parts = []
    denom = 16
    cursor = Fraction(rng.randrange(-3 * denom, 0), denom)
    for _ in range(rng.randrange(1, 5)):
        cursor += Fraction(rng.randrange(1, 2 * denom), denom)
        width = Fraction(rng.randrange(1, 2 * denom), denom)
        parts.append((cursor, cursor + width))
        cursor += width
    return IntervalSet(parts)


def _brutal_min_ratio(
    parts: IntervalSet, x: Fraction, delta: Fraction, extra: Sequence[Fraction]
) -> Fraction:
    """Grid minimization of the max one-sided ratio, refined to step 2^-16."""

    def g(r: Fraction) -> Fraction:
        left = parts.measure_in(Interval(x - r, x)) / r
        right = parts.measure_in(Interval(x, x + r)) / r
        return max(left, right)

    best_val: Fraction | None = None
    best_r = delta
    step = delta / 64
    grid = [step * j for j in range(1, 65)]
    grid.extend(r for r in extra if 0 < r <= delta)
    for r in grid:
        v = g(r)
        if best_val is None or v < best_val:
            best_val, best_r = v, r
    while step > Fraction(1, 1 << 16):
        step = step / 4
        for j in range(-4, 5):
            r = best_r + j * step
            if 0 < r <= delta:
                v = g(r)
                if v < best_val:
                    best_val, best_r = v, r
    assert best_val is not None
    return best_val


def criterion_5(seed: int = 42) -> CriterionResult:
    def body() -> tuple[bool, str]:
        rng = random.Random(seed)
        checked_closedness = 0
        for trial in range(500):
            parts = _random_finite_set(rng)
            span = parts.span()
            assert span is not None
            x = span.lo + Fraction(
                rng.randrange(-8, int((span.length + 2) * 8)), 8
            )
            gamma = Fraction(rng.randrange(1, 10), 10)
            delta = Fraction(rng.randrange(1, 9), 8)
            verdict = egd_member(parts, x, gamma, delta)
            exact_min, exact_r = egd_min_ratio(parts, x, delta)
            brute = _brutal_min_ratio(parts, x, delta, extra=[exact_r])
            if brute < exact_min:
                return False, f"trial {trial}: grid found a smaller ratio than the certified infimum"
            if verdict.status == "member" and brute < gamma:
                return False, f"trial {trial}: member verdict contradicted by grid"
            if verdict.status == "nonmember":
                if not verdict.witness_value < gamma:
                    return False, f"trial {trial}: nonmember witness does not clear gamma"
                rho = nonmember_radius(verdict, gamma)
                if rho <= 0:
                    return False, f"trial {trial}: empty nonmember neighborhood"
                for shift in (rho / 2, -rho / 2, rho / 4):
                    checked_closedness += 1
                    nearby = egd_member(parts, x + shift, gamma, delta)
                    if nearby.status != "nonmember":
                        return False, f"trial {trial}: perturbed point left the complement"
        return True, f"500 verdicts grid-consistent; {checked_closedness} perturbed nonmembers stayed out"

    return _timed(5, "density-core exactness and closedness", 60.0, body)


def criterion_6() -> CriterionResult:
    def body() -> tuple[bool, str]:
        r1 = _stage8_certificate_report()
        r2 = _interval_sudt_report()
        if not (r1.sudt_implies_udt and r2.sudt_implies_udt):
            return False, "an SUDT pass lacked its UDT pass"
        pairs = sum(len(r.points) * len(r.k_range) for r in (r1, r2))
        return True, f"implication held on {pairs} point/k pairs"

    return _timed(6, "strong-type implies type", 5.0, body)


def criterion_7() -> CriterionResult:
    def body() -> tuple[bool, str]:
        report = _interval_sudt_report()
        if not report.all_sudt_pass(1):
            return False, "an interior sample failed the strong certificate at k=1"
        return True, "100 interior samples pass the strong certificate from k=1"

    return _timed(7, "interval strong certificate", 5.0, body)


def criterion_8(seed: int = 42) -> CriterionResult:
    def body() -> tuple[bool, str]:
        wanted = ["C_slope_bound", "E_steep_pairs", "F_frozen_values", "G_envelope_nesting", "cauchy"]
        summary = []
        for case in ("unit", "cantor8"):
            target, states = _builder_case(case)
            report = verify_conditions(
                states, target, samples={"points": 200, "pairs": 100}, seed=seed
            )
            if not report.passed(*wanted):
                lines = "; ".join(
                    report.results[w].summary() for w in wanted if not report.results[w].passed
                )
                return False, f"{case}: {lines}"
            summary.append(f"{case} ok")
        return True, "conditions C, E, F, G and the Cauchy matrix hold on both targets"

    return _timed(8, "staged construction conditions", 120.0, body)


def criterion_9(seed: int = 42) -> CriterionResult:
    def body() -> tuple[bool, str]:
        rng = random.Random(seed)
        audited = 0
        for case in ("unit", "cantor8"):
            target, states = _builder_case(case)
            window = states[0].window
            denom = 1 << 12
            for st in states[1:]:
                pairs = []
                for _ in range(100):
                    a = window.lo + window.length * Fraction(rng.randrange(denom), denom)
                    b = window.lo + window.length * Fraction(rng.randrange(denom), denom)
                    if a == b:
                        continue
                    pairs.append((min(a, b), max(a, b)))
                rows = growth_check(st.f, FiniteOracle(st.stand_in), pairs, depth=st.depth)
                audited += len(rows)
                for row in rows:
                    if row.status == "violation":
                        return False, f"{case} stage {st.n}: growth violated on ({row.x}, {row.y})"
        return True, f"{audited} random pairs satisfy the growth inequality"

    return _timed(9, "growth inequality on builder outputs", 30.0, body)


def _random_pl(rng: random.Random) -> PLFunction:
    count = rng.randrange(2, 7)
    xs = sorted(rng.sample(range(-64, 65), count))
    return PLFunction(
        [(Fraction(x, 16), Fraction(rng.randrange(-32, 33), 16)) for x in xs]
    )


def criterion_10(seed: int = 42) -> CriterionResult:
    def body() -> tuple[bool, str]:
        rng = random.Random(seed)
        for trial in range(1000):
            f = _random_pl(rng)
            x = Fraction(rng.randrange(-80, 81), 16)
            r = Fraction(rng.randrange(1, 33), 16)
            exact = mf(f, x, r) * r
            step = 2 * r / 64
            grid_sup = max(
                abs(f(x) - f(x - r + j * step)) for j in range(65)
            )
            if not grid_sup <= exact:
                return False, f"trial {trial}: grid sup exceeded the exact oscillation"
            if not exact <= grid_sup + f.max_abs_slope() * step:
                return False, f"trial {trial}: exact oscillation beyond the grid tolerance"
        for trial in range(200):
            f = _random_pl(rng)
            x = rng.choice(f.xs)
            gaps = [abs(x - other) for other in f.xs if other != x]
            if not gaps:
                continue
            r = min(gaps) / 2
            if mf(f, x, r) != lip_pl(f, x):
                return False, f"lip trial {trial}: small-scale oscillation != local slope"
        return True, "1000 grid comparisons and 200 small-scale identities hold"

    return _timed(10, "oscillation grid equivalence", 30.0, body)


def criterion_11() -> CriterionResult:
    def body() -> tuple[bool, str]:
        spec = _quarter_spec()
        candidates, scales = alternating_gap_candidates(spec, 12)
        hits = onesided_failure_scan(
            CantorOracle(spec), candidates, scales, Fraction(99, 100), depth=12
        )
        if not hits:
            return False, (
                "no candidate failed both sides at the audited scales; "
                "raise the depth or extend the scale pool"
            )
        h = hits[0]
        return True, (
            f"{len(hits)} of {len(candidates)} candidates fail both sides; "
            f"e.g. x={h.x} with uppers {float(h.left_upper):.3f}/{float(h.right_upper):.3f}"
        )

    return _timed(11, "one-sided density failure demonstration", 120.0, body)


def run_acceptance(seed: int = 42) -> list[CriterionResult]:
    return [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(seed),
        criterion_6(),
        criterion_7(),
        criterion_8(seed),
        criterion_9(seed),
        criterion_10(seed),
        criterion_11(),
    ]
