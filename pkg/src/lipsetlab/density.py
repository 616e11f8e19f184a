"""One-sided density queries and density-core certificates.

The central object is the density core E^{gamma,delta}: the set of points
x such that for every scale r in (0, delta] at least one of the one-sided
windows (x-r, x) or (x, x+r) meets E with relative measure >= gamma.

For a finite interval set the membership verdict is computed exactly.
Both one-sided measures are piecewise affine in r with slopes in {0, 1},
so on each maximal affine segment the ratio has the shape c/r + s and is
monotone; the infimum of the max of the two ratios over (0, delta] is
therefore attained at a segment endpoint or at the rational crossing
r = (c1 - c2)/(s2 - s1).  Near r = 0 both affine pieces pass through the
origin, the ratios are constant, and no limit needs approximating.

For oracle-backed sets verdicts are three-valued: membership is certified
through one-sided density ladders at construction endpoints, exclusion
through vanishing upper bounds, and everything else stays "unknown".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .cantor import CantorOracle, CantorSpec, locate
from .errors import WitnessNotFound
from .intervals import Interval, IntervalSet, ZERO, as_rational
from .oracles import FiniteOracle, MeasureBounds, MeasureOracle, UnionOracle

ONE = Fraction(1)

MEMBER = "member"
NONMEMBER = "nonmember"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class DensityQuery:
    """One one-sided density question, kept for CSV emission."""

    x: Fraction
    r: Fraction
    side: str  # "left" | "right"
    gamma: Fraction
    delta: Fraction

    def __post_init__(self) -> None:
        if self.r <= 0 or self.delta <= 0:
            raise ValueError("scales must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")


def side_window(x: Fraction, r: Fraction, side: str) -> Interval:
    if side == "left":
        return Interval(x - r, x)
    if side == "right":
        return Interval(x, x + r)
    raise ValueError("side must be 'left' or 'right'")


def side_density(
    target: MeasureOracle, x: Fraction, r: Fraction, side: str, depth: int
) -> MeasureBounds:
    """Certified bounds on |window ∩ E| / r for a one-sided window."""
    x = as_rational(x)
    r = as_rational(r)
    if r <= 0:
        raise ValueError("scale r must be positive")
    return target.bounds(side_window(x, r, side), depth).scale(ONE / r)


# -- exact density-core membership for finite sets ---------------------------


@dataclass(frozen=True)
class EgdVerdict:
    status: str  # member | nonmember | unknown
    witness_r: Fraction | None = None
    witness_value: Fraction | None = None  # max-ratio at witness_r (the attained inf)

    def is_member(self) -> bool:
        return self.status == MEMBER


def _side_kinks(parts: IntervalSet, x: Fraction, side: str, delta: Fraction) -> list[Fraction]:
    out = set()
    for p in parts.parts:
        for e in (p.lo, p.hi):
            r = x - e if side == "left" else e - x
            if ZERO < r < delta:
                out.add(r)
    return sorted(out)


def _side_measure(parts: IntervalSet, x: Fraction, r: Fraction, side: str) -> Fraction:
    return parts.measure_in(side_window(x, r, side))


def egd_min_ratio(
    parts: IntervalSet,
    x: Fraction,
    delta: Fraction,
    r_floor: Fraction = ZERO,
) -> tuple[Fraction, Fraction]:
    """Exact (min value, attaining r) of max(left ratio, right ratio) over
    (r_floor, delta]; r_floor = 0 gives the full core range.

    Candidates per affine segment: its right endpoint, its left endpoint
    when the range is clipped, and the crossing of the two ratio curves.
    """
    x = as_rational(x)
    delta = as_rational(delta)
    if delta <= r_floor:
        raise ValueError("empty scale range")
    kinks = sorted(
        set(_side_kinks(parts, x, "left", delta))
        | set(_side_kinks(parts, x, "right", delta))
    )
    grid = [r for r in kinks if r > r_floor] + [delta]
    grid = sorted(set(grid))

    best_val: Fraction | None = None
    best_r: Fraction | None = None

    def consider(r: Fraction) -> None:
        nonlocal best_val, best_r
        vl = _side_measure(parts, x, r, "left") / r
        vr = _side_measure(parts, x, r, "right") / r
        v = max(vl, vr)
        if best_val is None or v < best_val:
            best_val, best_r = v, r

    prev = r_floor
    l_prev = _side_measure(parts, x, prev, "left") if prev > 0 else ZERO
    r_prev = _side_measure(parts, x, prev, "right") if prev > 0 else ZERO
    if prev > 0:
        consider(prev)
    for rb in grid:
        l_b = _side_measure(parts, x, rb, "left")
        r_b = _side_measure(parts, x, rb, "right")
        width = rb - prev
        s_l = (l_b - l_prev) / width
        s_r = (r_b - r_prev) / width
        c_l = l_b - s_l * rb
        c_r = r_b - s_r * rb
        consider(rb)
        if s_l != s_r:
            cross = (c_l - c_r) / (s_r - s_l)
            if prev < cross < rb:
                consider(cross)
        prev, l_prev, r_prev = rb, l_b, r_b
    assert best_val is not None and best_r is not None
    return best_val, best_r


def egd_member(
    parts: IntervalSet, x: Fraction, gamma: Fraction, delta: Fraction
) -> EgdVerdict:
    """Exact two-valued core membership for a finite set.

    The verdict carries the minimizing scale: for a nonmember it is a
    witness r in (0, delta] whose max-ratio falls below gamma, for a
    member it is where the certified infimum is attained.
    """
    gamma = as_rational(gamma)
    delta = as_rational(delta)
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if delta <= 0:
        raise ValueError("delta must be positive")
    value, r = egd_min_ratio(parts, as_rational(x), delta)
    status = MEMBER if value >= gamma else NONMEMBER
    return EgdVerdict(status, witness_r=r, witness_value=value)


def nonmember_radius(verdict: EgdVerdict, gamma: Fraction) -> Fraction:
    """Certified nonmembership neighborhood radius from a witness.

    Shifting x by h changes each one-sided measure by at most h, hence each
    ratio at the witness scale by at most h / witness_r; any |x' - x| below
    the returned radius keeps the max-ratio under gamma.
    """
    if verdict.status != NONMEMBER:
        raise ValueError("radius only defined for nonmember verdicts")
    assert verdict.witness_r is not None and verdict.witness_value is not None
    return verdict.witness_r * (gamma - verdict.witness_value)


# -- inner/outer core region for finite sets ---------------------------------


@dataclass(frozen=True)
class RegionResult:
    inner: IntervalSet
    outer: IntervalSet
    uncertain_measure: Fraction
    converged: bool
    rounds: int


def _in_part_floor(part: Interval, u: Fraction, v: Fraction) -> Fraction:
    """min over x in [u, v] of max(x - part.lo, part.hi - x)."""
    mid = part.midpoint
    probe = min(max(mid, u), v)
    values = [max(t - part.lo, part.hi - t) for t in (u, v, probe)]
    return min(values)


def egd_region(
    parts: IntervalSet,
    gamma: Fraction,
    delta: Fraction,
    window: Interval,
    resolution: Fraction,
    max_rounds: int = 4096,
) -> RegionResult:
    """Sandwich the core between inner and outer interval sets.

    Membership at positive gamma forces x into the closed set itself, so
    the outer estimate starts at E ∩ window.  Inner certification layers
    two exact arguments: inside a part, the roomier side keeps the ratio
    at least min(1, room/r), which settles every scale up to room/gamma;
    the remaining scale range is settled by sampling a midpoint and
    spending its exact margin on a shift bound.  Uncertain pieces shrink
    by bisection and by certified nonmember neighborhoods until their
    total measure drops under resolution * |window|.
    """
    gamma = as_rational(gamma)
    delta = as_rational(delta)
    resolution = as_rational(resolution)
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    goal = resolution * window.length

    inner: list[Interval] = []
    pending: list[tuple[Interval, Interval]] = []  # (piece, host part)
    for part in parts.parts:
        piece = part.clip(window)
        if piece is None:
            continue
        room = gamma * delta
        band_lo, band_hi = part.hi - room, part.lo + room
        if band_lo < band_hi:  # short part: a middle band stays uncertain
            left = Interval(piece.lo, min(piece.hi, band_lo)) if piece.lo < band_lo else None
            right = Interval(max(piece.lo, band_hi), piece.hi) if band_hi < piece.hi else None
            for cert in (left, right):
                if cert is not None and cert.length > 0:
                    inner.append(cert)
            unc_lo = max(piece.lo, band_lo)
            unc_hi = min(piece.hi, band_hi)
            if unc_lo < unc_hi:
                pending.append((Interval(unc_lo, unc_hi), part))
        else:
            inner.append(piece)

    rounds = 0
    while pending and rounds < max_rounds:
        total = sum((p.length for p, _ in pending), ZERO)
        if total <= goal:
            break
        rounds += 1
        pending.sort(key=lambda item: item[0].length)
        piece, host = pending.pop()
        u, v = piece.lo, piece.hi
        mid = piece.midpoint
        # (1) whole-piece membership certificate
        room = _in_part_floor(host, u, v)
        r0 = min(delta, room / gamma)
        if r0 >= delta:
            inner.append(piece)
            continue
        if r0 > 0:
            min_val, _ = egd_min_ratio(parts, mid, delta, r_floor=r0)
            h = piece.length / 2
            if min_val >= gamma + h / r0:
                inner.append(piece)
                continue
        # (2) certified nonmember neighborhood around the midpoint
        verdict = egd_member(parts, mid, gamma, delta)
        if verdict.status == NONMEMBER:
            rho = nonmember_radius(verdict, gamma) / 2
            if rho > 0:
                cut_lo, cut_hi = max(u, mid - rho), min(v, mid + rho)
                if cut_lo > u:
                    pending.append((Interval(u, cut_lo), host))
                if cut_hi < v:
                    pending.append((Interval(cut_hi, v), host))
                continue
        # (3) bisect and retry
        pending.append((Interval(u, mid), host))
        pending.append((Interval(mid, v), host))

    uncertain = sum((p.length for p, _ in pending), ZERO)
    inner_set = IntervalSet(inner)
    outer_set = inner_set.union(IntervalSet([p for p, _ in pending]))
    return RegionResult(
        inner=inner_set,
        outer=outer_set,
        uncertain_measure=uncertain,
        converged=uncertain <= goal,
        rounds=rounds,
    )


# -- certificate sequences and checking ---------------------------------------


@dataclass(frozen=True)
class CertificateSeq:
    """Thresholds gamma_n increasing to 1 with scales delta_n decreasing."""

    gammas: tuple[Fraction, ...]
    deltas: tuple[Fraction, ...]
    labels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        gammas = tuple(as_rational(g) for g in self.gammas)
        deltas = tuple(as_rational(d) for d in self.deltas)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "deltas", deltas)
        if len(gammas) != len(deltas) or not gammas:
            raise ValueError("gamma and delta lists must be nonempty, same length")
        if any(b <= a for a, b in zip(gammas, gammas[1:])):
            raise ValueError("gamma values must be strictly increasing")
        if any(g > 1 for g in gammas):
            raise ValueError("gamma values must not exceed 1")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("delta values must be strictly decreasing")
        if any(d <= 0 for d in deltas):
            raise ValueError("delta values must be positive")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, len(gammas) + 1)))
        elif len(self.labels) != len(gammas):
            raise ValueError("labels must match the sequence length")

    def __len__(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_cantor_params(
        cls, spec: CantorSpec, ns: Sequence[int], tail_depth: int
    ) -> "CertificateSeq":
        """Certificate rows derived from the construction's stage data,
        taking the conservative (lower) end of each gamma enclosure."""
        from .cantor import params as cantor_params

        gammas = []
        deltas = []
        for n in ns:
            p = cantor_params(spec, n, tail_depth)
            gammas.append(p.gamma.lower)
            deltas.append(p.delta)
        return cls(tuple(gammas), tuple(deltas), labels=tuple(ns))


def _dyadic_nonmember_scan(
    target: MeasureOracle, x: Fraction, gamma: Fraction, delta: Fraction, depth: int
) -> Fraction | None:
    """Search dyadic scales for one where both side-density upper bounds
    drop below gamma: a certified exclusion witness."""
    r = delta
    for _ in range(depth + 1):
        left = side_density(target, x, r, "left", depth)
        right = side_density(target, x, r, "right", depth)
        if max(left.upper, right.upper) < gamma:
            return r
        r = r / 2
    return None


@lru_cache(maxsize=1024)
def _ladder_certified(
    spec: CantorSpec, gamma: Fraction, delta: Fraction, depth: int, tail_depth: int
) -> bool:
    """Certify that every point of the limit set (pinned to a construction
    endpoint by `depth`) satisfies the one-sided density condition at
    threshold gamma for every scale in (0, delta].

    Scales are covered in bands [d_{m+1}, d_m].  Within a band, the window
    on the point's roomier side sits inside its stage-m interval, whose
    uncovered mass is at most (1 - beta_m) * d_m; the band is certified by
    1 - u_m * d_m / d_{m+1} >= gamma with u_m an exact upper bound on
    1 - beta_m.  When a band can exceed the roomier radius (possible while
    the point is not yet pinned to an endpoint), the parent level covers
    the slack at twice the cost.  Below d_depth the point is an exact
    endpoint, levels are uniform, and a single supremum check closes the
    tail.
    """
    alpha = spec.alpha
    if tail_depth < depth + 2:
        tail_depth = depth + 2
    d = spec.d_sequence(tail_depth)
    if delta > d[0] / 2:
        return False  # windows may leave the base; no certificate at this scale

    # u[m]: exact upper bound on 1 - prod_{k>m}(1 - alpha_k)
    beta_tail = alpha.tail_sum(tail_depth)
    u: list[Fraction] = []
    for m in range(depth + 1):
        prod = ONE
        for k in range(m + 1, tail_depth + 1):
            prod *= 1 - alpha.alpha(k)
        u.append(1 - max(ZERO, prod * (1 - beta_tail)))

    m0 = None
    for m in range(1, depth + 1):
        if d[m] <= delta:
            m0 = m
            break
    if m0 is None:
        return False  # depth too small to reach the requested scale

    for m in range(m0 - 1, depth):
        band_hi = min(d[m], delta)
        if d[m + 1] > band_hi:
            continue
        if u[m] * d[m] / d[m + 1] > 1 - gamma:
            return False
        if band_hi > d[m] / 2:
            # the scale may exceed the roomier side; fall back to level m-1
            if m == 0:
                return False
            if 2 * u[m - 1] * d[m - 1] / d[m] > 1 - gamma:
                return False

    # residual scales below d_depth: the point is an endpoint, the window
    # on its interval side is governed by uniform level bounds
    sup_alpha = alpha.alpha_sup_after(depth)
    factor = 2 / (1 - sup_alpha)
    if u[depth] * factor > 1 - gamma:
        return False
    return True


def _point_status(
    target: MeasureOracle, x: Fraction, gamma: Fraction, delta: Fraction, depth: int
) -> str:
    if gamma <= 0:
        return MEMBER  # vacuous threshold
    if isinstance(target, FiniteOracle):
        return egd_member(target.parts, x, gamma, delta).status
    if isinstance(target, CantorOracle):
        loc = locate(target.spec, x, depth)
        if loc.kind in ("gap", "outside"):
            # both one-sided windows empty at small scales: certified out
            return NONMEMBER
        if loc.kind == "endpoint":
            if _ladder_certified(target.spec, gamma, delta, depth, depth + 4):
                return MEMBER
            return UNKNOWN
        return UNKNOWN
    if isinstance(target, UnionOracle):
        # membership against any member certifies membership for the union
        for member in target.members:
            if _point_status(member, x, gamma, delta, depth) == MEMBER:
                return MEMBER
        if _dyadic_nonmember_scan(target, x, gamma, delta, depth) is not None:
            return NONMEMBER
        return UNKNOWN
    # unknown oracle type: fall back to bounds-based exclusion only
    if _dyadic_nonmember_scan(target, x, gamma, delta, depth) is not None:
        return NONMEMBER
    return UNKNOWN


def _aggregate(statuses: Sequence[str], exists: bool) -> str:
    """Three-valued exists/forall over per-index statuses."""
    if exists:
        if any(s == MEMBER for s in statuses):
            return "pass"
        if all(s == NONMEMBER for s in statuses):
            return "fail"
        return UNKNOWN
    if all(s == MEMBER for s in statuses):
        return "pass"
    if any(s == NONMEMBER for s in statuses):
        return "fail"
    return UNKNOWN


@dataclass(frozen=True)
class PointCertificate:
    x: Fraction
    statuses: tuple[str, ...]  # per certificate index
    udt: dict
    sudt: dict


@dataclass(frozen=True)
class CertificateReport:
    points: tuple[PointCertificate, ...]
    k_range: tuple[int, ...]
    sudt_implies_udt: bool

    def all_sudt_pass(self, k: int) -> bool:
        return all(p.sudt[k] == "pass" for p in self.points)

    def all_member(self) -> bool:
        return all(all(s == MEMBER for s in p.statuses) for p in self.points)


def certificate_check(
    points: Iterable[Fraction],
    target: MeasureOracle,
    cert: CertificateSeq,
    k_range: Sequence[int],
    depth: int,
) -> CertificateReport:
    """Per point: three-valued core membership along the certificate, then
    tail quantifiers per k: UDT asks for some index >= k certified in, SUDT
    for all of them.  A SUDT pass forces a UDT pass structurally; the
    report records that the implication held on this data.
    """
    ks = tuple(k_range)
    if any(k < 1 or k > len(cert) for k in ks):
        raise ValueError("k_range entries must index the certificate (1-based)")
    rows: list[PointCertificate] = []
    implication_ok = True
    for x in points:
        x = as_rational(x)
        statuses = tuple(
            _point_status(target, x, g, d, depth)
            for g, d in zip(cert.gammas, cert.deltas)
        )
        udt = {k: _aggregate(statuses[k - 1 :], exists=True) for k in ks}
        sudt = {k: _aggregate(statuses[k - 1 :], exists=False) for k in ks}
        for k in ks:
            if sudt[k] == "pass" and udt[k] != "pass":
                implication_ok = False
        rows.append(PointCertificate(x, statuses, udt, sudt))
    return CertificateReport(tuple(rows), ks, implication_ok)


# -- weak nowhere density witness ---------------------------------------------


def wnd_witness(
    target: MeasureOracle,
    window: Interval,
    alpha: Fraction,
    depth: int,
    max_splits: int = 20,
) -> Interval:
    """Find I inside `window` with certified |I ∩ E| < alpha * |I|.

    Breadth-first bisection on oracle upper bounds; raises WitnessNotFound
    when the split budget runs out (the set may simply have full measure
    in every tested subinterval, or the depth may be too small).
    """
    alpha = as_rational(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    queue = [window]
    for _ in range(max_splits):
        next_queue: list[Interval] = []
        for cand in queue:
            if target.bounds(cand, depth).upper < alpha * cand.length:
                return cand
            mid = cand.midpoint
            next_queue.append(Interval(cand.lo, mid))
            next_queue.append(Interval(mid, cand.hi))
        queue = next_queue
    raise WitnessNotFound(
        f"no subinterval with relative mass under {alpha} found in {window} "
        f"after {max_splits} split rounds at depth {depth}"
    )


# -- one-sided density failure demonstration ----------------------------------


@dataclass(frozen=True)
class FailureHit:
    x: Fraction
    h_left: Fraction
    h_right: Fraction
    left_upper: Fraction
    right_upper: Fraction


def onesided_failure_scan(
    target: MeasureOracle,
    candidates: Sequence[Fraction],
    scales: Sequence[Fraction],
    threshold: Fraction,
    depth: int,
) -> list[FailureHit]:
    """Audit candidates for simultaneous one-sided density failure.

    A hit is a candidate with audited scales on both sides whose certified
    density upper bounds fall below the threshold.  An empty result is a
    valid outcome, not an error: this is a finite-scale demonstration
    search, not a completeness claim.
    """
    threshold = as_rational(threshold)
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    hits: list[FailureHit] = []
    for x in candidates:
        x = as_rational(x)
        found_left: tuple[Fraction, Fraction] | None = None
        found_right: tuple[Fraction, Fraction] | None = None
        for h in scales:
            h = as_rational(h)
            if h <= 0:
                continue
            if found_left is None:
                ub = side_density(target, x, h, "left", depth).upper
                if ub < threshold:
                    found_left = (h, ub)
            if found_right is None:
                ub = side_density(target, x, h, "right", depth).upper
                if ub < threshold:
                    found_right = (h, ub)
            if found_left and found_right:
                break
        if found_left and found_right:
            hits.append(
                FailureHit(x, found_left[0], found_right[0], found_left[1], found_right[1])
            )
    return hits


def alternating_gap_candidates(
    spec: CantorSpec, depth: int
) -> tuple[list[Fraction], list[Fraction]]:
    """Candidate points hugging removed gaps from alternating sides.

    Walking the construction tree right-left-right-... parks the running
    interval's endpoint next to a removed middle gap whose side alternates
    with the level, so the endpoint of the interval after an L-step fails
    right-density at that gap's scale while the preceding R-step leaves a
    large gap within left reach.  Returns (candidates, scale pool); the
    scale pool collects every adjacent gap length and gap-plus-offset
    distance the walk encounters.
    """
    d = spec.d_sequence(depth)
    candidates: list[Fraction] = []
    scales: set[Fraction] = set()

    for first_right in (True, False):
        lo, hi = spec.base.lo, spec.base.hi
        go_right = first_right
        for level in range(1, depth + 1):
            gap_len = d[level - 1] - 2 * d[level]
            if gap_len <= 0:
                break
            gap_lo = lo + d[level]
            gap_hi = hi - d[level]
            if go_right:
                lo, hi = hi - d[level], hi
                # the removed gap sits immediately left of the new interval
                scales.add(gap_len)
                scales.add(lo - gap_lo)
            else:
                lo, hi = lo, lo + d[level]
                scales.add(gap_len)
                scales.add(gap_hi - hi)
            if level >= 2:
                # interval endpoints adjacent to the most recent gap
                candidates.append(lo)
                candidates.append(hi)
                scales.add(hi - gap_lo)
                scales.add(gap_hi - lo)
            go_right = not go_right

    # dedupe, keep deterministic order
    seen = set()
    uniq: list[Fraction] = []
    for c in candidates:
        if c not in seen:
            seen.add(c)
            uniq.append(c)
    return uniq, sorted(s for s in scales if s > 0)
