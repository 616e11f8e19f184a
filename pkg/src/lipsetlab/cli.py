"""Command-line front end.

Subcommands mirror the library: `set` for interval algebra, `cantor` for
middle-interval constructions and packings, `density` for density-core
queries, `pl` for piecewise-linear oscillation calculus, `build` for the
staged construction, `check` for the acceptance battery.

Outputs are machine-readable (JSON or CSV, `--format`), carry the seed of
any randomized run, and print rationals exactly; decimal columns are
labeled approximate.  Exit status: 0 on success, 1 on verification
failure or exhausted budget, 2 on usage errors or malformed inputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from typing import Any, Sequence

from .acceptance import run_acceptance
from .builder import BuildKnobs, build_stages, limit_function, verify_conditions
from .cantor import (
    AlphaRule,
    CantorOracle,
    CantorSpec,
    gap_report,
    pack,
    params,
    stage,
)
from .density import (
    CertificateSeq,
    alternating_gap_candidates,
    certificate_check,
    egd_member,
    egd_region,
    onesided_failure_scan,
    side_density,
    wnd_witness,
)
from .errors import BudgetExceeded, GapsExhausted, GuardUnsatisfiable, WitnessNotFound
from .intervals import Interval, IntervalSet, combine
from .oracles import FiniteOracle
from .plfuncs import growth_check, lip_pl, lip_profile, mf, sup_norm_diff
from .serialize import (
    SpecFormatError,
    dump_json,
    interval_to_json,
    intervalset_from_json,
    intervalset_to_json,
    load_json,
    oracle_from_json,
    packed_to_json,
    plfunction_from_json,
    plfunction_to_json,
    rat_from_obj,
    rat_to_str,
    write_csv,
)

DEFAULT_DEPTH = 12


def _env_depth() -> int:
    raw = os.environ.get("LIPSETLAB_DEFAULT_DEPTH")
    if raw is None:
        return DEFAULT_DEPTH
    try:
        value = int(raw)
    except ValueError as exc:
        raise SpecFormatError(f"LIPSETLAB_DEFAULT_DEPTH: {raw!r} is not an integer") from exc
    if value < 0:
        raise SpecFormatError("LIPSETLAB_DEFAULT_DEPTH must be nonnegative")
    return value


def _parse_rat(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecFormatError(f"{what}: {text!r} is not a rational") from exc


def _parse_window(text: str) -> Interval:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise SpecFormatError(f"window {text!r}: expected lo:hi")
    return Interval(_parse_rat(lo, "window lo"), _parse_rat(hi, "window hi"))


def _parse_alpha(text: str) -> AlphaRule:
    """geom:first,ratio gives alpha_k = first * ratio^(k-1);
    list:a1,a2,...[;tail:c,q] gives an explicit head plus optional tail."""
    if text.startswith("geom:"):
        parts = text[5:].split(",")
        if len(parts) != 2:
            raise SpecFormatError("alpha geom form needs first,ratio")
        return AlphaRule.geometric(
            _parse_rat(parts[0], "alpha first"), _parse_rat(parts[1], "alpha ratio")
        )
    if text.startswith("list:"):
        body, _, tail = text[5:].partition(";tail:")
        head = tuple(
            _parse_rat(t, "alpha entry") for t in body.split(",") if t
        )
        if tail:
            c_txt, sep, q_txt = tail.partition(",")
            if not sep:
                raise SpecFormatError("alpha tail needs c,q")
            return AlphaRule(
                head, _parse_rat(c_txt, "tail c"), _parse_rat(q_txt, "tail q")
            )
        return AlphaRule(head)
    raise SpecFormatError(f"alpha {text!r}: expected geom:... or list:...")


def _parse_rat_list(text: str, what: str) -> list[Fraction]:
    return [_parse_rat(t, what) for t in text.split(",") if t]


def _out_stream(args) -> Any:
    if args.out and args.out != "-":
        return open(args.out, "w")
    return sys.stdout


def _emit(args, payload: dict, rows: tuple[list[str], list[list[Any]]] | None = None) -> None:
    fh = _out_stream(args)
    try:
        if args.format == "csv":
            if rows is None:
                raise SpecFormatError("this command has no CSV form; use --format json")
            write_csv(fh, rows[0], rows[1])
        else:
            dump_json(payload, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()


# -- subcommand handlers -------------------------------------------------------


def _cmd_set(args) -> int:
    if args.action in ("union", "intersection", "difference", "symdiff"):
        a = intervalset_from_json(load_json(args.infile), "in")
        b = intervalset_from_json(load_json(args.infile2), "in2")
        if args.action == "symdiff":
            from .intervals import symdiff_measure

            value = symdiff_measure(a, b)
            print(rat_to_str(value))
            return 0
        result = combine(args.action, a, b)
        _emit(
            args,
            {"set": intervalset_to_json(result)},
            (["lo", "hi"], [[p.lo, p.hi] for p in result.parts]),
        )
        return 0
    if args.action == "measure":
        s = intervalset_from_json(load_json(args.infile), "in")
        value = s.measure_in(args.window) if args.window else s.measure()
        print(rat_to_str(value))
        return 0
    if args.action == "normalize":
        s = intervalset_from_json(load_json(args.infile), "in")
        _emit(
            args,
            {"set": intervalset_to_json(s)},
            (["lo", "hi"], [[p.lo, p.hi] for p in s.parts]),
        )
        return 0
    raise SpecFormatError(f"unknown set action {args.action!r}")


def _cmd_cantor(args) -> int:
    if args.action == "stage":
        spec = CantorSpec(args.alpha, args.base)
        result = stage(spec, args.n)
        _emit(
            args,
            {"n": args.n, "parts": intervalset_to_json(result),
             "measure": rat_to_str(result.measure())},
            (["lo", "hi"], [[p.lo, p.hi] for p in result.parts]),
        )
        return 0
    if args.action == "params":
        spec = CantorSpec(args.alpha, args.base)
        tail_depth = args.tail_depth or max(args.depth, args.n + 2)
        ns = range(1, args.n + 1) if args.all else [args.n]
        rows = []
        payload = []
        for n in ns:
            p = params(spec, n, tail_depth)
            rows.append(
                [p.n, p.part_length, p.stage_measure, p.beta.lower, p.beta.upper,
                 p.gamma.lower, p.gamma.upper, p.delta, p.d_ratio_ok, p.r_range_ok]
            )
            payload.append(
                {"n": p.n, "part_length": rat_to_str(p.part_length),
                 "stage_measure": rat_to_str(p.stage_measure),
                 "beta": [rat_to_str(p.beta.lower), rat_to_str(p.beta.upper)],
                 "gamma": [rat_to_str(p.gamma.lower), rat_to_str(p.gamma.upper)],
                 "delta": rat_to_str(p.delta),
                 "d_ratio_ok": p.d_ratio_ok, "r_range_ok": p.r_range_ok}
            )
        _emit(
            args,
            {"tail_depth": tail_depth, "rows": payload},
            (
                ["n", "d_n", "stage_measure", "beta_lower", "beta_upper",
                 "gamma_lower", "gamma_upper", "delta", "d_ratio_ok", "r_range_ok"],
                rows,
            ),
        )
        return 0
    if args.action == "pack":
        packed, _oracle = pack(args.n, args.policy, args.depth)
        _emit(args, packed_to_json(packed))
        return 0
    if args.action == "gap-report":
        packed, _oracle = pack(args.n, args.policy, args.depth)
        level = args.level or args.n
        report = gap_report(packed, level, args.depth)
        worst = max((r.ratio_upper for r in report), default=Fraction(0))
        _emit(
            args,
            {"level": level, "worst_ratio_upper": rat_to_str(worst),
             "gaps": [
                 {"gap": interval_to_json(r.gap),
                  "ratio_upper": rat_to_str(r.ratio_upper),
                  "future_allowance": rat_to_str(r.future_allowance)}
                 for r in report
             ]},
            (
                ["gap_lo", "gap_hi", "ratio_upper", "future_allowance"],
                [[r.gap.lo, r.gap.hi, r.ratio_upper, r.future_allowance] for r in report],
            ),
        )
        return 0 if worst < Fraction(1, 2) else 1
    raise SpecFormatError(f"unknown cantor action {args.action!r}")


def _cmd_density(args) -> int:
    if args.action == "side":
        oracle = oracle_from_json(load_json(args.oracle), "oracle")
        b = side_density(oracle, args.x, args.r, args.side, args.depth)
        _emit(
            args,
            {"x": rat_to_str(args.x), "r": rat_to_str(args.r), "side": args.side,
             "lower": rat_to_str(b.lower), "upper": rat_to_str(b.upper)},
            (["x", "r", "side", "lower", "upper"],
             [[args.x, args.r, args.side, b.lower, b.upper]]),
        )
        return 0
    if args.action == "egd":
        parts = intervalset_from_json(load_json(args.setfile), "set")
        verdict = egd_member(parts, args.x, args.gamma, args.delta)
        _emit(
            args,
            {"x": rat_to_str(args.x), "status": verdict.status,
             "witness_r": rat_to_str(verdict.witness_r),
             "witness_value": rat_to_str(verdict.witness_value),
             "witness_convention": "attained minimum over the closed scale range"},
        )
        return 0
    if args.action == "region":
        parts = intervalset_from_json(load_json(args.setfile), "set")
        result = egd_region(parts, args.gamma, args.delta, args.window, args.resolution)
        _emit(
            args,
            {"inner": intervalset_to_json(result.inner),
             "outer": intervalset_to_json(result.outer),
             "uncertain_measure": rat_to_str(result.uncertain_measure),
             "converged": result.converged},
        )
        return 0 if result.converged else 1
    if args.action == "certificate":
        oracle = oracle_from_json(load_json(args.oracle), "oracle")
        cert = CertificateSeq(tuple(args.gammas), tuple(args.deltas))
        points = args.points
        ks = [int(k) for k in args.k.split(",")] if args.k else [1]
        report = certificate_check(points, oracle, cert, ks, args.depth)
        rows = []
        for p in report.points:
            for k in report.k_range:
                rows.append([p.x, k, p.udt[k], p.sudt[k], " ".join(p.statuses)])
        _emit(
            args,
            {"k_range": list(report.k_range),
             "sudt_implies_udt": report.sudt_implies_udt,
             "points": [
                 {"x": rat_to_str(p.x), "statuses": list(p.statuses),
                  "udt": {str(k): v for k, v in p.udt.items()},
                  "sudt": {str(k): v for k, v in p.sudt.items()}}
                 for p in report.points
             ]},
            (["x", "k", "udt", "sudt", "statuses"], rows),
        )
        return 0
    if args.action == "wnd":
        oracle = oracle_from_json(load_json(args.oracle), "oracle")
        witness = wnd_witness(oracle, args.window, args.alpha_frac, args.depth)
        _emit(args, {"witness": interval_to_json(witness)})
        return 0
    if args.action == "onesided-scan":
        spec = CantorSpec(args.alpha, args.base)
        candidates, scales = alternating_gap_candidates(spec, args.depth)
        hits = onesided_failure_scan(
            CantorOracle(spec), candidates, scales, args.threshold, args.depth
        )
        _emit(
            args,
            {"candidates": len(candidates), "hits": [
                {"x": rat_to_str(h.x), "h_left": rat_to_str(h.h_left),
                 "h_right": rat_to_str(h.h_right),
                 "left_upper": rat_to_str(h.left_upper),
                 "right_upper": rat_to_str(h.right_upper)}
                for h in hits
            ]},
            (["x", "h_left", "h_right", "left_upper", "right_upper"],
             [[h.x, h.h_left, h.h_right, h.left_upper, h.right_upper] for h in hits]),
        )
        return 0 if hits else 1
    raise SpecFormatError(f"unknown density action {args.action!r}")


def _cmd_pl(args) -> int:
    if args.action == "eval":
        f = plfunction_from_json(load_json(args.f), "f")
        print(rat_to_str(f(args.x)))
        return 0
    if args.action == "mf":
        f = plfunction_from_json(load_json(args.f), "f")
        print(rat_to_str(mf(f, args.x, args.r)))
        return 0
    if args.action == "lip":
        f = plfunction_from_json(load_json(args.f), "f")
        print(rat_to_str(lip_pl(f, args.x)))
        return 0
    if args.action == "profile":
        f = plfunction_from_json(load_json(args.f), "f")
        prof = lip_profile(f, args.x, args.r_list)
        _emit(
            args,
            {"x": rat_to_str(args.x),
             "profile": [[rat_to_str(r), rat_to_str(v)] for r, v in prof]},
            (["x", "r", "value"], [[args.x, r, v] for r, v in prof]),
        )
        return 0
    if args.action == "norm":
        f = plfunction_from_json(load_json(args.f), "f")
        g = plfunction_from_json(load_json(args.g), "g")
        print(rat_to_str(sup_norm_diff(f, g)))
        return 0
    if args.action == "growth":
        f = plfunction_from_json(load_json(args.f), "f")
        oracle = oracle_from_json(load_json(args.oracle), "oracle")
        pairs = []
        for chunk in args.pairs.split(","):
            lo, sep, hi = chunk.partition(":")
            if not sep:
                raise SpecFormatError(f"pair {chunk!r}: expected x:y")
            pairs.append((_parse_rat(lo, "pair x"), _parse_rat(hi, "pair y")))
        rows = growth_check(f, oracle, pairs, args.depth)
        violations = sum(1 for r in rows if r.status == "violation")
        _emit(
            args,
            {"violations": violations, "rows": [
                {"x": rat_to_str(r.x), "y": rat_to_str(r.y),
                 "diff": rat_to_str(r.diff), "mass_lower": rat_to_str(r.mass_lower),
                 "mass_upper": rat_to_str(r.mass_upper), "status": r.status}
                for r in rows
            ]},
            (["x", "y", "diff", "mass_lower", "mass_upper", "status"],
             [[r.x, r.y, r.diff, r.mass_lower, r.mass_upper, r.status] for r in rows]),
        )
        return 0 if violations == 0 else 1
    raise SpecFormatError(f"unknown pl action {args.action!r}")


def _cmd_build(args) -> int:
    oracle = oracle_from_json(load_json(args.oracle), "oracle")
    knobs = BuildKnobs(
        l_max=args.budget_l, k_max=args.budget_k, depth=args.depth
    )
    states = build_stages(oracle, args.window, args.stages, knobs=knobs)
    report = verify_conditions(states, oracle, seed=args.seed)
    f_limit, bound = limit_function(states)
    payload = {
        "seed": args.seed,
        "window": interval_to_json(args.window),
        "depth": args.depth,
        "stages": [
            {
                "n": st.n,
                "cover": [interval_to_json(iv) for iv in st.g_intervals],
                "mesh_points": [rat_to_str(x) for x in st.d_points],
                "f": plfunction_to_json(st.f),
                "env_lower": plfunction_to_json(st.env_lower),
                "env_upper": plfunction_to_json(st.env_upper),
                "defect": rat_to_str(st.defect),
                "residues": [interval_to_json(iv) for iv in st.frozen.parts],
            }
            for st in states
        ],
        "conditions": {k: v.passed for k, v in report.results.items()},
        "limit_error_bound": rat_to_str(bound),
    }
    rows = (
        ["condition", "passed", "checked", "violations"],
        [[k, v.passed, v.checked, len(v.violations)] for k, v in report.results.items()],
    )
    _emit(args, payload, rows)
    for line in report.lines():
        print(line, file=sys.stderr)
    return 0 if report.passed() else 1


def _cmd_check(args) -> int:
    if args.suite != "acceptance":
        raise SpecFormatError(f"unknown suite {args.suite!r}")
    results = run_acceptance(seed=args.seed)
    for r in results:
        print(r.line())
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            dump_json(
                {"seed": args.seed,
                 "criteria": [
                     {"number": r.number, "name": r.name, "passed": r.passed,
                      "runtime_s": round(r.runtime, 3), "limit_s": r.limit,
                      "detail": r.detail}
                     for r in results
                 ]},
                fh,
            )
    return 0 if all(r.passed for r in results) else 1


# -- parser ---------------------------------------------------------------------


def _build_parser(default_depth: int) -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="lipsetlab",
        description="Exact interval-set measure calculus and density certificates",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--depth", type=int, default=default_depth)
        p.add_argument("--out", default="-")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("set", help="interval-set algebra")
    p.add_argument("action", choices=("union", "intersection", "difference",
                                      "measure", "symdiff", "normalize"))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--in2", dest="infile2")
    p.add_argument("--window", type=_parse_window)
    common(p)

    p = sub.add_parser("cantor", help="middle-interval constructions")
    p.add_argument("action", choices=("stage", "params", "pack", "gap-report"))
    p.add_argument("--alpha", type=_parse_alpha, default=_parse_alpha("geom:1/4,1/4"))
    p.add_argument("--base", type=_parse_window, default=Interval(0, 1))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tail-depth", type=int)
    p.add_argument("--all", action="store_true", help="emit rows for 1..n")
    p.add_argument("--policy", default="widest-gap-first")
    p.add_argument("--level", type=int, help="union level for gap-report")
    common(p)

    p = sub.add_parser("density", help="density cores and certificates")
    p.add_argument("action", choices=("side", "egd", "region", "certificate",
                                      "wnd", "onesided-scan"))
    p.add_argument("--oracle")
    p.add_argument("--set", dest="setfile")
    p.add_argument("--x", type=lambda t: _parse_rat(t, "x"))
    p.add_argument("--r", type=lambda t: _parse_rat(t, "r"))
    p.add_argument("--side", choices=("left", "right"), default="right")
    p.add_argument("--gamma", type=lambda t: _parse_rat(t, "gamma"))
    p.add_argument("--delta", type=lambda t: _parse_rat(t, "delta"))
    p.add_argument("--window", type=_parse_window)
    p.add_argument("--resolution", type=lambda t: _parse_rat(t, "resolution"),
                   default=Fraction(1, 64))
    p.add_argument("--gammas", type=lambda t: _parse_rat_list(t, "gammas"))
    p.add_argument("--deltas", type=lambda t: _parse_rat_list(t, "deltas"))
    p.add_argument("--points", type=lambda t: _parse_rat_list(t, "points"))
    p.add_argument("--k", help="comma-separated tail indices")
    p.add_argument("--alpha", type=_parse_alpha, default=_parse_alpha("geom:1/4,1/4"))
    p.add_argument("--alpha-frac", dest="alpha_frac",
                   type=lambda t: _parse_rat(t, "alpha"), default=Fraction(1, 2),
                   help="relative-mass threshold for wnd witnesses")
    p.add_argument("--base", type=_parse_window, default=Interval(0, 1))
    p.add_argument("--threshold", type=lambda t: _parse_rat(t, "threshold"),
                   default=Fraction(99, 100))
    common(p)

    p = sub.add_parser("pl", help="piecewise-linear oscillation calculus")
    p.add_argument("action", choices=("eval", "mf", "lip", "profile", "norm", "growth"))
    p.add_argument("--f", required=True)
    p.add_argument("--g")
    p.add_argument("--oracle")
    p.add_argument("--x", type=lambda t: _parse_rat(t, "x"))
    p.add_argument("--r", type=lambda t: _parse_rat(t, "r"))
    p.add_argument("--r-list", dest="r_list", type=lambda t: _parse_rat_list(t, "r-list"))
    p.add_argument("--pairs")
    common(p)

    p = sub.add_parser("build", help="staged 1-Lipschitz construction")
    p.add_argument("--oracle", required=True)
    p.add_argument("--window", type=_parse_window, required=True)
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--budget-k", type=int, default=3)
    p.add_argument("--budget-l", type=int, default=3)
    common(p)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("--suite", default="acceptance")
    common(p)

    return top


_VALUE_FLAGS = {
    "--x", "--r", "--gamma", "--delta", "--window", "--base", "--points",
    "--gammas", "--deltas", "--r-list", "--threshold", "--alpha-frac",
    "--resolution", "--pairs",
}


def _merge_negative_values(argv: Sequence[str]) -> list[str]:
    """Join value flags with arguments that start with '-' (e.g. --x -1/16),
    which argparse would otherwise read as another option."""
    out: list[str] = []
    i = 0
    items = list(argv)
    while i < len(items):
        tok = items[i]
        if tok in _VALUE_FLAGS and i + 1 < len(items) and items[i + 1].startswith("-") \
                and len(items[i + 1]) > 1 and items[i + 1] != "-":
            out.append(f"{tok}={items[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    try:
        parser = _build_parser(_env_depth())
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(_merge_negative_values(sys.argv[1:] if argv is None else argv))
    handlers = {
        "set": _cmd_set,
        "cantor": _cmd_cantor,
        "density": _cmd_density,
        "pl": _cmd_pl,
        "build": _cmd_build,
        "check": _cmd_check,
    }
    try:
        return handlers[args.command](args)
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (WitnessNotFound, GuardUnsatisfiable, BudgetExceeded, GapsExhausted) as exc:
        print(f"partial result: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
