"""JSON and CSV codecs shared by every module and the CLI.

Rationals travel as exact "p/q" strings (plain integers allowed); interval
sets are arrays of [lo, hi] pairs.  Decimal columns in CSV output are a
display convenience only and are labeled approximate: every stored and
compared value is an exact rational.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Any, IO, Sequence

from .cantor import AlphaRule, CantorOracle, CantorSpec, PackedSpec
from .intervals import Interval, IntervalSet
from .oracles import FiniteOracle, MeasureOracle, UnionOracle
from .plfuncs import PLFunction


class SpecFormatError(ValueError):
    """Malformed input document; the message carries the JSON location."""


def rat_to_str(value: Fraction) -> str:
    return str(value)


def rat_from_obj(obj: Any, where: str = "value") -> Fraction:
    if isinstance(obj, bool) or not isinstance(obj, (int, str)):
        raise SpecFormatError(f"{where}: expected an int or 'p/q' string, got {obj!r}")
    try:
        return Fraction(obj)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecFormatError(f"{where}: not a rational: {obj!r} ({exc})") from exc


def interval_to_json(iv: Interval) -> list[str]:
    return [rat_to_str(iv.lo), rat_to_str(iv.hi)]


def interval_from_json(obj: Any, where: str = "interval") -> Interval:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise SpecFormatError(f"{where}: expected [lo, hi]")
    lo = rat_from_obj(obj[0], f"{where}[0]")
    hi = rat_from_obj(obj[1], f"{where}[1]")
    if lo > hi:
        raise SpecFormatError(f"{where}: lo > hi")
    return Interval(lo, hi)


def intervalset_to_json(s: IntervalSet) -> list[list[str]]:
    return [interval_to_json(p) for p in s.parts]


def intervalset_from_json(obj: Any, where: str = "set") -> IntervalSet:
    if not isinstance(obj, list):
        raise SpecFormatError(f"{where}: expected an array of [lo, hi] pairs")
    return IntervalSet(
        interval_from_json(item, f"{where}[{i}]") for i, item in enumerate(obj)
    )


def alpha_to_json(rule: AlphaRule) -> dict:
    out: dict[str, Any] = {"list": [rat_to_str(a) for a in rule.head]}
    if rule.tail_c > 0:
        out["tail"] = {"c": rat_to_str(rule.tail_c), "q": rat_to_str(rule.tail_q)}
    return out


def alpha_from_json(obj: Any, where: str = "alpha") -> AlphaRule:
    if not isinstance(obj, dict):
        raise SpecFormatError(f"{where}: expected an object")
    head = tuple(
        rat_from_obj(a, f"{where}.list[{i}]") for i, a in enumerate(obj.get("list", []))
    )
    tail = obj.get("tail")
    if tail is None:
        return AlphaRule(head=head)
    if not isinstance(tail, dict):
        raise SpecFormatError(f"{where}.tail: expected an object")
    c = rat_from_obj(tail.get("c", 0), f"{where}.tail.c")
    q = rat_from_obj(tail.get("q", 0), f"{where}.tail.q")
    try:
        return AlphaRule(head=head, tail_c=c, tail_q=q)
    except ValueError as exc:
        raise SpecFormatError(f"{where}: {exc}") from exc


def oracle_to_json(oracle: MeasureOracle) -> dict:
    if isinstance(oracle, FiniteOracle):
        return {"finite": intervalset_to_json(oracle.parts)}
    if isinstance(oracle, CantorOracle):
        return {
            "cantor": {
                "alpha": alpha_to_json(oracle.spec.alpha),
                "placement": interval_to_json(oracle.spec.base),
            }
        }
    if isinstance(oracle, UnionOracle):
        return {"union": [oracle_to_json(m) for m in oracle.members]}
    raise TypeError(f"cannot serialize oracle of type {type(oracle).__name__}")


def oracle_from_json(obj: Any, where: str = "oracle") -> MeasureOracle:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecFormatError(f"{where}: expected a single-variant object")
    (tag, payload), = obj.items()
    if tag == "finite":
        return FiniteOracle(intervalset_from_json(payload, f"{where}.finite"))
    if tag == "cantor":
        if not isinstance(payload, dict):
            raise SpecFormatError(f"{where}.cantor: expected an object")
        rule = alpha_from_json(payload.get("alpha", {}), f"{where}.cantor.alpha")
        placement = interval_from_json(
            payload.get("placement", ["0", "1"]), f"{where}.cantor.placement"
        )
        return CantorOracle(CantorSpec(rule, placement))
    if tag == "union":
        if not isinstance(payload, list) or not payload:
            raise SpecFormatError(f"{where}.union: expected a nonempty array")
        return UnionOracle(
            tuple(
                oracle_from_json(item, f"{where}.union[{i}]")
                for i, item in enumerate(payload)
            )
        )
    raise SpecFormatError(f"{where}: unknown variant {tag!r}")


def plfunction_to_json(f: PLFunction) -> list[list[str]]:
    return [[rat_to_str(x), rat_to_str(y)] for x, y in f.breakpoints()]


def plfunction_from_json(obj: Any, where: str = "function") -> PLFunction:
    if not isinstance(obj, list) or not obj:
        raise SpecFormatError(f"{where}: expected a nonempty array of [x, y] pairs")
    pts = []
    for i, item in enumerate(obj):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise SpecFormatError(f"{where}[{i}]: expected [x, y]")
        pts.append(
            (rat_from_obj(item[0], f"{where}[{i}][0]"), rat_from_obj(item[1], f"{where}[{i}][1]"))
        )
    return PLFunction(pts)


def packed_to_json(packed: PackedSpec) -> dict:
    return {
        "count": packed.count,
        "policy": packed.placement_policy,
        "depth": packed.depth,
        "base": interval_to_json(packed.base),
        "sets": [
            {"alpha": alpha_to_json(r), "placement": interval_to_json(p)}
            for r, p in zip(packed.rules, packed.placements)
        ],
    }


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise SpecFormatError(f"{path}: {exc}") from exc


def dump_json(obj: Any, fh: IO[str]) -> None:
    json.dump(obj, fh, indent=2, sort_keys=False)
    fh.write("\n")


def write_csv(fh: IO[str], header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """CSV with stable field order; Fractions become exact strings plus an
    adjacent approximate decimal column per rational field."""
    expanded: list[str] = []
    approx_cols: list[bool] = []
    if rows:
        sample = rows[0]
    else:
        sample = [None] * len(header)
    for name, value in zip(header, sample):
        expanded.append(name)
        if isinstance(value, Fraction):
            expanded.append(f"{name}_approx")
            approx_cols.append(True)
        else:
            approx_cols.append(False)
    writer = csv.writer(fh)
    writer.writerow(expanded)
    for row in rows:
        out: list[Any] = []
        for value, has_approx in zip(row, approx_cols):
            if isinstance(value, Fraction):
                out.append(rat_to_str(value))
                out.append(repr(float(value)))
            elif has_approx:
                out.append(str(value))
                out.append("")
            else:
                out.append(value)
        writer.writerow(out)
