"""Finite unions of closed intervals on the extended real line, and set limits.

Upper and lower limits of a set sequence are approximated on a finite
horizon of M terms: "infinitely many n" becomes "at least once in every
window of W + 1 consecutive tail terms" and "all but finitely many n" becomes
"every n from some tail start on". Terms are dilated by epsilon before
intersecting; the result is eroded by epsilon and snapped to a grid of
spacing 2 epsilon.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Any

TWO_GAP_FAMILIES = ("head", "even", "odd")
SEQUENCE_PRESETS = (
    "two_gap",
    *(f"two_gap_{family}" for family in TWO_GAP_FAMILIES),
    "connected",
)


@functools.total_ordering
class ExtendedInfinity:
    """The points +inf and -inf of the extended real line."""

    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = 1 if sign > 0 else -1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExtendedInfinity) and other.sign == self.sign

    def __lt__(self, other: object) -> bool:
        if isinstance(other, ExtendedInfinity):
            return self.sign < other.sign
        if isinstance(other, int | float):
            return self.sign < 0
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("ExtendedInfinity", self.sign))

    def __neg__(self) -> ExtendedInfinity:
        return NEG_INF if self.sign > 0 else POS_INF

    def __repr__(self) -> str:
        return "+inf" if self.sign > 0 else "-inf"


POS_INF = ExtendedInfinity(1)
NEG_INF = ExtendedInfinity(-1)

Endpoint = float | ExtendedInfinity


def endpoint(x: Any) -> Endpoint:
    """Coerce a number or an infinity spelling (+inf, -inf, .inf) to an endpoint."""
    if isinstance(x, ExtendedInfinity):
        return x
    if isinstance(x, str):
        text = x.strip().lower().lstrip(".")
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return POS_INF
        if text in ("-inf", "-infinity"):
            return NEG_INF
        x = float(x)
    value = float(x)
    if math.isnan(value):
        raise ValueError("Interval endpoints cannot be NaN")
    if math.isinf(value):
        return POS_INF if value > 0 else NEG_INF
    return value


def _shift(x: Endpoint, delta: float) -> Endpoint:
    return x if isinstance(x, ExtendedInfinity) else x + delta


def _snap(x: Endpoint, step: float) -> Endpoint:
    if isinstance(x, ExtendedInfinity):
        return x
    return round(round(x / step) * step, 12) + 0.0


def _fmt(x: Endpoint) -> str:
    return repr(x) if isinstance(x, ExtendedInfinity) else f"{x:g}"


# =============================================================================
# IntervalSet
# =============================================================================


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise disjoint closed intervals; touching intervals are merged."""

    intervals: tuple[tuple[Endpoint, Endpoint], ...] = ()

    @classmethod
    def of(cls, *pairs) -> IntervalSet:
        items = []
        for pair in pairs:
            lo, hi = (endpoint(x) for x in pair)
            if hi < lo:
                raise ValueError(f"Interval needs lo <= hi, got [{_fmt(lo)}, {_fmt(hi)}]")
            items.append((lo, hi))
        items.sort(key=lambda iv: (iv[0], iv[1]))
        merged: list[tuple[Endpoint, Endpoint]] = []
        for lo, hi in items:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return cls(tuple(merged))

    @classmethod
    def empty(cls) -> IntervalSet:
        return cls(())

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return " U ".join(f"[{_fmt(lo)}, {_fmt(hi)}]" for lo, hi in self.intervals)

    def union(self, other: IntervalSet) -> IntervalSet:
        return IntervalSet.of(*self.intervals, *other.intervals)

    def intersect(self, other: IntervalSet) -> IntervalSet:
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet.of(*out)

    __or__ = union
    __and__ = intersect

    def dilate(self, eps: float) -> IntervalSet:
        """Grow every interval by eps on both sides; infinite endpoints stay put."""
        if eps < 0:
            raise ValueError(f"Dilation radius must be >= 0, got {eps}")
        return IntervalSet.of(*((_shift(lo, -eps), _shift(hi, eps)) for lo, hi in self.intervals))

    def erode(self, eps: float) -> IntervalSet:
        """Shrink every interval by eps; intervals shorter than 2 eps disappear."""
        if eps < 0:
            raise ValueError(f"Erosion radius must be >= 0, got {eps}")
        out = []
        for lo, hi in self.intervals:
            lo2, hi2 = _shift(lo, eps), _shift(hi, -eps)
            if lo2 <= hi2:
                out.append((lo2, hi2))
        return IntervalSet.of(*out)

    def resolve(self, step: float) -> IntervalSet:
        """Snap finite endpoints to the nearest multiple of step."""
        if not step > 0:
            raise ValueError(f"Resolution step must be positive, got {step}")
        return IntervalSet.of(*((_snap(lo, step), _snap(hi, step)) for lo, hi in self.intervals))

    def contains(self, x) -> bool:
        x = endpoint(x)
        return any(lo <= x <= hi for lo, hi in self.intervals)

    __contains__ = contains

    def issubset(self, other: IntervalSet) -> bool:
        return all(
            any(olo <= lo and hi <= ohi for olo, ohi in other.intervals)
            for lo, hi in self.intervals
        )


def union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return a.union(b)


def intersect(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return a.intersect(b)


def dilate(a: IntervalSet, eps: float) -> IntervalSet:
    return a.dilate(eps)


def components(a: IntervalSet) -> list[IntervalSet]:
    """One single-interval set per maximal interval."""
    return [IntervalSet((iv,)) for iv in a.intervals]


def is_connected(a: IntervalSet) -> bool:
    return len(a) == 1


def is_unbounded(a: IntervalSet) -> bool:
    return any(
        isinstance(lo, ExtendedInfinity) or isinstance(hi, ExtendedInfinity)
        for lo, hi in a.intervals
    )


# =============================================================================
# Sequences and limits
# =============================================================================


@dataclass(frozen=True)
class SetSequence:
    terms: tuple[IntervalSet, ...]
    epsilon: float = 0.05
    window: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.window) != self.window or self.window < 1:
            raise ValueError(f"window must be an integer >= 1, got {self.window}")
        if len(self.terms) < 2 * self.window:
            raise ValueError(
                f"Need at least 2 * window = {2 * self.window} terms, got {len(self.terms)}"
            )

    @property
    def tail_start(self) -> int:
        return (len(self.terms) - self.window) // 2

    def _finish(self, result: IntervalSet) -> IntervalSet:
        return result.erode(self.epsilon).resolve(2.0 * self.epsilon)


def limsup_sets(seq: SetSequence) -> IntervalSet:
    """Points within epsilon of some term in every tail window of W + 1 terms."""
    grown = [t.dilate(seq.epsilon) for t in seq.terms]
    last_start = len(grown) - 1 - seq.window
    result = None
    for m in range(seq.tail_start, last_start + 1):
        window = functools.reduce(IntervalSet.union, grown[m : m + seq.window + 1])
        result = window if result is None else result & window
    return seq._finish(result)


def liminf_sets(seq: SetSequence) -> IntervalSet:
    """Points within epsilon of every term from some tail start on."""
    grown = [t.dilate(seq.epsilon) for t in seq.terms]
    last_start = min(seq.tail_start + seq.window, len(grown) - 1 - seq.window)
    result = IntervalSet.empty()
    for m in range(seq.tail_start, last_start + 1):
        result = result | functools.reduce(IntervalSet.intersect, grown[m:])
    return seq._finish(result)


# =============================================================================
# Shipped sequences
# =============================================================================


def two_gap_term(n: int) -> IntervalSet:
    """Term n >= 1 of the two-gap sequence.

    n = 1 gives [2, +inf]; even n = 2m gives [0, 1 + 1/2m] U [3, +inf]; odd
    n = 2m + 1 gives [0, 2 - 1/(2m+1)] U [3, +inf].
    """
    if n < 1:
        raise ValueError(f"Term index must be >= 1, got {n}")
    if n == 1:
        return IntervalSet.of((2.0, POS_INF))
    top = 1.0 + 1.0 / n if n % 2 == 0 else 2.0 - 1.0 / n
    return IntervalSet.of((0.0, top), (3.0, POS_INF))


def two_gap_sequence(terms: int = 40) -> list[IntervalSet]:
    """Terms 1..terms of the two-gap sequence.

    Upper limit [0, 2] U [3, +inf], lower limit [0, 1] U [3, +inf]; neither
    is connected.
    """
    return [two_gap_term(n) for n in range(1, terms + 1)]


def two_gap_family(family: str, terms: int = 40) -> list[IntervalSet]:
    """One closed-form family of the two-gap sequence for m = 1..terms.

    `head` repeats the first term, `even` takes term 2m and `odd` term 2m + 1.
    Each family converges on its own: [2, +inf], [0, 1] U [3, +inf] and
    [0, 2] U [3, +inf] are both its upper and its lower limit.
    """
    offsets = {"head": None, "even": 0, "odd": 1}
    if family not in offsets:
        raise ValueError(f"Unknown two-gap family {family!r} (expected one of {TWO_GAP_FAMILIES})")
    offset = offsets[family]
    if offset is None:
        return [two_gap_term(1)] * terms
    return [two_gap_term(2 * m + offset) for m in range(1, terms + 1)]


def connected_sequence(terms: int = 40) -> list[IntervalSet]:
    """C_n = [-1/n, +inf]: connected, unbounded, all containing 0."""
    return [IntervalSet.of((-1.0 / n, POS_INF)) for n in range(1, terms + 1)]


def _parse_term(raw) -> IntervalSet:
    if not isinstance(raw, list | tuple):
        raise ValueError(f"A sequence term must be a list of [lo, hi] pairs, got {raw!r}")
    pairs = []
    for pair in raw:
        if not isinstance(pair, list | tuple) or len(pair) != 2:
            raise ValueError(f"Interval must be a [lo, hi] pair, got {pair!r}")
        pairs.append(pair)
    return IntervalSet.of(*pairs)


def parse_sequence(spec, terms: int = 40) -> list[IntervalSet]:
    """Build terms from a preset name, a literal list of terms, or {cycle: [...]}.

    Presets are `two_gap`, its families `two_gap_head`, `two_gap_even` and
    `two_gap_odd`, and `connected`. A cycle is repeated until `terms` terms
    exist; a literal list is used as is.
    """
    if isinstance(spec, str):
        if spec == "two_gap":
            return two_gap_sequence(terms)
        if spec == "connected":
            return connected_sequence(terms)
        if spec.startswith("two_gap_") and spec in SEQUENCE_PRESETS:
            return two_gap_family(spec.removeprefix("two_gap_"), terms)
        raise ValueError(f"Unknown sequence preset {spec!r} (expected one of {SEQUENCE_PRESETS})")
    if isinstance(spec, dict):
        if set(spec) != {"cycle"} or not spec["cycle"]:
            raise ValueError("A sequence mapping must be {cycle: [term, ...]} with terms")
        cycle = [_parse_term(t) for t in spec["cycle"]]
        return [cycle[i % len(cycle)] for i in range(terms)]
    if isinstance(spec, list | tuple):
        return [_parse_term(t) for t in spec]
    raise ValueError(f"Cannot build a sequence from {spec!r}")
