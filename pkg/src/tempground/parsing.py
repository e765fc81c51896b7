"""Deterministic parsing of model responses into evaluable structures.

Responses about event timing become a :class:`TimestampSet` of points
and closed intervals; responses about event order become one of three
labels (Yes / No / NoInfo).  Unparseable prose degrades to the empty
set, which downstream scoring counts as incorrect.  Everything here is
pure, stateless and reentrant.

Accepted number formats: integers and decimals with units "second(s)",
"sec(s)", "s", "minute(s)", "min(s)" (minutes convert x60), optionally
prefixed by "at"/"around"/"about".  Vague positions map to thirds of
the video: beginning -> [0, L/3], middle -> [L/3, 2L/3], end ->
[2L/3, L], throughout -> [0, L].  The thirds share their boundary
points; all intervals are closed and endpoint touches count as hits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple


class OrderLabel(Enum):
    YES = "Yes"
    NO = "No"
    NO_INFO = "NoInfo"


@dataclass(frozen=True)
class TimestampSet:
    """Parsed timestamps: point values plus closed [lo, hi] intervals."""

    points: Tuple[float, ...] = ()
    intervals: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        points = tuple(sorted(float(p) for p in self.points))
        intervals = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        if any(p < 0 for p in points):
            raise ValueError("timestamps must be >= 0")
        for lo, hi in intervals:
            if lo < 0 or lo > hi:
                raise ValueError(f"bad interval [{lo}, {hi}]")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "intervals", intervals)

    @property
    def is_empty(self) -> bool:
        return not self.points and not self.intervals

    def to_json_dict(self) -> dict:
        return {
            "points": list(self.points),
            "intervals": [[lo, hi] for lo, hi in self.intervals],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TimestampSet":
        return cls(
            points=tuple(data.get("points", ())),
            intervals=tuple((lo, hi) for lo, hi in data.get("intervals", ())),
        )


@dataclass(frozen=True)
class TemporalMention:
    """One temporal phrase found in a response, with its character span."""

    span: Tuple[int, int]
    points: Tuple[float, ...] = ()
    intervals: Tuple[Tuple[float, float], ...] = ()


_NUM = r"\d+(?:\.\d+)?"
_UNIT = r"(?:seconds?|secs?|minutes?|mins?|s)\b"

_RANGE_RE = re.compile(
    rf"\bfrom\s+(?:about\s+|around\s+)?({_NUM})\s*({_UNIT})?\s+to\s+"
    rf"(?:about\s+|around\s+)?({_NUM})\s*({_UNIT})?",
    re.IGNORECASE,
)

_LIST = rf"{_NUM}(?:\s*{_UNIT})?(?:\s*(?:,|and)\s+{_NUM}(?:\s*{_UNIT})?)*"
_POINTS_RE = re.compile(
    rf"(?:\b(at|around|about)\s+)?\b({_LIST})",
    re.IGNORECASE,
)
_NUM_UNIT_RE = re.compile(rf"({_NUM})(?:\s*({_UNIT}))?", re.IGNORECASE)

_VAGUE_RE = re.compile(
    r"(?:\b(?:in|at|near|towards?)\s+the\s+)?\b(beginning|middle|end)\b"
    r"(?:\s+of\s+the\s+video)?"
    r"|\b(throughout)\b(?:\s+the\s+video)?",
    re.IGNORECASE,
)


def _unit_factor(unit: str | None) -> float:
    if unit and unit.lower().startswith("min"):
        return 60.0
    return 1.0


def _overlaps(span: Tuple[int, int], taken: Sequence[Tuple[int, int]]) -> bool:
    return any(span[0] < hi and span[1] > lo for lo, hi in taken)


def find_temporal_mentions(response: str, duration: float) -> List[TemporalMention]:
    """All temporal phrases in ``response`` with their character spans.

    Ranges take precedence over point lists on overlapping text; vague
    positional words are picked up last.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    mentions: List[TemporalMention] = []
    taken: List[Tuple[int, int]] = []

    for m in _RANGE_RE.finditer(response):
        lo = float(m.group(1)) * _unit_factor(m.group(2) or m.group(4))
        hi = float(m.group(3)) * _unit_factor(m.group(4) or m.group(2))
        if lo > hi:
            continue
        mentions.append(TemporalMention(span=m.span(), intervals=((lo, hi),)))
        taken.append(m.span())

    for m in _POINTS_RE.finditer(response):
        if _overlaps(m.span(), taken):
            continue
        pairs = [(g.group(1), g.group(2), g.span()) for g in _NUM_UNIT_RE.finditer(m.group(2))]
        has_prefix = m.group(1) is not None
        shared_unit = next((u for _, u, _ in reversed(pairs) if u), None)
        if shared_unit is None and not has_prefix:
            continue
        points = tuple(float(n) * _unit_factor(u or shared_unit) for n, u, _ in pairs)
        mentions.append(TemporalMention(span=m.span(), points=points))
        taken.append(m.span())

    third = duration / 3.0
    vague_intervals = {
        "beginning": (0.0, third),
        "middle": (third, 2.0 * third),
        "end": (2.0 * third, duration),
        "throughout": (0.0, duration),
    }
    for m in _VAGUE_RE.finditer(response):
        if _overlaps(m.span(), taken):
            continue
        word = (m.group(1) or m.group(2)).lower()
        mentions.append(TemporalMention(span=m.span(), intervals=(vague_intervals[word],)))
        taken.append(m.span())

    mentions.sort(key=lambda mn: mn.span)
    return mentions


def parse_timestamps(response: str, duration: float) -> TimestampSet:
    """Extract the timestamp set asserted by a response.

    Content with no recognizable temporal statement yields the empty
    set ("no information"); this function never raises on prose.
    """
    mentions = find_temporal_mentions(response, duration)
    points: List[float] = []
    intervals: List[Tuple[float, float]] = []
    for mention in mentions:
        points.extend(mention.points)
        intervals.extend(mention.intervals)
    return TimestampSet(points=tuple(dict.fromkeys(points)), intervals=tuple(dict.fromkeys(intervals)))


def hits_window(ts: TimestampSet, t_start: float, t_end: float) -> bool:
    """True iff some parsed timestamp falls inside [t_start, t_end].

    Closed-interval semantics: endpoint touches count.
    """
    if not (0 <= t_start <= t_end):
        raise ValueError("window must satisfy 0 <= t_start <= t_end")
    if any(t_start <= p <= t_end for p in ts.points):
        return True
    return any(lo <= t_end and hi >= t_start for lo, hi in ts.intervals)


def clamp_to_duration(ts: TimestampSet, duration: float) -> TimestampSet:
    """Drop points past the video end; clamp interval ends to it."""
    if duration <= 0:
        raise ValueError("duration must be > 0")
    points = tuple(p for p in ts.points if p <= duration)
    intervals = tuple(
        (lo, min(hi, duration)) for lo, hi in ts.intervals if lo <= duration
    )
    return TimestampSet(points=points, intervals=intervals)


_NO_INFO_PATTERNS = (
    "no information",
    "no relevant information",
    "not mentioned",
    "cannot determine",
    "can't determine",
    "unable to determine",
    "does not show",
    "doesn't show",
)
_YES_LEADS = ("yes", "indeed", "correct", "that is right", "that's right")
_NOT_RE = re.compile(r"\bnot\b|n't\b")


def is_no_info_response(response: str) -> bool:
    lowered = response.strip().lower()
    return any(pat in lowered for pat in _NO_INFO_PATTERNS)


def classify_order(response: str) -> OrderLabel:
    """Label an order-prediction response as Yes, No, or NoInfo.

    Total and case-insensitive.  No-information phrasings win over a
    leading "no" so that "No relevant information" is not misread as a
    negative answer.
    """
    lowered = response.strip().lower()
    if not lowered:
        return OrderLabel.NO_INFO
    if is_no_info_response(lowered):
        return OrderLabel.NO_INFO
    for lead in _YES_LEADS:
        if lowered.startswith(lead):
            return OrderLabel.YES
    if re.match(r"^no\b", lowered) or _NOT_RE.search(lowered):
        return OrderLabel.NO
    return OrderLabel.NO_INFO
