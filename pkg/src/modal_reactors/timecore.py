"""Superdense logical time: tags, durations and the shift arithmetic."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering

__all__ = [
    "Tag",
    "Duration",
    "ZERO_TAG",
    "compare",
    "shift",
    "tag_delta",
    "parse_duration",
    "format_duration",
    "UNITS",
]

UNITS = {
    "nsec": 1,
    "usec": 1_000,
    "msec": 1_000_000,
    "sec": 1_000_000_000,
}

# Logical time is kept in signed 64-bit range so traces stay portable.
MAX_TIME = 2**63 - 1

_DURATION_RE = re.compile(r"^\s*(\d+)\s*(nsec|usec|msec|sec)\s*$")


class TimeOverflow(ArithmeticError):
    pass


@total_ordering
@dataclass(frozen=True, slots=True)
class Tag:
    time: int
    microstep: int = 0

    def __post_init__(self):
        if self.time < 0 or self.microstep < 0:
            raise ValueError(f"negative tag component: {self.time}, {self.microstep}")

    def __lt__(self, other: Tag) -> bool:
        return (self.time, self.microstep) < (other.time, other.microstep)

    def __str__(self) -> str:
        return f"t={self.time} m={self.microstep}"

    def next_microstep(self) -> Tag:
        return Tag(self.time, self.microstep + 1)


ZERO_TAG = Tag(0, 0)


@dataclass(frozen=True, slots=True)
class Duration:
    nanos: int

    def __post_init__(self):
        if self.nanos < 0:
            raise ValueError("durations are non-negative")

    @classmethod
    def parse(cls, text: str) -> Duration:
        return cls(parse_duration(text))

    def __str__(self) -> str:
        return format_duration(self.nanos)

    @property
    def seconds(self) -> float:
        return self.nanos / 1e9


def parse_duration(text: str) -> int:
    """Parse ``<int> <unit>`` into integer nanoseconds.

    A bare ``0`` is accepted as the zero duration.
    """
    if text.strip() == "0":
        return 0
    m = _DURATION_RE.match(text)
    if not m:
        raise ValueError(f"invalid duration {text!r}; expected '<int> nsec|usec|msec|sec'")
    return int(m.group(1)) * UNITS[m.group(2)]


def format_duration(nanos: int) -> str:
    for unit in ("sec", "msec", "usec"):
        scale = UNITS[unit]
        if nanos and nanos % scale == 0:
            return f"{nanos // scale} {unit}"
    return f"{nanos} nsec"


def compare(a: Tag, b: Tag) -> int:
    """Three-way lexicographic comparison: -1, 0 or 1."""
    ka = (a.time, a.microstep)
    kb = (b.time, b.microstep)
    return (ka > kb) - (ka < kb)


def shift(base: Tag, offset: Tag) -> Tag:
    if offset.time > 0:
        t = base.time + offset.time
        if t > MAX_TIME:
            raise TimeOverflow(f"logical time overflow shifting {base} by {offset}")
        return Tag(t, offset.microstep)
    return Tag(base.time, base.microstep + offset.microstep + 1)


def tag_delta(due: Tag, leave: Tag) -> Tag:
    """Offset that, shifted from ``leave``, lands back on ``due``.

    Used to carry the remaining delay of a suspended event across a period of
    inactivity. When the two tags share a time value the result is the
    microstep distance minus the one microstep that ``shift`` always adds.
    """
    if due < leave:
        raise AssertionError(f"suspended event due {due} precedes leave time {leave}")
    dt = due.time - leave.time
    if dt > 0:
        return Tag(dt, due.microstep)
    return Tag(0, max(0, due.microstep - leave.microstep - 1))
