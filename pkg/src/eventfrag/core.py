"""Core event data model: events, sensor geometry, streams, fragments.

Streams are column-oriented (numpy int64) and frozen after construction;
every transform returns a new stream. Scalar `Event` objects are only
materialized on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Sequence

import numpy as np

__all__ = [
    "Domain",
    "Event",
    "SensorGeometry",
    "EventStream",
    "FragmentSpec",
    "Violation",
    "validate",
    "sort_stable",
    "select_fragment",
    "draw_fragment",
]


class Domain(Enum):
    """Coordinate axis a transform acts on."""

    X = "x"
    Y = "y"
    TIME = "t"
    POLARITY = "p"


#: Domains a drift (rigid shift) is defined on. POLARITY shifts are undefined.
DRIFT_DOMAINS = (Domain.X, Domain.Y, Domain.TIME)


@dataclass(frozen=True, slots=True)
class Event:
    """A single brightness-change record: pixel (x, y), time t in µs, polarity p."""

    x: int
    y: int
    t: int
    p: int

    def __post_init__(self) -> None:
        if self.p not in (0, 1):
            raise ValueError(f"polarity must be 0 or 1, got {self.p}")
        if self.t < 0:
            raise ValueError(f"timestamp must be non-negative, got {self.t}")


@dataclass(frozen=True, slots=True)
class SensorGeometry:
    """Spatial resolution and temporal extent of a recording.

    `t_max` is the largest admissible timestamp; it is a property of the
    recording, never rescaled by a transform.
    """

    width: int
    height: int
    t_max: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"sensor must be at least 1x1, got {self.width}x{self.height}")
        if self.t_max < 0:
            raise ValueError(f"t_max must be non-negative, got {self.t_max}")

    def resolution(self, domain: Domain) -> int:
        """Largest admissible coordinate value on `domain`.

        Spatial axes use width-1 / height-1 so that inversion d -> res - d
        is a bijection on the pixel grid.
        """
        if domain is Domain.X:
            return self.width - 1
        if domain is Domain.Y:
            return self.height - 1
        if domain is Domain.TIME:
            return self.t_max
        return 1  # POLARITY


class EventStream:
    """A batch of events bound to a sensor geometry.

    Valid streams are sorted by t non-decreasing with ties keeping insertion
    order; `validate` diagnoses violations without raising, so streams in an
    invalid state are representable. Column arrays are read-only.
    """

    __slots__ = ("geometry", "x", "y", "t", "p")

    def __init__(
        self,
        geometry: SensorGeometry,
        x: np.ndarray,
        y: np.ndarray,
        t: np.ndarray,
        p: np.ndarray,
    ) -> None:
        self.geometry = geometry
        self.x = np.ascontiguousarray(x, dtype=np.int64)
        self.y = np.ascontiguousarray(y, dtype=np.int64)
        self.t = np.ascontiguousarray(t, dtype=np.int64)
        self.p = np.ascontiguousarray(p, dtype=np.int64)
        n = len(self.x)
        if not (len(self.y) == len(self.t) == len(self.p) == n):
            raise ValueError("column arrays must have equal length")
        for col in (self.x, self.y, self.t, self.p):
            col.setflags(write=False)

    @classmethod
    def empty(cls, geometry: SensorGeometry) -> "EventStream":
        z = np.empty(0, dtype=np.int64)
        return cls(geometry, z, z, z, z)

    @classmethod
    def from_events(
        cls,
        geometry: SensorGeometry,
        events: Sequence[Event],
        sort: bool = True,
    ) -> "EventStream":
        """Build a stream from scalar events, stably time-sorting by default.

        Pass sort=False to preserve the given order (e.g. to feed `validate`
        a deliberately unsorted stream).
        """
        if sort:
            events = sort_stable(events)
        x = np.fromiter((e.x for e in events), dtype=np.int64, count=len(events))
        y = np.fromiter((e.y for e in events), dtype=np.int64, count=len(events))
        t = np.fromiter((e.t for e in events), dtype=np.int64, count=len(events))
        p = np.fromiter((e.p for e in events), dtype=np.int64, count=len(events))
        return cls(geometry, x, y, t, p)

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.x[i]), int(self.y[i]), int(self.t[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def events(self) -> List[Event]:
        return list(self)

    def column(self, domain: Domain) -> np.ndarray:
        return {Domain.X: self.x, Domain.Y: self.y, Domain.TIME: self.t, Domain.POLARITY: self.p}[
            domain
        ]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.p, other.p)
        )

    def __repr__(self) -> str:
        g = self.geometry
        return f"EventStream({len(self)} events, {g.width}x{g.height}, t_max={g.t_max})"


@dataclass(frozen=True, slots=True)
class Violation:
    """One broken stream invariant, located by event index."""

    index: int
    rule: str
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] at index {self.index}: {self.message}"


def validate(stream: EventStream) -> List[Violation]:
    """Diagnose all stream-invariant violations. Never raises.

    Returns an empty list iff the stream is sorted and every event is within
    the geometry bounds with polarity in {0, 1}.
    """
    out: List[Violation] = []
    g = stream.geometry

    def flag(mask: np.ndarray, rule: str, fmt: str) -> None:
        for i in np.flatnonzero(mask):
            out.append(Violation(int(i), rule, fmt.format(i=int(i))))

    if len(stream) > 1:
        unsorted = np.zeros(len(stream), dtype=bool)
        unsorted[1:] = np.diff(stream.t) < 0
        flag(unsorted, "sorted", "timestamp decreases at index {i}")
    flag((stream.x < 0) | (stream.x >= g.width), "x-bounds", "x out of [0, width) at index {i}")
    flag((stream.y < 0) | (stream.y >= g.height), "y-bounds", "y out of [0, height) at index {i}")
    flag((stream.t < 0) | (stream.t > g.t_max), "t-bounds", "t out of [0, t_max] at index {i}")
    flag((stream.p != 0) & (stream.p != 1), "polarity", "polarity not in {{0, 1}} at index {i}")
    out.sort(key=lambda v: v.index)
    return out


def sort_stable(events: Sequence[Event]) -> List[Event]:
    """Sort events by timestamp, keeping input order on ties."""
    return sorted(events, key=lambda e: e.t)


@dataclass(frozen=True, slots=True)
class FragmentSpec:
    """Contiguous index range [start, end) in a time-sorted stream."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start <= self.end:
            raise ValueError(f"invalid fragment [{self.start}, {self.end})")

    def check(self, n: int) -> None:
        if self.end > n:
            raise ValueError(f"fragment [{self.start}, {self.end}) exceeds stream length {n}")

    @property
    def length(self) -> int:
        return self.end - self.start


# Tolerance for begin + ratio vs 1.0; draws can land a few ulps over.
_FRACTION_EPS = 1e-9


def select_fragment(stream: EventStream, ratio: float, begin: float) -> FragmentSpec:
    """Select the index range [floor(N*begin), floor(N*(begin+ratio)))."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    if begin < 0.0 or begin + ratio > 1.0 + _FRACTION_EPS:
        raise ValueError(f"begin={begin} with ratio={ratio} exceeds the stream")
    n = len(stream)
    start = min(math.floor(n * begin), n)
    end = min(math.floor(n * (begin + ratio)), n)
    return FragmentSpec(start, max(end, start))


def draw_fragment(stream: EventStream, ratio: float, rng: np.random.Generator) -> FragmentSpec:
    """Draw a fragment whose begin is uniform on [0, 1-ratio].

    Consumes exactly one uniform draw; identical seed gives an identical
    fragment.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    begin = float(rng.uniform(0.0, 1.0 - ratio))
    return select_fragment(stream, ratio, begin)
