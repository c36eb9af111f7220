"""Fragment-level stream transforms and the baseline augmentations.

The two primitives are fragment inversion (istp: a coordinate d is mapped to
its mirror position res_d - d inside the fragment) and fragment drift (dst: a
rigid shift by a drawn signed distance, discarding events pushed past the
domain border). `estf` composes them with a fixed generator-consumption order
so seeds are portable: istp begin, dst begin, drift distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .core import (
    DRIFT_DOMAINS,
    Domain,
    EventStream,
    FragmentSpec,
    SensorGeometry,
    draw_fragment,
    select_fragment,
)

__all__ = [
    "DriftParams",
    "EstfConfig",
    "istp",
    "dst",
    "draw_drift",
    "estf",
    "estf_with_trace",
    "event_drop",
    "flip_horizontal",
    "translate",
]


@dataclass(frozen=True, slots=True)
class DriftParams:
    """A drawn drift: domain, the ratio it was drawn under, and the distance."""

    domain: Domain
    ratio: float
    drawn_distance: int

    def __post_init__(self) -> None:
        if self.domain not in DRIFT_DOMAINS:
            raise ValueError("drift is undefined on the polarity domain")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"drift ratio must be in [0, 1], got {self.ratio}")


@dataclass(frozen=True, slots=True)
class EstfConfig:
    """Parameters of the composed augmentation (fragment ratios, domains, drift ratio, seed)."""

    c_istp: float
    c_dst: float
    d_istp: Domain
    d_dst: Domain
    r: float
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("c_istp", "c_dst", "r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.d_dst not in DRIFT_DOMAINS:
            raise ValueError("d_dst must be a spatial or time domain")


def _finalize(
    geometry: SensorGeometry,
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
    p: np.ndarray,
) -> EventStream:
    """Re-establish stable time order if a transform disturbed it."""
    if len(t) > 1 and np.any(np.diff(t) < 0):
        order = np.argsort(t, kind="stable")
        x, y, t, p = x[order], y[order], t[order], p[order]
    return EventStream(geometry, x, y, t, p)


def istp(stream: EventStream, frag: FragmentSpec, domain: Domain) -> EventStream:
    """Invert one coordinate of the fragment's events to its mirror position.

    Inside [frag.start, frag.end) the chosen coordinate d becomes res_d - d
    (res_d = width-1 / height-1 / t_max / 1); everything else is untouched.
    Event count is preserved; the result is stably re-sorted when the time
    axis was inverted.
    """
    frag.check(len(stream))
    res = stream.geometry.resolution(domain)
    cols = {d: stream.column(d).copy() for d in Domain}
    col = cols[domain]
    col[frag.start : frag.end] = res - col[frag.start : frag.end]
    return _finalize(
        stream.geometry, cols[Domain.X], cols[Domain.Y], cols[Domain.TIME], cols[Domain.POLARITY]
    )


def dst(stream: EventStream, frag: FragmentSpec, params: DriftParams) -> EventStream:
    """Rigidly shift the fragment's events by the drawn distance.

    Fragment events whose shifted coordinate leaves the domain ([0, t_max]
    for time, the pixel grid for space) are discarded; events outside the
    fragment are untouched.
    """
    frag.check(len(stream))
    res = stream.geometry.resolution(params.domain)
    if abs(params.drawn_distance) > params.ratio * res + 1e-9:
        raise ValueError(
            f"drawn_distance {params.drawn_distance} exceeds ratio*resolution "
            f"({params.ratio} * {res})"
        )
    cols = {d: stream.column(d).copy() for d in Domain}
    col = cols[params.domain]
    s, e = frag.start, frag.end
    col[s:e] += params.drawn_distance

    shifted = col[s:e]
    if params.domain is Domain.TIME:
        in_bounds = (shifted >= 0) & (shifted <= stream.geometry.t_max)
    else:
        # width for X, height for Y; the grid bound is exclusive
        in_bounds = (shifted >= 0) & (shifted <= res)
    if not in_bounds.all():
        keep = np.ones(len(stream), dtype=bool)
        keep[s:e] = in_bounds
        cols = {d: a[keep] for d, a in cols.items()}
    return _finalize(
        stream.geometry, cols[Domain.X], cols[Domain.Y], cols[Domain.TIME], cols[Domain.POLARITY]
    )


def draw_drift(
    geometry: SensorGeometry,
    domain: Domain,
    ratio: float,
    rng: np.random.Generator,
) -> DriftParams:
    """Draw a drift distance uniformly from the closed integer interval
    [-floor(ratio*res_d), +floor(ratio*res_d)]. One integer draw."""
    if domain not in DRIFT_DOMAINS:
        raise ValueError("drift is undefined on the polarity domain")
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    m = math.floor(ratio * geometry.resolution(domain))
    distance = int(rng.integers(-m, m + 1))
    return DriftParams(domain, ratio, distance)


def estf_with_trace(stream: EventStream, config: EstfConfig) -> Tuple[EventStream, Dict]:
    """Run the composed augmentation, returning the drawn values alongside.

    Draw order (part of the contract): inversion begin, drift begin, drift
    distance. The drift fragment is selected over the inverted stream's index
    space, which has the same length.
    """
    rng = np.random.default_rng(config.seed)
    begin_istp = float(rng.uniform(0.0, 1.0 - config.c_istp))
    frag_istp = select_fragment(stream, config.c_istp, begin_istp)
    inverted = istp(stream, frag_istp, config.d_istp)

    begin_dst = float(rng.uniform(0.0, 1.0 - config.c_dst))
    frag_dst = select_fragment(inverted, config.c_dst, begin_dst)
    drift = draw_drift(stream.geometry, config.d_dst, config.r, rng)
    out = dst(inverted, frag_dst, drift)

    trace = {
        "begin_istp": begin_istp,
        "frag_istp": [frag_istp.start, frag_istp.end],
        "begin_dst": begin_dst,
        "frag_dst": [frag_dst.start, frag_dst.end],
        "drift": drift.drawn_distance,
        "n_in": len(stream),
        "n_out": len(out),
    }
    return out, trace


def estf(stream: EventStream, config: EstfConfig) -> EventStream:
    """Composed augmentation: invert a drawn fragment, then drift a drawn fragment."""
    out, _ = estf_with_trace(stream, config)
    return out


def event_drop(
    stream: EventStream,
    strategy: str,
    *,
    fraction: Optional[float] = None,
    window: Optional[Tuple[int, int]] = None,
    area: Optional[Tuple[int, int, int, int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> EventStream:
    """Baseline augmentation that deletes events.

    Strategies:
      random          drop floor(fraction * N) events chosen uniformly (needs rng)
      by_time_window  drop events with t in [window[0], window[1])
      by_area         drop events inside the rectangle (x0, y0, w, h)
    """
    n = len(stream)
    if strategy == "random":
        if fraction is None or rng is None:
            raise ValueError("random drop needs a fraction and an rng")
        if not 0.0 <= fraction <= 1.0:
            raise ValueError(f"drop fraction must be in [0, 1], got {fraction}")
        k = int(fraction * n)
        keep = np.ones(n, dtype=bool)
        if k:
            keep[rng.choice(n, size=k, replace=False)] = False
    elif strategy == "by_time_window":
        if window is None:
            raise ValueError("by_time_window drop needs a (t0, t1) window")
        t0, t1 = window
        keep = ~((stream.t >= t0) & (stream.t < t1))
    elif strategy == "by_area":
        if area is None:
            raise ValueError("by_area drop needs a rectangle (x0, y0, w, h)")
        x0, y0, w, h = area
        inside = (stream.x >= x0) & (stream.x < x0 + w) & (stream.y >= y0) & (stream.y < y0 + h)
        keep = ~inside
    else:
        raise ValueError(f"unknown drop strategy: {strategy!r}")
    # a subset of a sorted stream stays sorted
    return EventStream(stream.geometry, stream.x[keep], stream.y[keep], stream.t[keep], stream.p[keep])


def flip_horizontal(stream: EventStream) -> EventStream:
    """Mirror all events left-right: x -> width-1-x. Count preserved."""
    x = (stream.geometry.width - 1) - stream.x
    return EventStream(stream.geometry, x, stream.y, stream.t, stream.p)


def translate(stream: EventStream, dx: int, dy: int) -> EventStream:
    """Shift all events spatially, discarding those pushed off the grid."""
    g = stream.geometry
    if abs(dx) >= g.width or abs(dy) >= g.height:
        raise ValueError(f"translation ({dx}, {dy}) exceeds the sensor size")
    x = stream.x + dx
    y = stream.y + dy
    keep = (x >= 0) & (x < g.width) & (y >= 0) & (y < g.height)
    return EventStream(g, x[keep], y[keep], stream.t[keep], stream.p[keep])
