"""Pixel-level event generation from log-brightness trajectories.

A pixel holds a reference level and fires an event whenever the piecewise-
linear log-intensity trajectory moves a full contrast threshold away from it
(up: polarity 1, down: polarity 0). After a firing the reference re-latches at
the exact crossing level and an optional refractory hold begins. The model is
noise-free and fully deterministic.

Three brightness perturbations are provided to study how small intensity
disturbances show up in the emitted stream: mirroring the trajectory about
its window-start level (flips polarities), reflecting a window in time, and
delaying a window (rigidly shifts the window's events in time).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .core import EventStream, SensorGeometry

__all__ = [
    "BrightnessSignal",
    "SensorModel",
    "Perturbation",
    "PerturbationKind",
    "SceneError",
    "generate_events",
    "apply_perturbation",
    "perturbation_effect",
    "read_scene",
    "write_scene",
    "simulate_scene",
]


class SceneError(ValueError):
    """Malformed brightness signal, perturbation, or scene file."""


class PerturbationKind(Enum):
    OPPOSITE_LIGHT_DARK = "opposite"
    INVERTED_VARIATION = "inverted"
    DELAYED_VARIATION = "delayed"


@dataclass(frozen=True)
class BrightnessSignal:
    """Piecewise-linear log-intensity trajectory of one pixel.

    samples: (t_us, L) pairs with strictly increasing integer timestamps.
    """

    pixel: Tuple[int, int]
    samples: Tuple[Tuple[int, float], ...]

    def __post_init__(self) -> None:
        samples = tuple((int(t), float(v)) for t, v in self.samples)
        object.__setattr__(self, "samples", samples)
        for (ta, _), (tb, _) in zip(samples, samples[1:]):
            if tb <= ta:
                raise SceneError(f"sample times must be strictly increasing ({ta} then {tb})")

    def span(self) -> Tuple[int, int]:
        if not self.samples:
            return (0, 0)
        return (self.samples[0][0], self.samples[-1][0])

    def value_at(self, t: float) -> float:
        """Linear interpolation; clamps outside the sampled span."""
        s = self.samples
        if not s:
            raise SceneError("signal has no samples")
        if t <= s[0][0]:
            return s[0][1]
        if t >= s[-1][0]:
            return s[-1][1]
        times = [p[0] for p in s]
        import bisect

        i = bisect.bisect_right(times, t)
        (ta, la), (tb, lb) = s[i - 1], s[i]
        return la + (lb - la) * (t - ta) / (tb - ta)


@dataclass(frozen=True)
class SensorModel:
    """Contrast threshold, refractory hold, and the geometry events land in."""

    threshold_c: float
    refractory_us: int
    geometry: SensorGeometry

    def __post_init__(self) -> None:
        if self.threshold_c <= 0:
            raise SceneError(f"contrast threshold must be positive, got {self.threshold_c}")
        if self.refractory_us < 0:
            raise SceneError(f"refractory period must be non-negative, got {self.refractory_us}")


@dataclass(frozen=True)
class Perturbation:
    kind: PerturbationKind
    window: Tuple[int, int]
    delay_us: int = 0

    def __post_init__(self) -> None:
        ts, te = self.window
        if te < ts:
            raise SceneError(f"perturbation window end {te} before start {ts}")
        if self.delay_us < 0:
            raise SceneError(f"delay must be non-negative, got {self.delay_us}")


# Absolute snap tolerance (µs) for crossing times that land a few ulps off an
# integer; keeps floor() from flipping to the previous microsecond.
_SNAP_US = 1e-6


def generate_events(signal: BrightnessSignal, model: SensorModel) -> EventStream:
    """Emit the event stream a single pixel produces for `signal`.

    Crossing times are solved exactly on each linear segment and floored to
    integer microseconds. During a refractory hold crossings are ignored and
    the reference re-latches at the trajectory level when the hold ends.
    """
    samples = signal.samples
    px, py = signal.pixel
    ts_out: List[int] = []
    p_out: List[int] = []
    if len(samples) >= 2:
        c = model.threshold_c
        ref = samples[0][1]
        free_t = float(samples[0][0])  # pixel is responsive from here on
        relatch = False  # reference must re-latch when free_t is reached
        for (ta, la), (tb, lb) in zip(samples, samples[1:]):
            if free_t > tb:
                continue  # whole segment inside the hold
            slope = (lb - la) / (tb - ta)
            cur = max(float(ta), free_t)
            if relatch:
                ref = la + slope * (cur - ta)
                relatch = False
            if slope == 0.0:
                continue
            while True:
                l_cur = la + slope * (cur - ta)
                target = ref + c if slope > 0 else ref - c
                t_x = cur + (target - l_cur) / slope
                if abs(t_x - round(t_x)) < _SNAP_US:
                    t_x = float(round(t_x))
                if t_x > tb + _SNAP_US:
                    break
                t_x = min(t_x, float(tb))
                ts_out.append(math.floor(t_x + _SNAP_US))
                p_out.append(1 if slope > 0 else 0)
                ref = target
                if model.refractory_us > 0:
                    free_t = t_x + model.refractory_us
                    if free_t > tb:
                        relatch = True
                        break
                    cur = free_t
                    ref = la + slope * (cur - ta)
                else:
                    cur = t_x
                if cur >= tb:
                    break
    n = len(ts_out)
    x = np.full(n, px, dtype=np.int64)
    y = np.full(n, py, dtype=np.int64)
    return EventStream(model.geometry, x, y, np.asarray(ts_out, dtype=np.int64), np.asarray(p_out, dtype=np.int64))


def _with_breakpoints(signal: BrightnessSignal, ts: int, te: int) -> List[Tuple[int, float]]:
    """Signal samples with interpolated points inserted at ts and te."""
    pts = dict(signal.samples)
    for edge in (ts, te):
        if edge not in pts:
            pts[edge] = signal.value_at(edge)
    return sorted(pts.items())


def _merge(pixel: Tuple[int, int], parts: Sequence[Tuple[int, float]]) -> BrightnessSignal:
    """Rebuild a signal: collapse duplicate timestamps that agree in value and
    drop samples that lie exactly on the segment between their neighbours, so
    a trajectory-preserving perturbation returns the original sample list."""
    merged: List[Tuple[int, float]] = []
    for t, v in sorted(parts):
        if merged and merged[-1][0] == t:
            if abs(merged[-1][1] - v) > 1e-9:
                raise SceneError(f"perturbation produced conflicting values at t={t}")
            continue
        while len(merged) >= 2:
            (ta, la), (tb, lb) = merged[-2], merged[-1]
            on_line = la + (v - la) * (tb - ta) / (t - ta)
            if abs(lb - on_line) <= 1e-12 * max(1.0, abs(lb)):
                merged.pop()
            else:
                break
        merged.append((t, v))
    return BrightnessSignal(pixel, tuple(merged))


def apply_perturbation(signal: BrightnessSignal, pert: Perturbation) -> BrightnessSignal:
    """Return the disturbed trajectory; outside the window the signal is kept.

    opposite  mirror the in-window deviation about the window-start level
    inverted  reflect the in-window segment about the window's time midpoint
    delayed   shift the in-window samples later by delay_us, holding the
              window-start value during the gap
    """
    ts, te = pert.window
    lo, hi = signal.span()
    if ts < lo or te > hi:
        raise SceneError(f"window [{ts}, {te}] outside the signal span [{lo}, {hi}]")
    base = _with_breakpoints(signal, ts, te)
    before = [s for s in base if s[0] < ts]
    inside = [s for s in base if ts <= s[0] <= te]
    after = [s for s in base if s[0] > te]

    if pert.kind is PerturbationKind.OPPOSITE_LIGHT_DARK:
        anchor = signal.value_at(ts)
        new_inside = [(t, 2.0 * anchor - v) for t, v in inside]
    elif pert.kind is PerturbationKind.INVERTED_VARIATION:
        new_inside = [(ts + te - t, v) for t, v in reversed(inside)]
    else:  # DELAYED_VARIATION
        d = pert.delay_us
        if te + d > hi:
            raise SceneError(f"delayed window end {te + d} passes the signal end {hi}")
        for t, _ in after:
            if t <= te + d:
                raise SceneError(
                    f"delayed window overlaps a later sample at t={t}; "
                    f"leave at least {d} µs of slack after the window"
                )
        anchor = signal.value_at(ts)
        new_inside = [(ts, anchor)] + [(t + d, v) for t, v in inside]

    return _merge(signal.pixel, before + new_inside + after)


def perturbation_effect(
    signal: BrightnessSignal, model: SensorModel, pert: Perturbation
) -> Tuple[EventStream, EventStream]:
    """Generate the (baseline, perturbed) stream pair for side-by-side study."""
    baseline = generate_events(signal, model)
    perturbed = generate_events(apply_perturbation(signal, pert), model)
    return baseline, perturbed


# ---------------------------------------------------------------------------
# Scene files: header `width height t_max`, then one line per sample
# `pixel_x pixel_y t_us L`. Blank lines and lines starting with '#' ignored.
# ---------------------------------------------------------------------------


def read_scene(path: str | Path) -> Tuple[SensorGeometry, List[BrightnessSignal]]:
    """Parse a scene file into per-pixel brightness signals (file order)."""
    lines = Path(path).read_text().splitlines()
    rows: List[Tuple[int, List[str]]] = [
        (i + 1, ln.split())
        for i, ln in enumerate(lines)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not rows:
        raise SceneError(f"{path}: missing scene header")
    lineno, header = rows[0]
    if len(header) != 3:
        raise SceneError(f"{path}:{lineno}: header must be `width height t_max`")
    try:
        width, height, t_max = (int(f) for f in header)
        geometry = SensorGeometry(width, height, t_max)
    except ValueError as exc:
        raise SceneError(f"{path}:{lineno}: bad header: {exc}") from exc

    per_pixel: Dict[Tuple[int, int], List[Tuple[int, float]]] = {}
    for lineno, fields in rows[1:]:
        if len(fields) != 4:
            raise SceneError(f"{path}:{lineno}: sample must be `x y t_us L`")
        try:
            x, y, t = int(fields[0]), int(fields[1]), int(fields[2])
            level = float(fields[3])
        except ValueError as exc:
            raise SceneError(f"{path}:{lineno}: bad sample: {exc}") from exc
        if not (0 <= x < width and 0 <= y < height):
            raise SceneError(f"{path}:{lineno}: pixel ({x}, {y}) outside {width}x{height}")
        if not 0 <= t <= t_max:
            raise SceneError(f"{path}:{lineno}: sample time {t} outside [0, {t_max}]")
        per_pixel.setdefault((x, y), []).append((t, level))

    signals = []
    for pixel, samples in per_pixel.items():
        try:
            signals.append(BrightnessSignal(pixel, tuple(samples)))
        except SceneError as exc:
            raise SceneError(f"{path}: pixel {pixel}: {exc}") from exc
    return geometry, signals


def write_scene(
    path: str | Path, geometry: SensorGeometry, signals: Sequence[BrightnessSignal]
) -> None:
    out = [f"{geometry.width} {geometry.height} {geometry.t_max}"]
    for sig in signals:
        x, y = sig.pixel
        out.extend(f"{x} {y} {t} {v!r}" for t, v in sig.samples)
    Path(path).write_text("\n".join(out) + "\n")


def simulate_scene(
    geometry: SensorGeometry,
    signals: Sequence[BrightnessSignal],
    threshold_c: float,
    refractory_us: int = 0,
) -> EventStream:
    """Generate every pixel independently and merge into one sorted stream.

    Ties across pixels keep the signals' given order (stable merge).
    """
    model = SensorModel(threshold_c, refractory_us, geometry)
    streams = [generate_events(sig, model) for sig in signals]
    if not streams:
        return EventStream.empty(geometry)
    x = np.concatenate([s.x for s in streams])
    y = np.concatenate([s.y for s in streams])
    t = np.concatenate([s.t for s in streams])
    p = np.concatenate([s.p for s in streams])
    order = np.argsort(t, kind="stable")
    return EventStream(geometry, x[order], y[order], t[order], p[order])
