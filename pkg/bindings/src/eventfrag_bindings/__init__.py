"""Column-array bindings for the eventfrag core.

Lets training pipelines run the fragment augmentation per batch without file
round-trips: build an immutable stream handle from four equal-length columns
(x, y, t, p), transform it, and export columns or a dense count grid. Results
are bit-identical to the core library and CLI under the same seed.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from eventfrag import Domain, EstfConfig, EventStream, SensorGeometry, validate
from eventfrag import representation as _representation
from eventfrag import transforms as _transforms

__version__ = "0.1.0"

__all__ = [
    "BindingError",
    "StreamHandle",
    "from_arrays",
    "to_arrays",
    "estf_arrays",
    "accumulate_grid",
    "make_config",
]

_DOMAINS = {"x": Domain.X, "y": Domain.Y, "t": Domain.TIME, "p": Domain.POLARITY}


class BindingError(ValueError):
    """Structured construction/transform failure (carries the first violation)."""


class StreamHandle:
    """Immutable handle around a validated, sorted stream.

    Transforms return new handles; the wrapped column arrays are shared
    read-only, never mutated in place.
    """

    __slots__ = ("_stream",)

    def __init__(self, stream: EventStream) -> None:
        self._stream = stream

    @property
    def stream(self) -> EventStream:
        return self._stream

    def __len__(self) -> int:
        return len(self._stream)

    @property
    def geometry(self) -> Tuple[int, int, int]:
        g = self._stream.geometry
        return (g.width, g.height, g.t_max)

    def __repr__(self) -> str:
        return f"StreamHandle({self._stream!r})"


def _as_column(name: str, values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise BindingError(f"column {name!r} must be one-dimensional, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(arr == np.floor(arr)):
            arr = arr.astype(np.int64)
        else:
            raise BindingError(f"column {name!r} must hold integral values (dtype {arr.dtype})")
    return arr.astype(np.int64, copy=False)


def from_arrays(x, y, t, p, width: int, height: int, t_max: int) -> StreamHandle:
    """Build a validated, time-sorted handle from four equal-length columns.

    Raises BindingError naming the first violation (length mismatch, bound,
    or polarity) instead of silently clipping.
    """
    cols = {name: _as_column(name, v) for name, v in (("x", x), ("y", y), ("t", t), ("p", p))}
    lengths = {name: len(col) for name, col in cols.items()}
    if len(set(lengths.values())) != 1:
        raise BindingError(f"column lengths differ: {lengths}")
    geometry = SensorGeometry(width, height, t_max)
    order = np.argsort(cols["t"], kind="stable")
    stream = EventStream(
        geometry, cols["x"][order], cols["y"][order], cols["t"][order], cols["p"][order]
    )
    violations = validate(stream)
    if violations:
        raise BindingError(str(violations[0]))
    return StreamHandle(stream)


def to_arrays(handle: StreamHandle) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Export the columns as read-only int64 arrays (no copy)."""
    s = handle.stream
    return s.x, s.y, s.t, s.p


def make_config(
    c_istp: float,
    c_dst: float,
    d_istp: str,
    d_dst: str,
    r: float,
    seed: int = 0,
) -> EstfConfig:
    """Build a transform config from plain values (domains as 'x'/'y'/'t'/'p')."""
    try:
        return EstfConfig(c_istp, c_dst, _DOMAINS[d_istp], _DOMAINS[d_dst], r, seed)
    except KeyError as exc:
        raise BindingError(f"unknown domain {exc.args[0]!r}") from None
    except ValueError as exc:
        raise BindingError(str(exc)) from None


def estf_arrays(handle: StreamHandle, config: EstfConfig) -> StreamHandle:
    """Apply the composed fragment augmentation; bit-identical to the core
    library (and the CLI) for the same seed."""
    try:
        return StreamHandle(_transforms.estf(handle.stream, config))
    except ValueError as exc:
        raise BindingError(str(exc)) from None


def accumulate_grid(handle: StreamHandle, bins_t: int) -> np.ndarray:
    """Dense (bins_t, 2, height, width) count tensor; same cell ordering as
    the core's flat binary grid export."""
    try:
        return _representation.accumulate(handle.stream, bins_t).counts
    except ValueError as exc:
        raise BindingError(str(exc)) from None
