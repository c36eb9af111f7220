"""Bit-exact readers and writers for event recordings.

Three formats:

CSV       one event per line `x,y,t,p` (decimal, LF newlines); p may be
          0/1 or -1/+1 (-1 is normalized to 0); lines starting with `#`
          are comments.
EVT1      native fixture format carrying geometry explicitly:
          magic `EVT1`, width u16, height u16, t_max u64, count u64
          (all little-endian), then `count` records of x:u16 y:u16 t:u64
          p:u8 (13 bytes each, little-endian).
ATIS_BIN  5 bytes per event: byte0 = x, byte1 = y, byte2 bit7 = polarity,
          remaining 23 bits (byte2 bits 6-0, byte3, byte4, big-endian) =
          timestamp in µs. Timestamp rollover is out of scope; a
          non-monotone timestamp is reported as an error.

Malformed input raises `FormatError` carrying the byte offset and the broken
rule; parsers never read past a declared record boundary.
"""

from __future__ import annotations

import struct
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .core import EventStream, SensorGeometry

__all__ = ["FormatTag", "FormatError", "read", "write", "infer_format"]


class FormatTag(Enum):
    CSV = "csv"
    EVT1 = "evt1"
    ATIS_BIN = "atis_bin"


class FormatError(ValueError):
    """Positioned parse/serialization error."""

    def __init__(self, path: str | Path, offset: int, rule: str, message: str) -> None:
        self.path = str(path)
        self.offset = offset
        self.rule = rule
        super().__init__(f"{path} @ byte {offset} [{rule}]: {message}")


_EXTENSIONS = {
    ".csv": FormatTag.CSV,
    ".evt1": FormatTag.EVT1,
    ".bin": FormatTag.ATIS_BIN,
    ".atis": FormatTag.ATIS_BIN,
}


def infer_format(path: str | Path) -> FormatTag:
    ext = Path(path).suffix.lower()
    if ext not in _EXTENSIONS:
        raise ValueError(f"cannot infer event format from extension {ext!r} ({path})")
    return _EXTENSIONS[ext]


def _finish(
    path: str | Path,
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
    p: np.ndarray,
    hint: Optional[SensorGeometry],
    offsets: Optional[np.ndarray] = None,
) -> EventStream:
    """Sort stably, attach (or infer) geometry, and bounds-check under a hint."""
    if hint is None:
        if len(x):
            geometry = SensorGeometry(int(x.max()) + 1, int(y.max()) + 1, int(t.max()))
        else:
            geometry = SensorGeometry(1, 1, 0)
    else:
        geometry = hint
        bad = (x < 0) | (x >= geometry.width) | (y < 0) | (y >= geometry.height) | (t < 0) | (
            t > geometry.t_max
        )
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            off = int(offsets[i]) if offsets is not None else 0
            raise FormatError(
                path,
                off,
                "bounds",
                f"event {i} ({x[i]},{y[i]},t={t[i]}) outside geometry "
                f"{geometry.width}x{geometry.height}, t_max={geometry.t_max}",
            )
    order = np.argsort(t, kind="stable")
    if np.any(np.diff(t) < 0):
        x, y, t, p = x[order], y[order], t[order], p[order]
    return EventStream(geometry, x, y, t, p)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _read_csv(path: str | Path, hint: Optional[SensorGeometry]) -> EventStream:
    raw = Path(path).read_bytes()
    xs, ys, ts, ps, offs = [], [], [], [], []
    offset = 0
    for line in raw.split(b"\n"):
        here = offset
        offset += len(line) + 1
        stripped = line.strip()
        if not stripped or stripped.startswith(b"#"):
            continue
        fields = stripped.split(b",")
        if len(fields) != 4:
            raise FormatError(path, here, "grammar", f"expected 4 fields, got {len(fields)}")
        try:
            x, y, t, p = (int(f) for f in fields)
        except ValueError:
            raise FormatError(path, here, "grammar", f"non-integer field in {stripped!r}") from None
        if p == -1:
            p = 0
        if p not in (0, 1):
            raise FormatError(path, here, "polarity", f"polarity {p} not in {{0, 1, -1, +1}}")
        if t < 0:
            raise FormatError(path, here, "timestamp", f"negative timestamp {t}")
        if x < 0 or y < 0:
            raise FormatError(path, here, "coordinates", f"negative coordinate in {stripped!r}")
        xs.append(x)
        ys.append(y)
        ts.append(t)
        ps.append(p)
        offs.append(here)
    arr = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
    return _finish(path, arr(xs), arr(ys), arr(ts), arr(ps), hint, arr(offs))


def _write_csv(stream: EventStream, path: str | Path) -> None:
    lines = [
        f"{x},{y},{t},{p}"
        for x, y, t, p in zip(stream.x.tolist(), stream.y.tolist(), stream.t.tolist(), stream.p.tolist())
    ]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode() if lines else b"")


# ---------------------------------------------------------------------------
# EVT1
# ---------------------------------------------------------------------------

_EVT1_MAGIC = b"EVT1"
_EVT1_HEADER = struct.Struct("<4sHHQQ")
_EVT1_RECORD = np.dtype([("x", "<u2"), ("y", "<u2"), ("t", "<u8"), ("p", "u1")])


def _read_evt1(path: str | Path, hint: Optional[SensorGeometry]) -> EventStream:
    raw = Path(path).read_bytes()
    if len(raw) < _EVT1_HEADER.size:
        raise FormatError(path, 0, "header", f"file shorter than the {_EVT1_HEADER.size}-byte header")
    magic, width, height, t_max, count = _EVT1_HEADER.unpack_from(raw)
    if magic != _EVT1_MAGIC:
        raise FormatError(path, 0, "magic", f"bad magic {magic!r}")
    body = raw[_EVT1_HEADER.size :]
    need = count * _EVT1_RECORD.itemsize
    if len(body) < need:
        raise FormatError(
            path,
            _EVT1_HEADER.size + len(body) - (len(body) % _EVT1_RECORD.itemsize),
            "truncated",
            f"header declares {count} records but only {len(body)} payload bytes present",
        )
    rec = np.frombuffer(body, dtype=_EVT1_RECORD, count=count)
    bad_p = rec["p"] > 1
    if bad_p.any():
        i = int(np.flatnonzero(bad_p)[0])
        raise FormatError(
            path,
            _EVT1_HEADER.size + i * _EVT1_RECORD.itemsize + 12,
            "polarity",
            f"record {i} has polarity {rec['p'][i]}",
        )
    file_geom = SensorGeometry(max(width, 1), max(height, 1), t_max)
    offsets = _EVT1_HEADER.size + np.arange(count, dtype=np.int64) * _EVT1_RECORD.itemsize
    return _finish(
        path,
        rec["x"].astype(np.int64),
        rec["y"].astype(np.int64),
        rec["t"].astype(np.int64),
        rec["p"].astype(np.int64),
        hint or file_geom,
        offsets,
    )


def _write_evt1(stream: EventStream, path: str | Path) -> None:
    g = stream.geometry
    if g.width > 2**16 - 1 or g.height > 2**16 - 1:
        raise ValueError(f"geometry {g.width}x{g.height} exceeds the 16-bit coordinate capacity")
    if len(stream) and int(stream.t.max()) > 2**63 - 1:
        raise ValueError("timestamp exceeds the format capacity (2^63 - 1)")
    rec = np.empty(len(stream), dtype=_EVT1_RECORD)
    rec["x"], rec["y"], rec["t"], rec["p"] = stream.x, stream.y, stream.t, stream.p
    header = _EVT1_HEADER.pack(_EVT1_MAGIC, g.width, g.height, g.t_max, len(stream))
    Path(path).write_bytes(header + rec.tobytes())


# ---------------------------------------------------------------------------
# ATIS_BIN
# ---------------------------------------------------------------------------

_ATIS_RECORD = 5
_ATIS_T_MAX = 2**23 - 1


def _read_atis(path: str | Path, hint: Optional[SensorGeometry], swap_xy: bool) -> EventStream:
    raw = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    if len(raw) % _ATIS_RECORD:
        raise FormatError(
            path,
            len(raw) - (len(raw) % _ATIS_RECORD),
            "truncated",
            f"file length {len(raw)} is not a multiple of {_ATIS_RECORD}",
        )
    rec = raw.reshape(-1, _ATIS_RECORD).astype(np.int64)
    x, y = rec[:, 0], rec[:, 1]
    if swap_xy:
        x, y = y, x
    p = (rec[:, 2] >> 7) & 1
    t = ((rec[:, 2] & 0x7F) << 16) | (rec[:, 3] << 8) | rec[:, 4]
    if len(t) > 1:
        drop = np.flatnonzero(np.diff(t) < 0)
        if len(drop):
            i = int(drop[0]) + 1
            raise FormatError(
                path,
                i * _ATIS_RECORD,
                "monotone-time",
                f"timestamp decreases at record {i} ({t[i - 1]} then {t[i]}); "
                "23-bit rollover files are not supported",
            )
    offsets = np.arange(len(t), dtype=np.int64) * _ATIS_RECORD
    return _finish(path, x, y, t, p, hint, offsets)


def _write_atis(stream: EventStream, path: str | Path, swap_xy: bool) -> None:
    x, y = (stream.y, stream.x) if swap_xy else (stream.x, stream.y)
    if len(stream):
        if int(x.max()) > 255 or int(y.max()) > 255:
            raise ValueError("coordinates exceed the 8-bit capacity of the format")
        if int(stream.t.max()) > _ATIS_T_MAX:
            raise ValueError(f"timestamp exceeds the 23-bit capacity ({_ATIS_T_MAX} µs)")
    rec = np.empty((len(stream), _ATIS_RECORD), dtype=np.uint8)
    rec[:, 0] = x
    rec[:, 1] = y
    rec[:, 2] = (stream.p << 7) | ((stream.t >> 16) & 0x7F)
    rec[:, 3] = (stream.t >> 8) & 0xFF
    rec[:, 4] = stream.t & 0xFF
    Path(path).write_bytes(rec.tobytes())


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def read(
    path: str | Path,
    tag: FormatTag,
    geometry_hint: Optional[SensorGeometry] = None,
    *,
    swap_xy: bool = False,
) -> EventStream:
    """Parse a recording into a validated, stably sorted stream.

    Without a hint, geometry is inferred as (max_x+1, max_y+1, max_t) except
    for EVT1, which carries its geometry in the header. `swap_xy` applies to
    ATIS_BIN only (field-order conventions vary between tool chains).
    """
    if tag is FormatTag.CSV:
        return _read_csv(path, geometry_hint)
    if tag is FormatTag.EVT1:
        return _read_evt1(path, geometry_hint)
    return _read_atis(path, geometry_hint, swap_xy)


def write(stream: EventStream, path: str | Path, tag: FormatTag, *, swap_xy: bool = False) -> None:
    """Serialize a valid stream; `read(write(s))` reproduces `s` exactly."""
    if tag is FormatTag.CSV:
        _write_csv(stream, path)
    elif tag is FormatTag.EVT1:
        _write_evt1(stream, path)
    else:
        _write_atis(stream, path, swap_xy)
