"""Dense count-tensor view of a stream (time bins x polarity x height x width).

A fixed-kernel accumulation for downstream consumers and for eyeballing
augmentations; total count is always conserved.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np

from .core import EventStream, SensorGeometry

__all__ = ["VoxelGrid", "accumulate", "write_grid", "read_grid", "write_pgm"]

GRID_MAGIC = b"EVG1"


@dataclass(frozen=True)
class VoxelGrid:
    """counts has shape (bins_t, 2, height, width); channel 1 holds polarity-1 events."""

    bins_t: int
    geometry: SensorGeometry
    counts: np.ndarray

    def __post_init__(self) -> None:
        expect = (self.bins_t, 2, self.geometry.height, self.geometry.width)
        if self.counts.shape != expect:
            raise ValueError(f"counts shape {self.counts.shape} != {expect}")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def accumulate(stream: EventStream, bins_t: int) -> VoxelGrid:
    """Histogram events into `bins_t` temporal bins per polarity channel.

    Bin index is t*bins_t // (t_max+1), so t == t_max lands in the last bin.
    """
    if bins_t < 1:
        raise ValueError(f"bins_t must be >= 1, got {bins_t}")
    g = stream.geometry
    h, w = g.height, g.width
    bins = (stream.t * bins_t) // (g.t_max + 1)
    flat = ((bins * 2 + stream.p) * h + stream.y) * w + stream.x
    counts = np.bincount(flat, minlength=bins_t * 2 * h * w).reshape(bins_t, 2, h, w)
    return VoxelGrid(bins_t, g, counts.astype(np.int64))


def write_grid(grid: VoxelGrid, path: str | Path) -> None:
    """Flat binary export: `EVG1` + bins_t + height + width (u32 LE each),
    then u32 LE counts in (bin, channel, row, column) order."""
    if grid.counts.max(initial=0) >= 2**32:
        raise ValueError("cell count overflows the 32-bit export format")
    g = grid.geometry
    header = GRID_MAGIC + struct.pack("<III", grid.bins_t, g.height, g.width)
    Path(path).write_bytes(header + np.ascontiguousarray(grid.counts, dtype="<u4").tobytes())


def read_grid(path: str | Path) -> np.ndarray:
    """Read an exported grid back as an int64 (bins, 2, height, width) array."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != GRID_MAGIC:
        raise ValueError(f"{path}: not a grid export")
    bins_t, height, width = struct.unpack("<III", raw[4:16])
    counts = np.frombuffer(raw, dtype="<u4", offset=16)
    return counts.reshape(bins_t, 2, height, width).astype(np.int64)


def write_pgm(grid: VoxelGrid, directory: str | Path, prefix: str = "bin") -> List[Path]:
    """Dump one 8-bit PGM per temporal bin (both polarities summed), scaled
    to the grid-wide maximum so bins are visually comparable."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    per_bin = grid.counts.sum(axis=1)
    peak = max(int(per_bin.max(initial=0)), 1)
    g = grid.geometry
    paths = []
    for b in range(grid.bins_t):
        img = (per_bin[b] * 255 // peak).astype(np.uint8)
        path = directory / f"{prefix}{b:04d}.pgm"
        path.write_bytes(f"P5\n{g.width} {g.height}\n255\n".encode() + img.tobytes())
        paths.append(path)
    return paths
