"""Dense count-grid accumulation and its exports."""

import struct

import numpy as np
import pytest

from eventfrag import (
    Domain,
    Event,
    EventStream,
    FragmentSpec,
    SensorGeometry,
    accumulate,
    istp,
)
from eventfrag.representation import GRID_MAGIC, read_grid, write_grid, write_pgm

from conftest import random_stream


class TestAccumulate:
    def test_empty_stream_all_zero(self):
        grid = accumulate(EventStream.empty(SensorGeometry(8, 8, 100)), 4)
        assert grid.counts.shape == (4, 2, 8, 8)
        assert grid.total == 0

    def test_single_event_at_origin(self):
        g = SensorGeometry(8, 8, 100)
        grid = accumulate(EventStream.from_events(g, [Event(2, 5, 0, 1)]), 4)
        assert grid.total == 1
        assert grid.counts[0, 1, 5, 2] == 1

    def test_last_timestamp_lands_in_last_bin(self):
        g = SensorGeometry(4, 4, 999)
        grid = accumulate(EventStream.from_events(g, [Event(0, 0, 999, 0)]), 10)
        assert grid.counts[9, 0, 0, 0] == 1

    def test_histogram_oracle(self, rng):
        s = random_stream(rng, 1000)
        grid = accumulate(s, 10)
        assert grid.total == 1000
        # independent per-event counting pass
        expected = np.zeros((10, 2, 64, 64), dtype=np.int64)
        for e in s:
            expected[e.t * 10 // (s.geometry.t_max + 1), e.p, e.y, e.x] += 1
        assert np.array_equal(grid.counts, expected)

    def test_rejects_zero_bins(self, rng):
        with pytest.raises(ValueError):
            accumulate(random_stream(rng, 5), 0)

    def test_polarity_inversion_swaps_channels(self, rng):
        s = random_stream(rng, 800)
        flipped = istp(s, FragmentSpec(0, len(s)), Domain.POLARITY)
        a = accumulate(s, 6).counts
        b = accumulate(flipped, 6).counts
        assert np.array_equal(a[:, 0], b[:, 1])
        assert np.array_equal(a[:, 1], b[:, 0])


class TestGridExport:
    def test_binary_layout(self, rng, tmp_path):
        s = random_stream(rng, 200, width=5, height=3, t_max=50)
        grid = accumulate(s, 2)
        path = tmp_path / "grid.evg"
        write_grid(grid, path)
        raw = path.read_bytes()
        assert raw[:4] == GRID_MAGIC
        assert struct.unpack("<III", raw[4:16]) == (2, 3, 5)
        counts = np.frombuffer(raw, dtype="<u4", offset=16).reshape(2, 2, 3, 5)
        assert np.array_equal(counts, grid.counts)
        assert np.array_equal(read_grid(path), grid.counts)

    def test_pgm_dump(self, rng, tmp_path):
        grid = accumulate(random_stream(rng, 300, width=6, height=4, t_max=99), 3)
        paths = write_pgm(grid, tmp_path / "frames")
        assert len(paths) == 3
        raw = paths[0].read_bytes()
        assert raw.startswith(b"P5\n6 4\n255\n")
        assert len(raw) == len(b"P5\n6 4\n255\n") + 24
