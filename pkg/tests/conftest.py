"""Shared fixtures and stream generators."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from eventfrag import EventStream, SensorGeometry

DATA_DIR = Path(__file__).parent / "data"


def random_stream(
    rng: np.random.Generator,
    n: int,
    width: int = 64,
    height: int = 64,
    t_max: int = 100_000,
) -> EventStream:
    """A valid random stream: sorted times, in-bounds coordinates."""
    geometry = SensorGeometry(width, height, t_max)
    x = rng.integers(0, width, size=n)
    y = rng.integers(0, height, size=n)
    t = np.sort(rng.integers(0, t_max + 1, size=n))
    p = rng.integers(0, 2, size=n)
    return EventStream(geometry, x, y, t, p)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def golden_fixture_path() -> Path:
    return DATA_DIR / "golden_fixture.evt1"


@pytest.fixture
def golden_estf_path() -> Path:
    return DATA_DIR / "golden_estf_seed7.evt1"
