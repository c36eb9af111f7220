#!/usr/bin/env python3
"""Regenerate the committed test fixtures (500-event stream + golden output).

Run from the repo root: python3 tools/make_golden.py
Only needed if the fixture recipe changes; the committed files are the
source of truth for the determinism tests.
"""

from pathlib import Path

import numpy as np

from eventfrag import Domain, EstfConfig, EventStream, FormatTag, SensorGeometry, estf, write

DATA_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

FIXTURE_SEED = 20240824
GOLDEN_CONFIG = EstfConfig(
    c_istp=0.25, c_dst=0.25, d_istp=Domain.POLARITY, d_dst=Domain.TIME, r=0.1, seed=7
)


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(FIXTURE_SEED)
    geometry = SensorGeometry(64, 64, 100_000)
    n = 500
    stream = EventStream(
        geometry,
        rng.integers(0, geometry.width, size=n),
        rng.integers(0, geometry.height, size=n),
        np.sort(rng.integers(0, geometry.t_max + 1, size=n)),
        rng.integers(0, 2, size=n),
    )
    write(stream, DATA_DIR / "golden_fixture.evt1", FormatTag.EVT1)
    write(estf(stream, GOLDEN_CONFIG), DATA_DIR / "golden_estf_seed7.evt1", FormatTag.EVT1)
    print(f"wrote fixtures to {DATA_DIR}")


if __name__ == "__main__":
    main()
