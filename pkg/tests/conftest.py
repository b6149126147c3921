"""Shared fixtures. The finite-size scan is expensive (dense 1024-dim
eigendecompositions), so it is computed once per session and shared by the
acceptance criteria that need it."""

import numpy as np
import pytest

from nhmqc import SweepSpec, sweep_1d

SCAN_SIZES = (6, 7, 8, 9, 10)
SCAN_FIXED = {"J": 0.4, "J2": 0.1, "Gamma": 1.0, "h_y": 0.0}
SCAN_GRID = tuple(np.round(np.arange(0.05, 0.30001, 0.005), 10))


@pytest.fixture(scope="session")
def ising_scan_rows():
    """h_z sweeps of the next-nearest-neighbor chain for L = 6..10."""
    rows = {}
    for L in SCAN_SIZES:
        spec = SweepSpec(
            model="ising",
            fixed={**SCAN_FIXED, "L": L},
            sweep_param="h_z",
            grid=SCAN_GRID,
            reference="sz",
            workers=2,
        )
        rows[L] = sweep_1d(spec)
    return rows
