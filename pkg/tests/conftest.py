import numpy as np
import pytest

from twofluid import PeriodicGrid


@pytest.fixture
def grid64():
    return PeriodicGrid(64)


@pytest.fixture
def grid32():
    return PeriodicGrid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_field(rng, grid, k_max=6, amplitude=1.0):
    """Random band-limited real field, reproducible from the rng state."""
    x = grid.nodes
    u = np.zeros(grid.n)
    for k in range(1, k_max + 1):
        u += rng.normal() * np.cos(k * grid.k_fundamental * x)
        u += rng.normal() * np.sin(k * grid.k_fundamental * x)
    return amplitude * u / max(np.max(np.abs(u)), 1e-30)
