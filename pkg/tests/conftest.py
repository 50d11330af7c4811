import numpy as np
import pytest

from kgzsim.radial import RadialGrid


@pytest.fixture(scope="session")
def grid() -> RadialGrid:
    return RadialGrid(40.0, 256)


@pytest.fixture(scope="session")
def fine_grid() -> RadialGrid:
    return RadialGrid(40.0, 512)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
