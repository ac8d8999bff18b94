import numpy as np
import pytest

from gaugeelastic.fields import GridSpec, MaterialModel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid1d():
    return GridSpec.uniform(1, 64, 2 * np.pi, dt=0.01)


@pytest.fixture
def grid2d():
    return GridSpec.uniform(2, 32, 2 * np.pi, dt=0.01)


@pytest.fixture
def steel_like(grid2d):
    return MaterialModel.isotropic(2.0, 1.0, 1.5, grid2d)
