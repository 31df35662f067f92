import numpy as np
import pytest

from openvelope.data import Dataset


@pytest.fixture
def sine_data():
    """200 points, y = sin(x) + noise on [0, 10]."""
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 10, 200)
    return Dataset(np.sin(x) + 0.5 * rng.standard_normal(200), x)


@pytest.fixture
def grid_2d():
    """A 4-point square with known responses."""
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return Dataset(np.array([1.0, 2.0, 3.0, 4.0]), x)
