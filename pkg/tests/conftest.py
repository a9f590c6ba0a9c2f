import numpy as np
import pytest

from stator_lab import linalg


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def plus_state():
    return linalg.StateVector([2], np.array([1, 1]) / np.sqrt(2))
