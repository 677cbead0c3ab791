import numpy as np
import pytest

from edgesim.config import SimConfig


@pytest.fixture
def cfg():
    return SimConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
