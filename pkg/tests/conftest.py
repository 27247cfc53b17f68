import numpy as np
import pytest

from nclp.algebra import make_algebra


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mixed_spec():
    """Two blocks, one of them with two points and unequal weights."""
    return make_algebra([(1, [0.7]), (2, [1.0, 1.6])])
