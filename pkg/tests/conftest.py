import numpy as np
import pytest

from nose_tip_locator.core import BinaryMask, DepthMap


@pytest.fixture
def spike_map():
    """5x5 ones with a single 10 at the centre."""
    depth = np.ones((5, 5))
    depth[2, 2] = 10.0
    return DepthMap.from_array(depth)


@pytest.fixture
def full_mask():
    def make(depth_map: DepthMap) -> BinaryMask:
        return BinaryMask.full(depth_map.height, depth_map.width)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
