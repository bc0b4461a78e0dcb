import numpy as np
import pytest

from ofast import Image


def random_image(seed, height=64, width=None, low=0, high=256):
    rng = np.random.default_rng(seed)
    return Image.from_array(rng.integers(low, high, (height, width or height), dtype=np.uint8))


def blocky_image(seed, height=96, width=None, block=4):
    """Piecewise-constant noise: more FAST corners survive NMS than with white noise."""
    rng = np.random.default_rng(seed)
    w = width or height
    small = rng.integers(0, 256, (-(-height // block), -(-w // block)), dtype=np.uint8)
    return Image.from_array(np.kron(small, np.ones((block, block), np.uint8))[:height, :w])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
