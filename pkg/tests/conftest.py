import numpy as np
import pytest

from infdiv import BlockMatrix
from infdiv.sampling import random_covariance, random_tilt_like


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def tilt_blocks():
    """Callable producing seeded random 2+2 tilt-like block matrices."""
    gen = np.random.default_rng(5150)

    def make(n: int = 4, n1: int = 2) -> BlockMatrix:
        return BlockMatrix.from_array(random_tilt_like(gen, n), n1)

    return make


@pytest.fixture
def covariances():
    """Callable producing seeded random covariance arrays."""
    gen = np.random.default_rng(6006)

    def make(n: int = 4) -> np.ndarray:
        return random_covariance(gen, n)

    return make
