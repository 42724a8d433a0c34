import numpy as np
import pytest

from itisc.core import Rng
from itisc.synth import builtin_spec, sample_mixture


@pytest.fixture
def rng():
    return Rng(12345)


@pytest.fixture(scope="session")
def c3_data():
    return sample_mixture(builtin_spec("c3-default"), Rng(0))


@pytest.fixture(scope="session")
def extreme_data():
    return sample_mixture(builtin_spec("extreme"), Rng(0))


def random_instance(seed, n=None, c=None, s=None):
    """Small random (X, Y) pair for oracle comparisons."""
    g = np.random.default_rng(seed)
    n = n or int(g.integers(5, 30))
    c = c or int(g.integers(1, 5))
    s = s or int(g.integers(1, 4))
    return g.normal(size=(n, s)) * 2.0, g.normal(size=(c, s)) * 2.0
