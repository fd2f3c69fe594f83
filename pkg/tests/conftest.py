import numpy as np
import pytest

from hfrac.fields import GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_spec():
    """8x8x32 periodic box, horizontal half width 3, vertical half height 4."""
    return GridSpec.box(1, (3.0, 4.0), (8, 8, 32))


@pytest.fixture(scope="session")
def line_spec():
    """Vertical-heavy grid for line-wise operators."""
    return GridSpec.box(1, (3.0, 4.0), (4, 4, 128))


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
