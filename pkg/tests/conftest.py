import numpy as np
import pytest

from fracwell import KirchhoffFn, build_grid, validate_params
from fracwell.variational import _random_smooth_field


@pytest.fixture(scope="session")
def flagship_params():
    """Admissible exponent tuple used throughout: N=1, s=0.5, p=3, q=3.5, sigma=4."""
    return validate_params(N=1, s=0.5, p=3.0, q=3.5, sigma=4.0, beta=0.0)


@pytest.fixture(scope="session")
def unit_kirchhoff():
    return KirchhoffFn.constant(1.0)


@pytest.fixture(scope="session")
def grid2():
    """Two cells on (0, 1): nodes {0.25, 0.75}, h = 0.5."""
    return build_grid(1.0, 2)


@pytest.fixture(scope="session")
def grid32():
    return build_grid(1.0, 32)


@pytest.fixture(scope="session")
def grid48():
    return build_grid(1.0, 48)


def random_pair(grid, seed, modes=5):
    rng = np.random.default_rng(seed)
    return (_random_smooth_field(grid, rng, modes),
            _random_smooth_field(grid, rng, modes))
