import numpy as np
import pytest

from orbitlab import GridManifold


@pytest.fixture(scope="session")
def flat64():
    return GridManifold(64)


@pytest.fixture(scope="session")
def flat128():
    return GridManifold(128)


@pytest.fixture(scope="session")
def curved128():
    return GridManifold(128, conformal=lambda x: 1.0 + 0.3 * np.cos(x))


@pytest.fixture(scope="session")
def curved256():
    return GridManifold(256, conformal=lambda x: 1.0 + 0.3 * np.cos(x))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
