import numpy as np
import pytest

from arnold_lab.grid import make_grid
from arnold_lab.profiles import make_profile


@pytest.fixture(scope="session")
def gauss():
    return make_profile("gaussian")


@pytest.fixture(scope="session")
def k2():
    return make_profile("algebraic", kappa=2.0)


@pytest.fixture(scope="session")
def k3():
    return make_profile("algebraic", kappa=3.0)


@pytest.fixture(scope="session")
def k15():
    return make_profile("algebraic", kappa=1.5)


@pytest.fixture(scope="session")
def ugrid():
    return make_grid(1025, 20.0)


@pytest.fixture(scope="session")
def loggrid():
    return make_grid(2048, 1e4, "log_r", r_min=1e-4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
