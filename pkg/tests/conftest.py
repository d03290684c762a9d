import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning

from levykb import measures

warnings.filterwarnings("ignore", category=IntegrationWarning)


@pytest.fixture(scope="session")
def cauchy():
    return measures.preset("cauchy")


@pytest.fixture(scope="session")
def dyadic():
    return measures.preset("dyadic")


@pytest.fixture(scope="session")
def stable15():
    return measures.preset("stable", alpha=1.5)


@pytest.fixture(scope="session")
def oscillating():
    return measures.preset("oscillating")


@pytest.fixture(scope="session")
def small_t_grid():
    return np.geomspace(1e-3, 1.0, 6)
