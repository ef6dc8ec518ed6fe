import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from codebooknet.gf2 import get_code

# first calls pay numba compilation; keep hypothesis from flagging that
settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def hamming():
    return get_code("hamming74")


@pytest.fixture(scope="session")
def polar():
    return get_code("polar168")


@pytest.fixture(scope="session")
def bch():
    return get_code("bch3121")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
