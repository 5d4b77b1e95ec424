import numpy as np
import pytest

from gaussep.settings import Tolerances, settings
from gaussep.symplectic import ModeLayout, QCM, random_qcm, thermal, tmsv


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size property suites")


@pytest.fixture(autouse=True)
def default_settings():
    settings.reset()
    yield settings
    settings.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tol():
    return Tolerances()


@pytest.fixture
def entangled_tmsv():
    return tmsv(1.0)


@pytest.fixture
def noisy_tmsv():
    """3·tmsv(0.25): isotropic and separable since 3 > e^{0.5}"""
    return QCM(3.0 * tmsv(0.25).mat, ModeLayout(1, 1))


@pytest.fixture
def product_state():
    return thermal(1.5, 1, 1)


@pytest.fixture
def random_2v2():
    return random_qcm(7, ModeLayout(2, 2), nu_max=3.0, squeeze_max=0.8)
