import numpy as np
import pytest

from beamlab import assemble_generator, default_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()


def _op(n):
    return assemble_generator(default_config().replace(n_left=n, n_right=n))


@pytest.fixture(scope="session")
def op16():
    return _op(16)


@pytest.fixture(scope="session")
def op24():
    return _op(24)


@pytest.fixture(scope="session")
def op32():
    return _op(32)


@pytest.fixture(scope="session")
def op48():
    return _op(48)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240901)
