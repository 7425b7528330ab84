import numpy as np
import pytest

from beamtune.assets import default_payload, default_system


@pytest.fixture(scope="session")
def system():
    """The packaged synthetic system; cached for the whole test session."""
    return default_system()


@pytest.fixture(scope="session")
def payload():
    return default_payload()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
