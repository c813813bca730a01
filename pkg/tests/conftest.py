import numpy as np
import pytest

from lcanon import log


@pytest.fixture
def rng():
    return np.random.default_rng(20230517)


@pytest.fixture(autouse=True)
def no_logfile():
    log.logfile = None
    yield
    log.logfile = None
