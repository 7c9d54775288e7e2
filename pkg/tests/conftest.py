import numpy as np
import pytest

from paranls import symbols as sy


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def cutoff():
    return sy.CutoffConfig(0.25)
