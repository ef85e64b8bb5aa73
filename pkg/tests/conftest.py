import math

import numpy as np
import pytest

from berrygate.dynamics import PropagationConfig
from berrygate.scenario import default_scenario

TWO_PI = 2.0 * math.pi


@pytest.fixture
def fast_prop():
    """Looser tolerances for unit tests; observables here are asserted at
    the 1e-6 level or coarser."""
    return PropagationConfig(rel_tol=1e-9, abs_tol=1e-11)


@pytest.fixture
def default_cfg():
    return default_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)
