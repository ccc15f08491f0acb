import time
import warnings

import numpy as np
import pytest

from hybridqed import ModelParams, TruncationSpec, build_space, dress, sweep
from hybridqed.errors import SecularityWarning

GRID = np.round(np.linspace(0.6, 1.4, 161), 12)

#: wall time of the shared sweep fixtures, for runtime criteria
TIMINGS = {}


def timed(name, fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    TIMINGS[name] = time.perf_counter() - t0
    return out


def quiet_dress(p, t=TruncationSpec(), **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SecularityWarning)
        return dress(p, build_space(t), **kw)


@pytest.fixture(scope="session")
def space55():
    return build_space(TruncationSpec())


@pytest.fixture(scope="session")
def default_dressed(space55):
    return dress(ModelParams(), space55)


@pytest.fixture(scope="session")
def broken_dressed(space55):
    return quiet_dress(ModelParams(theta=np.pi / 4))


@pytest.fixture(scope="session")
def linear_dressed():
    return quiet_dress(ModelParams(g=0.0, omega_p=0.0))


@pytest.fixture(scope="session")
def grid():
    return GRID


@pytest.fixture(scope="session")
def master_pi2():
    return timed("master_pi2", sweep, ModelParams(), GRID, engine="master")


@pytest.fixture(scope="session")
def weak_pi2():
    return timed("weak_pi2", sweep, ModelParams(), GRID, engine="weakdrive")


@pytest.fixture(scope="session")
def master_pi4():
    return timed("master_pi4", sweep, ModelParams(theta=np.pi / 4), GRID, engine="master")
