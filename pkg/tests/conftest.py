import numpy as np
import pytest

from pulsekit.experiments import cr_chain, heisenberg_chain, ising_all2all
from pulsekit.schedule import Simulator


@pytest.fixture(scope="session")
def sim():
    return Simulator()


@pytest.fixture(scope="session")
def ising3():
    return ising_all2all()


@pytest.fixture(scope="session")
def cr4():
    return cr_chain()


@pytest.fixture(scope="session")
def heis4():
    return heisenberg_chain()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def fit_loglog(xs, ys):
    return float(np.polyfit(np.log(np.asarray(xs)), np.log(np.asarray(ys)), 1)[0])
