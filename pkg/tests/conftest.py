import math

import numpy as np
import pytest

from fidelity import MapParams

PI = math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig1_params():
    return MapParams(1000, 0.95, 0.015)


@pytest.fixture
def fig2_params():
    return MapParams(200, 0.7, 0.02)


@pytest.fixture
def fig4_params():
    return MapParams(100, 2.0, 0.03)


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, n):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)
