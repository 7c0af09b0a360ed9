import numpy as np
import pytest

from crcvasicek import VasicekParams


def random_stationary_params(gen: np.random.Generator, n: int, delta: float = 1.0 / 252.0):
    """Random stationary model with a lower-triangular volatility root."""
    beta = np.diag(gen.uniform(0.3, 0.99, size=n))
    low = np.zeros((n, n))
    low[np.tril_indices(n)] = gen.uniform(-1.0, 1.0, size=n * (n + 1) // 2) * 2e-3
    low[np.diag_indices(n)] = gen.uniform(0.5e-3, 2e-3, size=n)
    b = gen.uniform(-1e-3, 1e-3, size=n)
    return VasicekParams(b=b, beta=beta, sigma_sqrt=low, delta=delta)


def random_factor(gen: np.random.Generator, n: int):
    return gen.uniform(-0.01, 0.02, size=n)


@pytest.fixture
def gen():
    return np.random.default_rng(20260826)


@pytest.fixture
def params3(gen):
    return random_stationary_params(gen, 3)


@pytest.fixture
def params2(gen):
    return random_stationary_params(gen, 2)
