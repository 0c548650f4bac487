import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from reluswap.net_ir import make_network

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_host(seed: int, d: int = 2, N: int = 8, L: int = 3, scale: float = 1.0):
    rng = np.random.default_rng(seed)
    layers, fan = [], d
    for _ in range(L):
        layers.append((rng.uniform(-scale, scale, (N, fan)), rng.uniform(-scale, scale, N), "relu"))
        fan = N
    layers.append((rng.uniform(-scale, scale, (1, fan)), rng.uniform(-scale, scale, 1), "identity"))
    return make_network(d, layers)


def abs_net():
    return make_network(1, [([[1.0], [-1.0]], [0.0, 0.0], "relu"), ([[1.0, 1.0]], [0.0], "identity")])


@pytest.fixture
def host():
    return random_host


@pytest.fixture
def absolute():
    return abs_net()
