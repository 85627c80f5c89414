import pytest

from edgecoding.model import SystemConfig


@pytest.fixture
def default_cfg():
    return SystemConfig(K=6, N=6, m=60, mu=0.5, tau=0.005, eta=0.8)


@pytest.fixture
def tiny_cfg():
    return SystemConfig(K=2, N=2, m=2, mu=1.0, tau=1.0, eta=1.0, gamma=1.0)
