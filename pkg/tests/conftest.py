import pytest

from ctxscope import build_network


@pytest.fixture(scope="session")
def network():
    return build_network()
