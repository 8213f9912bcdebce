import pytest

from cdshedge.config import AppConfig, build_inputs


@pytest.fixture(scope="session")
def inputs():
    """Default model inputs: 21 quarters, 2% rate, 500 bp spread, five quotes,
    30% one-year default probability, truncated-normal recovery."""
    return build_inputs(AppConfig())


@pytest.fixture(scope="session")
def grid(inputs):
    return inputs.grid


@pytest.fixture(scope="session")
def curve(inputs):
    return inputs.curve


@pytest.fixture(scope="session")
def market(inputs):
    return inputs.market


@pytest.fixture(scope="session")
def measure(inputs):
    return inputs.measure
