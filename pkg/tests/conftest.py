import pytest

from snpc import corpus
from snpc.experiment import compiled


@pytest.fixture(scope="session")
def net_of():
    """Compiled corpus networks, shared across the session (auto write-back bound)."""
    return compiled


@pytest.fixture(scope="session")
def program():
    return corpus.load
