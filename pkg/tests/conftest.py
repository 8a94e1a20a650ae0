import pytest

from toporag.embedding import DeterministicProvider


@pytest.fixture
def provider():
    return DeterministicProvider(dim=16, seed=7)
