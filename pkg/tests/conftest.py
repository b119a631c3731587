import numpy as np
import pytest

SEED = 20260815


@pytest.fixture
def rng():
    """Fresh deterministic generator per test."""
    return np.random.default_rng(SEED)
