"""Shared fixtures."""

import numpy as np
import pytest

from trpcalab.settings import reset_settings


@pytest.fixture
def rng():
    """Seeded generator so every test sees the same draws."""
    return np.random.default_rng(20240611)


@pytest.fixture
def random_tensor(rng):
    """Factory for standard normal tensors of a given shape."""
    def make(*shape):
        return rng.standard_normal(shape)
    return make


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()
