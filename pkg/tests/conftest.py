import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


def random_bloch(rng, n=1, surface=False):
    """Uniform random Bloch vectors, on the sphere or in the ball."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if not surface:
        v *= rng.random(size=(n, 1)) ** (1.0 / 3.0)
    return v if n > 1 else v[0]
