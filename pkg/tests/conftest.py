import functools

import numpy as np
import pytest

from wfk.kenmotsu import build_example2

GRID = [
    (n, s, beta, c)
    for n in (1, 2)
    for s in (1, 2, 3)
    for beta in (-1.0, 0.5, 1.0)
    for c in (0.0, 1.0)
]


@functools.lru_cache(maxsize=None)
def example_manifold(n=1, s=2, beta=1.0, c=1.0):
    """Shared cached instance of the explicit chart model."""
    return build_example2(n, s, beta, c)


def seeded_points(dim, count=5, seed=42, box=(-0.5, 0.5)):
    rng = np.random.default_rng(seed)
    return [rng.uniform(box[0], box[1], dim) for _ in range(count)]


@pytest.fixture
def e2():
    """The 4-dimensional reference instance (n=1, s=2, beta=1, c=1)."""
    return example_manifold()


@pytest.fixture
def origin():
    return np.zeros(4)
