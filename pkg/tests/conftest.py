import numpy as np
import pytest

from symorbit.darwin import ReturnMapBlocks, random_return_map


def rotation_matrix(theta):
    return ReturnMapBlocks.rotation(theta).matrix


def random_maps(count, sizes=(1, 2, 3, 4), offset=0):
    """Seeded random Darwin maps, cycling through the given half dimensions."""
    for seed in range(offset, offset + count):
        n = sizes[seed % len(sizes)]
        yield seed, random_return_map(n, seed)


@pytest.fixture
def rotation():
    return ReturnMapBlocks.rotation(np.pi / 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
