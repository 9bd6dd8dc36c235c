import numpy as np
import pytest

from longtrack import colornames


@pytest.fixture(scope="session")
def color_table():
    return colornames.load_table()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_patch(rng, h, w):
    return rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)
