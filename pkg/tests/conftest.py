import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_kspace(rng, nx, ny, nc):
    return rng.standard_normal((nx, ny, nc)) + 1j * rng.standard_normal((nx, ny, nc))
