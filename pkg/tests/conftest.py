import numpy as np
import pytest

import nlss


@pytest.fixture
def square():
    return nlss.SQUARE_TORUS


@pytest.fixture
def irrational():
    return nlss.TorusGeometry((1.0, 2 ** -0.5, 3 ** -0.5))


@pytest.fixture
def standard():
    return nlss.Convention.STANDARD


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)


@pytest.fixture
def boltzmann():
    return nlss.Boltzmann(beta=1.0)
