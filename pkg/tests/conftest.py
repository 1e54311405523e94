import numpy as np
import pytest

from grasslink import packaged_codebook


@pytest.fixture(scope="session")
def t4k64():
    return packaged_codebook(4, 64)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
