import numpy as np
import pytest

from prfilter.corpus import make_default_corpus, make_texture_corpus


@pytest.fixture(scope="session")
def default_corpus():
    return make_default_corpus()


@pytest.fixture(scope="session")
def texture_corpus():
    return make_texture_corpus()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
