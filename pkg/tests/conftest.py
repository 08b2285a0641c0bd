import numpy as np
import pytest

from condgrad.harness import synthetic_dataset
from condgrad.network import FeedForwardNet


def line_net(w1, w2):
    return FeedForwardNet([1, 1, 1], [np.array([[w1]]), np.array([[w2]])])


def random_net(rng, sizes):
    return FeedForwardNet(sizes, [rng.standard_normal((sizes[j + 1], sizes[j])) for j in range(len(sizes) - 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blobs():
    return synthetic_dataset("gaussian_blobs", 300, seed=0)
