import numpy as np
import pytest

from polyfm import SparseDataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n=30, d=8, density=0.5, noise=0.1):
    X = rng.normal(size=(n, d)) * (rng.random((n, d)) < density)
    P = rng.normal(size=(d, 2))
    Z = X @ P
    y = Z[:, 0] * Z[:, 1] + noise * rng.normal(size=n)
    return SparseDataset.from_dense(X, y)


@pytest.fixture
def small_ds(rng):
    return random_dataset(rng)
