import numpy as np
import pytest

from aosoboost import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def two_point_dataset():
    """Two examples, two classes, one feature; splits cleanly at 1.5."""
    return Dataset.from_arrays([[1.0], [2.0]], [1, 2])


def random_probs(rng, n, k, alpha=1.0):
    """Rows drawn from a Dirichlet; strictly positive, sum to one."""
    return rng.dirichlet(np.full(k, alpha), size=n)


def random_dataset(rng, n, d, k, spread=3.0, noise=1.0):
    """Gaussian class blobs; moderately separable, never degenerate."""
    centers = rng.normal(0.0, spread, size=(k, d))
    labels = rng.integers(0, k, size=n)
    labels[:k] = np.arange(k)  # every class occurs
    x = centers[labels] + rng.normal(0.0, noise, size=(n, d))
    return Dataset.from_arrays(x, labels + 1)
