import numpy as np
import pytest

from fuzzydti.coredata import PairDataset


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


def make_pair_dataset(features, labels, prefix="p"):
    features = np.atleast_2d(np.asarray(features, dtype=float))
    n = features.shape[0]
    return PairDataset(
        [f"{prefix}d{i}" for i in range(n)],
        [f"{prefix}t{i}" for i in range(n)],
        features,
        np.asarray(labels, dtype=np.int8),
    )


@pytest.fixture
def small_pools():
    """40 positives around one corner, 60 candidates spread out."""
    gen = np.random.default_rng(99)
    pos = make_pair_dataset(gen.uniform(0.6, 1.0, size=(40, 6)), np.ones(40), prefix="pos")
    cand = make_pair_dataset(gen.uniform(0.0, 1.0, size=(60, 6)), np.zeros(60), prefix="cand")
    return pos, cand
