"""
Shared fixtures: seeded generators, small labelled datasets and CSV helpers
"""

import numpy as np
import pytest

from ncentropy.data import save_csv
from ncentropy.models import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def two_blobs():
    """40 samples of two well separated 2-D classes"""
    rng = np.random.default_rng(7)
    first = rng.normal(-2.0, 0.3, size=(20, 2))
    second = rng.normal(2.0, 0.3, size=(20, 2))
    inputs = np.vstack([first, second])
    labels = np.array([0] * 20 + [1] * 20)
    return Dataset(inputs=inputs, labels=labels)


@pytest.fixture
def write_matrix(tmp_path):
    """Write a matrix (and optional labels) as CSV, returning the path"""
    def _write(matrix, name="matrix.csv", labels=None):
        path = tmp_path / name
        save_csv(np.asarray(matrix, dtype=np.float64), path, labels=labels)
        return path
    return _write
