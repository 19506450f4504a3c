from pathlib import Path

import numpy as np
import pytest

from ellipart.config import Config
from ellipart.datasets import LabeledDataset, gen_gaussians, gen_xor


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def xor_with_support():
    return gen_xor(support_radius=0.01, seed=0)


@pytest.fixture
def separated_blobs():
    return gen_gaussians(n_per_class=50, separation=25.0, seed=3)


@pytest.fixture
def three_blobs(rng):
    centers = np.array([(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)])
    points = np.vstack([c + rng.normal(size=(30, 2)) for c in centers])
    labels = np.repeat([0, 1, 2], 30)
    return LabeledDataset(points, labels, ("x", "y"), ("a", "b", "c"))


@pytest.fixture
def write_csv(tmp_path):
    def _write(text: str, name: str = "data.csv") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
