import numpy as np
import pytest

from ellipart import exceptions as ex
from ellipart.config import Config
from ellipart.datasets import LabeledDataset, gen_gaussians
from ellipart.partition import train_ensemble
from ellipart.plot import CELL_GID_PREFIX, plot_partition


def test_one_group_per_ellipsoid(tmp_path, xor_with_support):
    ensemble = train_ensemble(xor_with_support, Config())
    path = tmp_path / "xor.svg"
    drawn = plot_partition(ensemble, path, xor_with_support, title="XOR")

    svg = path.read_text()
    assert drawn == len(ensemble.models[0].cells)
    assert svg.count(f'id="{CELL_GID_PREFIX}') == drawn
    assert 'id="ellipsoid-0-0"' in svg


def test_multiclass_plot(tmp_path, three_blobs):
    ensemble = train_ensemble(three_blobs, Config())
    path = tmp_path / "blobs.svg"
    drawn = plot_partition(ensemble, path)

    assert drawn == sum(len(m.cells) for m in ensemble.models)
    assert path.read_text().count(f'id="{CELL_GID_PREFIX}') == drawn


def test_plot_needs_two_features(tmp_path):
    d = gen_gaussians(n_per_class=20, separation=30.0, seed=0, dimension=3)
    ensemble = train_ensemble(d, Config())
    with pytest.raises(ex.PlotDimension):
        plot_partition(ensemble, tmp_path / "3d.svg")


def test_plot_rejects_mismatched_points(tmp_path, xor_with_support):
    ensemble = train_ensemble(xor_with_support, Config())
    points = LabeledDataset(np.zeros((2, 3)) + np.arange(2)[:, None], [0, 1])
    with pytest.raises(ex.PlotDimension):
        plot_partition(ensemble, tmp_path / "bad.svg", points)
