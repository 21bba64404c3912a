import os

import pytest
from threadpoolctl import threadpool_limits

from dnt.data.manifest import DatasetManifest
from dnt.data.synth import synth_texture_dataset


@pytest.fixture(scope="session", autouse=True)
def single_threaded_blas():
    # acceptance-style determinism: every test runs with one BLAS thread
    with threadpool_limits(limits=1):
        yield


@pytest.fixture(scope="session")
def texture_set(tmp_path_factory):
    """The desk-scale synthetic set: K=4, 70 per class, 64x64, sigma 20, seed 1."""
    root = tmp_path_factory.mktemp("texture_set")
    path = synth_texture_dataset(str(root), num_classes=4, per_class=70, image_size=64,
                                 noise_sigma=20.0, seed=1)
    return DatasetManifest.read(path)


@pytest.fixture(scope="session")
def tiny_set(tmp_path_factory):
    """4 classes x 8 images of 64x64 for fast training smoke tests."""
    root = tmp_path_factory.mktemp("tiny_set")
    path = synth_texture_dataset(str(root), num_classes=4, per_class=8, image_size=64,
                                 noise_sigma=20.0, seed=3, split_ratio=0.5)
    assert os.path.exists(path)
    return DatasetManifest.read(path)
