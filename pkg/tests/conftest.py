import numpy as np
import pytest

from palettekit import decomposer, pipeline, testimages


@pytest.fixture(scope="session")
def blob_image():
    return testimages.blob_scene(96, 96, seed=5, n_blobs=4)


@pytest.fixture(scope="session")
def blob_decomposition(blob_image):
    """Shared palette/state/weights so tests don't repeat the 5D stage."""
    return pipeline.decompose(blob_image)


@pytest.fixture(scope="session")
def gray_ramp_512():
    return testimages.gray_ramp(512, 512)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
