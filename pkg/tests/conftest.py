import numpy as np
import pytest

from bftex.synthetic import generate_suite


@pytest.fixture(scope="session")
def synthetic_suite(tmp_path_factory):
    """Bundled synthetic texture suite, generated once per session."""
    out = tmp_path_factory.mktemp("suite")
    manifest = generate_suite(out, n_classes=8, per_class=20, size=64, seed=0)
    return manifest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
