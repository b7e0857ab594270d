import sys
import pytest
from pathlib import Path

# Add project root to path so all project modules are importable from tests/
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

TEST_SEED = 20240611


@pytest.fixture
def rng():
    """A fresh, deterministically seeded generator per test."""
    import numpy as np
    return np.random.default_rng(TEST_SEED)


@pytest.fixture(scope="session")
def unit_circle():
    from integral_geometry import ImplicitSet
    return ImplicitSet.sphere(center=[0.0, 0.0], radius=1.0)


@pytest.fixture(scope="session")
def circle_pair():
    """(x^2+y^2-1)(x^2+y^2-4) = 0."""
    from polynomial_maps import MultiPoly
    from integral_geometry import ImplicitSet
    r2 = MultiPoly.from_terms(2, [((2, 0), 1.0), ((0, 2), 1.0)])
    return ImplicitSet([(r2 - 1.0) * (r2 - 4.0)])


@pytest.fixture(scope="session")
def line_model():
    """C^1 at tensor power 256, rank 1."""
    from model_geometry import PrequantumModel
    return PrequantumModel(n=1, k=256, rank=1)


@pytest.fixture
def results_dir(tmp_path):
    """Temporary output directory for CSV/JSON results."""
    out = tmp_path / "results"
    out.mkdir()
    return out
