# tests/conftest.py

"""
Shared pytest fixtures and configuration for all tests
"""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from qsvrg.core.config import init_config
from qsvrg.core.quadratic import reference_minimizer
from qsvrg.core.schemas import Method, TraceFile
from qsvrg.services.oracles import least_squares_oracle, ridge_oracle
from qsvrg.storage.datasets import synthetic_problem


@pytest.fixture(autouse=True)
def fresh_config():
    """Reset the global configuration before every test"""
    return init_config()


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files"""
    temp_path = Path(tempfile.mkdtemp(prefix="qsvrg_test_"))
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture(scope="session")
def regression_data():
    """Small well-conditioned synthetic regression problem (n=60, d=4)"""
    return synthetic_problem(60, 4, 10.0, seed=3)


@pytest.fixture(scope="session")
def ls_oracle(regression_data):
    design, y = regression_data
    return least_squares_oracle(design, y)


@pytest.fixture(scope="session")
def ridge(regression_data):
    """Ridge oracle with lambda = L̄/n and its reference solution"""
    design, y = regression_data
    oracle = ridge_oracle(design, y, design.lbar / design.n)
    return oracle, reference_minimizer(oracle.problem)


@pytest.fixture
def two_blobs():
    """Two well-separated Gaussian classes in the plane, 100 points each"""
    rng = np.random.default_rng(7)
    first = rng.normal(loc=(0.0, 0.0), scale=0.5, size=(100, 2))
    second = rng.normal(loc=(4.0, 4.0), scale=0.5, size=(100, 2))
    points = np.vstack([first, second])
    labels = np.repeat([1, 2], 100)
    return points, labels


# Configure pytest
def pytest_configure(config):
    """Configure pytest with custom markers"""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")


@pytest.fixture
def make_trace():
    """Factory for trace records of one ridge problem"""

    def make(method=Method.QSVRG, seed=0, points=None, g_star=0.125, **overrides):
        fields = dict(
            dataset="synthetic:60,4,10.0,3",
            n=60,
            d=4,
            problem="ridge:1.0",
            lambda_=0.1 / 3,
            method=method,
            seed=seed,
            alpha=1.0,
            l=4,
            m=60,
            g_star=g_star,
            residual=1e-16,
            points=points if points is not None else [(0.0, 0.5), (2.0, 0.01), (4.0, 1e-5)],
            passes=8.0,
            seed_base=0,
            gradient_count=480,
        )
        fields.update(overrides)
        return TraceFile(**fields)

    return make
