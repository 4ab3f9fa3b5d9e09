"""Test fixtures for the CT-Rex selector tests."""

import os

import numpy as np
import pytest
from dotenv import load_dotenv
from pytest_bdd import parsers, then

from ctrex_selector.cnum import make_rng, sample_complex_matrix
from ctrex_selector.complex_csv import write_complex_csv


def pytest_configure(config):
    """Register custom markers."""
    load_dotenv()
    config.addinivalue_line(
        "markers", "slow: long Monte-Carlo acceptance runs (enable with CTREX_SLOW_TESTS=1)"
    )


def pytest_collection_modifyitems(config, items):
    if os.getenv("CTREX_SLOW_TESTS") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set CTREX_SLOW_TESTS=1 to run Monte-Carlo acceptance runs")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def context():
    """Shared context dictionary for BDD tests."""
    return {}


@pytest.fixture
def rng():
    """Fixed-seed generator for test data."""
    return make_rng(20240601)


@pytest.fixture
def planted_problem(rng):
    """
    Noiseless 5-sparse problem with n = 150, p = 20.

    Support {2, 7, 11, 15, 18} with unit-modulus coefficients.
    """
    n, p = 150, 20
    support = np.array([2, 7, 11, 15, 18])
    X = sample_complex_matrix(rng, n, p)
    beta = np.zeros(p, dtype=np.complex128)
    beta[support] = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, support.size))
    return X, X @ beta, support


@pytest.fixture
def noise_problem(rng):
    """Response independent of the design: n = 100, p = 50."""
    X = sample_complex_matrix(rng, 100, 50)
    y = sample_complex_matrix(rng, 100, 1)[:, 0]
    return X, y


@pytest.fixture
def planted_files(tmp_path, planted_problem):
    """The planted problem written as paired-column CSV files."""
    X, y, support = planted_problem
    x_path = tmp_path / "X.csv"
    y_path = tmp_path / "y.csv"
    write_complex_csv(x_path, X)
    write_complex_csv(y_path, y, names=["y"])
    return x_path, y_path, support


@then(parsers.parse('a {error_name} should be raised'))
def error_raised(context, error_name):
    """Check the error captured by the preceding step."""
    error = context.get('error')
    assert error is not None, "Expected an error but none was raised"
    names = [cls.__name__ for cls in type(error).__mro__]
    assert error_name in names, f"Expected {error_name}, got {type(error).__name__}: {error}"
