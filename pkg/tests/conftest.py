"""
Shared fixtures for the Dyson Lab test suite.
"""

import os

os.environ.setdefault("DYSON_LAB_ENV", "testing")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from dysonlab.core.config import config  # noqa: E402
from dysonlab.utils.helpers import RngStream, get_run_stats  # noqa: E402


@pytest.fixture(autouse=True)
def testing_config():
    """Reload the testing environment around every test."""
    config.load("testing")
    get_run_stats().reset()
    yield config
    config.load("testing")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def stream():
    return RngStream(20240611)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside an empty directory so result files land in tmp_path."""
    monkeypatch.chdir(tmp_path)
    return tmp_path
