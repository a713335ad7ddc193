"""
Test configuration for wassquant.
"""

import os
import shutil
import tempfile
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
SLOW_ENV = "WASSQUANT_RUN_SLOW"


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run slow acceptance experiments",
    )


def pytest_configure(config):
    """Configure test environment."""
    config.addinivalue_line(
        "markers",
        "slow: long-running acceptance experiments "
        "(run with --runslow or WASSQUANT_RUN_SLOW=1)",
    )


def pytest_runtest_setup(item):
    """Skip slow experiments unless they were asked for."""
    if any(item.iter_markers(name="slow")):
        if not (item.config.getoption("--runslow") or os.environ.get(SLOW_ENV) == "1"):
            pytest.skip(f"slow experiment; use --runslow or {SLOW_ENV}=1")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def temp_dir():
    """Create and return a temporary directory that will be cleaned up."""
    path = tempfile.mkdtemp()
    yield Path(path)
    shutil.rmtree(path, ignore_errors=True)
