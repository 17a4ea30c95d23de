import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

SEED = 12334567

settings.register_profile("fast", max_examples=25, deadline=None)
settings.load_profile("fast")


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False,
                     help="run the slow training tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: slow training tests, run with --long")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip = pytest.mark.skip(reason="needs --long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='function')
def rng():
    """Same numbers on every run."""
    return np.random.default_rng(SEED)


@pytest.fixture(autouse=True)
def isolated_output(tmp_path, monkeypatch):
    """Result files go to the test's temporary directory."""
    monkeypatch.setenv("RTEPINN_OUTPUT_ROOT", str(tmp_path / "results"))
