import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from twistcyl.limits import run  # noqa: E402


@functools.lru_cache(maxsize=None)
def cached_run(pattern_id, epsilon):
    """(embedding, bundle, record) for one run; shared by every test module."""
    return run(pattern_id, epsilon)


@pytest.fixture(scope="session")
def runs():
    return cached_run


@pytest.fixture(scope="session")
def headline():
    return cached_run("P1", 0.1)
