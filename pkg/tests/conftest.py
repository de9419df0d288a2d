import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dcfkit import derive_times, get_profile


@pytest.fixture(scope="session")
def params():
    return get_profile("dot11g-54")


@pytest.fixture(scope="session")
def times(params):
    return derive_times(params)
