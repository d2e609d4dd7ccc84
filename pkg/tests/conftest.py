import random

import pytest

from treedb import TableConfig


@pytest.fixture
def small_config():
    return TableConfig(capacity=1 << 12)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
