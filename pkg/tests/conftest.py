import sys

import pytest

from cmpartitions.precision import PrecisionConfig

sys.set_int_max_str_digits(2_000_000)


@pytest.fixture
def cfg256():
    return PrecisionConfig(256, 4096)


@pytest.fixture
def cfg512():
    return PrecisionConfig(512, 8192)
