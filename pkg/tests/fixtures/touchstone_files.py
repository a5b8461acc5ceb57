import pytest

from tests.utils.constants import TEST_DATA_ROOT


@pytest.fixture
def touchstone_file(request):
    return request.getfixturevalue(request.param)


@pytest.fixture
def bad_option_line_file():
    return TEST_DATA_ROOT / "bad_option_line.s2p"


@pytest.fixture
def non_monotone_file():
    return TEST_DATA_ROOT / "non_monotone.s2p"


@pytest.fixture
def wrapped_file():
    return TEST_DATA_ROOT / "wrapped.s2p"


@pytest.fixture
def one_port_file():
    return TEST_DATA_ROOT / "one_port.s1p"
