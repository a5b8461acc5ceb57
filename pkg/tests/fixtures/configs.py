import pytest


@pytest.fixture
def config(request):
    return request.getfixturevalue(request.param)


@pytest.fixture
def config_empty():
    return {}


@pytest.fixture
def config_serial():
    return {"parallel": "no", "quiet": "yes"}


@pytest.fixture
def config_fast_fit():
    return {"fit_restarts": "2", "fit_max_iterations": "500", "parallel": "no"}


@pytest.fixture
def config_real_and_imaginary():
    return {"touchstone_format": "RI", "touchstone_frequency_unit": "MHz"}
