from tests.utils.constants import TEST_ROOT  # noqa: F401

pytest_plugins = [
    "tests.fixtures.config_files",
    "tests.fixtures.configs",
    "tests.fixtures.designs",
    "tests.fixtures.environment",
    "tests.fixtures.fake_filesystem",
    "tests.fixtures.resonators",
    "tests.fixtures.touchstone_files",
]


import numpy as np  # noqa: E402
import pytest  # noqa: E402
from _pytest.doctest import DoctestItem  # noqa: E402


@pytest.fixture(autouse=True)
def _legacy_numpy_repr_for_doctests(request):
    # Doctests were written against the pre-NumPy-2 scalar repr (``19.999``, not ``np.float64(19.999)``).
    if isinstance(request.node, DoctestItem) and np.lib.NumpyVersion(np.__version__) >= "2.0.0":
        with np.printoptions(legacy="1.25"):
            yield
    else:
        yield
