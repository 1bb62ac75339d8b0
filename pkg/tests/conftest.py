import pytest

from tpgr import _backend


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    prev = _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(prev)
