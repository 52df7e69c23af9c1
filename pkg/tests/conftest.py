import pytest

from hypercube_cdc import gf256


@pytest.fixture(params=gf256.available_backends())
def backend(request):
    """Run the test once per available GF(2^8) kernel."""
    previous = gf256.set_backend(request.param)
    yield request.param
    gf256.set_backend(previous)
