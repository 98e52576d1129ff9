import pytest
from hypothesis import settings

from holder_approx._backend import HAVE_NUMBA

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
