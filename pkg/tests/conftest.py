import pytest

from perimfix import kernels
from perimfix.search import builtin_instance

BACKENDS = [kernels.numpy_kernels] + ([kernels.numba_kernels] if kernels.numba_kernels is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda b: b.name)
def backend(request):
    return request.param


@pytest.fixture(params=["ex1", "cyclic7", "nadler-gap"])
def builtin(request):
    return request.param, *builtin_instance(request.param)
