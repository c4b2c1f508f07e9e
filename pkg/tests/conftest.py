import numpy as np
import pytest

from nlwaves.grid import GridSpec
from nlwaves.kernels import KernelSpec
from nlwaves.stencil import build_stencil


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def const_kernel_1d():
    return KernelSpec("constant", delta=0.25, d=1)


@pytest.fixture(scope="session")
def grid_1d():
    return GridSpec(h=2**-4, delta=0.25, beta=1.0, d=1)


@pytest.fixture(scope="session")
def stencil_1d(const_kernel_1d, grid_1d):
    return build_stencil(const_kernel_1d, grid_1d, p=1)


@pytest.fixture(scope="session")
def const_kernel_2d():
    return KernelSpec("constant", delta=0.25, d=2)


@pytest.fixture(scope="session")
def grid_2d():
    return GridSpec(h=2**-3, delta=0.25, beta=1.0, d=2)


@pytest.fixture(scope="session")
def stencil_2d(const_kernel_2d, grid_2d):
    return build_stencil(const_kernel_2d, grid_2d, p=1)
