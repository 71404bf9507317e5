import numpy as np
import pytest
from hypothesis import settings

from oscchain import InteractionKernel, SpectralMeasure

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def s1_kernel():
    return InteractionKernel(np.array([3.0, -1.0]))


@pytest.fixture
def s1_measure():
    return SpectralMeasure(np.array([[3.0, 0.5]]))


@pytest.fixture
def uncoupled():
    return InteractionKernel(np.array([4.0]))
