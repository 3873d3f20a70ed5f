# -*- coding: utf-8 -*-

"""
Pytest configuration and fixtures for aggrefem tests.
"""
import math

import numpy as np
import pytest

from hypothesis import HealthCheck
from hypothesis import settings

from aggrefem.interaction import GaussianKernel
from aggrefem.laws import PowerLaw
from aggrefem.mesh import Mesh
from aggrefem.mesh import build_structured_acute_mesh

settings.register_profile(
    'default', max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.register_profile('ci', max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile('default')

SQUARE = (-4.0, 4.0, -4.0, 4.0)


@pytest.fixture(scope='session')
def unit_mesh():
    """One macro cell on the unit square: 12 nodes, 14 triangles."""
    return build_structured_acute_mesh((0.0, 1.0, 0.0, 1.0), 1)


@pytest.fixture(scope='session')
def small_mesh():
    """2 x 2 macro cells on [-4, 4]^2."""
    return build_structured_acute_mesh(SQUARE, 2)


@pytest.fixture(scope='session')
def coarse_mesh():
    """8 x 8 macro cells on [-4, 4]^2."""
    return build_structured_acute_mesh(SQUARE, 8)


@pytest.fixture(scope='session')
def right_triangle():
    """Reference triangle (0,0), (1,0), (0,1)."""
    return Mesh.from_arrays([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)])


@pytest.fixture(scope='session')
def equilateral():
    """Unit equilateral triangle."""
    return Mesh.from_arrays([(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)], [(0, 1, 2)])


@pytest.fixture
def gaussian_kernel():
    """K(x) = exp(-|x|^2) / pi."""
    return GaussianKernel()


@pytest.fixture
def power_law():
    """A(s) = (0.1 / 3) s^3."""
    return PowerLaw(0.1, 3.0)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(12345)
