"""Shared fixtures: small meshes and spaces reused across test modules."""

import numpy as np
import pytest

from wcmo.mesh import Domain, uniform_mesh
from wcmo.space import BoundaryRegion, build_space


@pytest.fixture(scope="session")
def unit_mesh_2x2():
    return uniform_mesh(Domain.unit_square(), 1)


@pytest.fixture(scope="session")
def unit_mesh_4x4():
    return uniform_mesh(Domain.unit_square(), 2)


@pytest.fixture(scope="session")
def space_2x2_p1(unit_mesh_2x2):
    return build_space(unit_mesh_2x2, 1, BoundaryRegion.all())


@pytest.fixture(scope="session")
def space_4x4_p2(unit_mesh_4x4):
    return build_space(unit_mesh_4x4, 2, BoundaryRegion.all())


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
