"""Pytest configuration and shared fixtures.

Meshes and swept branches are module-expensive, so they are built once per
session. Branch fixtures use a coarser amplitude grid than the CLI defaults.
"""

import sys
from pathlib import Path

import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.branch import sweep
from matool.bvp import make_nonlinearity
from matool.eigen import lambda1
from matool.mesh import build_mesh


@pytest.fixture(scope="session")
def mesh_small():
    """Coarse unit-ball mesh for cheap structural checks."""
    return build_mesh(257)


@pytest.fixture(scope="session")
def mesh():
    """Unit-ball mesh used by the accuracy tests."""
    return build_mesh(1025)


@pytest.fixture(scope="session")
def branch_mesh():
    return build_mesh(513)


@pytest.fixture(scope="session")
def lambda1_branch(branch_mesh):
    return lambda1(1, branch_mesh)


@pytest.fixture(scope="session")
def saturating_spec():
    """f(s) = s / (1 + s) in dimension 1: f0 = 1, finf = 0."""
    return make_nonlinearity("ratpow", 1, alpha=1, beta=1)


@pytest.fixture(scope="session")
def saturating_branch(saturating_spec, branch_mesh):
    return sweep(saturating_spec, branch_mesh, s_min=1e-3, s_max=1e3, points_per_decade=12)


@pytest.fixture(scope="session")
def exponential_branch(branch_mesh):
    spec = make_nonlinearity("exponential", 1)
    return sweep(spec, branch_mesh, s_min=1e-2, s_max=10.0, points_per_decade=16)


@pytest.fixture(scope="session")
def homogeneous_branch(branch_mesh):
    spec = make_nonlinearity("homogeneous", 1)
    return sweep(spec, branch_mesh, s_min=1e-3, s_max=1e3, points_per_decade=4)
