"""Tests for meshes, profiles and quadrature."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.errors import MeshError
from matool.mesh import (
    RadialProfile,
    build_mesh,
    count_sign_changes,
    origin_moments,
    quad_integrate,
    sample_profile,
    sup_norm,
    weight_preset,
)


class TestBuildMesh:
    """Tests for build_mesh."""

    def test_uniform_endpoints(self):
        """Nodes run from 0 to R."""
        mesh = build_mesh(65, radius=2.0)
        assert mesh.n == 65
        assert mesh.nodes[0] == 0.0
        assert mesh.radius == 2.0
        assert np.allclose(mesh.steps, 2.0 / 64)

    def test_geometric_clusters_toward_origin(self):
        """Geometric grading puts the smallest step at r = 0."""
        mesh = build_mesh(65, grading="geometric")
        assert mesh.steps[0] < mesh.steps[-1]
        assert mesh.radius == 1.0

    def test_weight_sampled(self):
        """The linear weight is 1 + r at every node."""
        mesh = build_mesh(33, a_preset="linear")
        assert np.allclose(mesh.a_values, 1.0 + mesh.nodes)

    def test_arrays_read_only(self):
        """Mesh arrays cannot be mutated in place."""
        mesh = build_mesh(33)
        with pytest.raises(ValueError):
            mesh.nodes[3] = 0.5

    def test_too_few_nodes(self):
        """Fewer than 16 nodes is rejected."""
        with pytest.raises(MeshError):
            build_mesh(8)

    def test_bad_radius(self):
        """Radius must be positive and finite."""
        with pytest.raises(MeshError):
            build_mesh(33, radius=0.0)
        with pytest.raises(MeshError):
            build_mesh(33, radius=math.inf)

    def test_unknown_grading(self):
        with pytest.raises(MeshError, match="grading"):
            build_mesh(33, grading="chebyshev")

    def test_simpson_needs_uniform(self):
        """Simpson weights are only built on uniform meshes."""
        with pytest.raises(MeshError, match="Simpson"):
            build_mesh(33, grading="geometric", quadrature="simpson")

    def test_vanishing_weight_rejected(self):
        """A weight that is zero everywhere is refused."""
        with pytest.raises(MeshError, match="vanishes"):
            build_mesh(33, a_preset=weight_preset("one", scale=0.0))


class TestWeightPreset:
    """Tests for weight presets."""

    def test_constant_presets(self):
        assert weight_preset("one").is_constant
        assert weight_preset("power", gamma=0.0).is_constant
        assert not weight_preset("linear").is_constant

    def test_power_values(self):
        """power evaluates r^gamma."""
        w = weight_preset("power", gamma=2.0)
        assert np.allclose(w(np.array([0.0, 0.5, 1.0])), [0.0, 0.25, 1.0])

    def test_unknown_preset(self):
        with pytest.raises(MeshError):
            weight_preset("gaussian")

    def test_negative_gamma(self):
        with pytest.raises(MeshError):
            weight_preset("power", gamma=-1.0)


# =============================================================================
# Quadrature and profiles
# =============================================================================


class TestQuadrature:
    """Tests for quad_integrate."""

    def test_trapezoid_quadratic(self):
        """Trapezoid rule integrates r^2 to second order."""
        mesh = build_mesh(1025)
        assert quad_integrate(mesh, mesh.nodes**2) == pytest.approx(1.0 / 3.0, rel=1e-5)

    def test_simpson_exact_for_cubic(self):
        """Simpson is exact for cubics."""
        mesh = build_mesh(33, quadrature="simpson")
        assert quad_integrate(mesh, mesh.nodes**3) == pytest.approx(0.25, abs=1e-12)

    def test_wrong_sample_count(self):
        mesh = build_mesh(33)
        with pytest.raises(MeshError):
            quad_integrate(mesh, np.ones(10))


class TestProfiles:
    """Tests for RadialProfile and helpers."""

    def test_shape_mismatch(self):
        mesh = build_mesh(33)
        with pytest.raises(MeshError):
            RadialProfile(mesh, np.ones(32), np.ones(33))

    def test_sample_with_finite_differences(self):
        """Derivative of r^2 by finite differences is 2r."""
        mesh = build_mesh(65)
        profile = sample_profile(mesh, lambda r: r**2)
        assert np.allclose(profile.dvalues, 2.0 * mesh.nodes, atol=1e-10)

    def test_admissible_positive(self):
        """cos(pi r / 2) is an admissible positive profile."""
        mesh = build_mesh(65)
        profile = sample_profile(
            mesh,
            lambda r: np.cos(0.5 * np.pi * r),
            lambda r: -0.5 * np.pi * np.sin(0.5 * np.pi * r),
        )
        assert profile.is_admissible_positive()
        assert not profile.scaled(-1.0).is_admissible_positive()

    def test_sup_norm(self):
        mesh = build_mesh(33)
        profile = sample_profile(mesh, lambda r: 3.0 * r - 2.0)
        assert sup_norm(profile) == pytest.approx(2.0)


class TestSignChanges:
    """Tests for count_sign_changes."""

    def test_counts_changes(self):
        assert count_sign_changes([1.0, -1.0, 2.0]) == 2

    def test_ignores_dead_band(self):
        """Values inside the dead band carry no sign."""
        assert count_sign_changes([1.0, -1e-14, 1.0]) == 0

    def test_constant_sign(self):
        assert count_sign_changes([0.0, 1.0, 2.0]) == 0


class TestOriginMoments:
    """Tests for the startup moments on [0, r_1]."""

    def test_constant_weight_closed_form(self):
        """For a = 1 and k = 1 the moments are r_1 and r_1^2 / 2."""
        mesh = build_mesh(101)
        r1 = float(mesh.nodes[1])
        m_w, m_v = origin_moments(mesh, 1.0)
        assert m_w == pytest.approx(r1)
        assert m_v == pytest.approx(0.5 * r1**2, rel=1e-8)

    def test_linear_weight_quadrature(self):
        """a = 1 + r, k = 2: M_w = r_1^2 + 2 r_1^3 / 3."""
        mesh = build_mesh(101, a_preset="linear")
        r1 = float(mesh.nodes[1])
        m_w, _ = origin_moments(mesh, 2.0)
        assert m_w == pytest.approx(r1**2 + 2.0 * r1**3 / 3.0, rel=1e-8)
