"""Tests for the flux integrator and the vectorized bracketing helpers."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.mesh import build_mesh, radial_forcing
from matool.shooting import (
    expand_upper,
    first_crossing,
    linear_bisect,
    log_bisect,
    march_flux,
    odd_root,
    sentinel_terminal,
)


class TestOddRoot:
    def test_sign_preserved(self):
        assert odd_root(np.array([-8.0]), 3.0)[0] == pytest.approx(-2.0)

    def test_identity_for_k_one(self):
        w = np.array([-1.5, 2.0])
        assert odd_root(w, 1) is w


class TestMarchFlux:
    """Tests for march_flux."""

    def test_harmonic_oscillator(self):
        """k = 1, g(v) = v: v'' = -mu v has v = cos(sqrt(mu) r)."""
        mesh = build_mesh(513)
        mus = np.array([1.0, 2.0, 4.0])
        root = np.sqrt(mus)
        r1 = mesh.nodes[1]
        traj = march_flux(
            mesh,
            1.0,
            radial_forcing(mesh, 1.0),
            mus,
            lambda v: v,
            np.ones(3),
            np.cos(root * r1),
            root * np.sin(root * r1),
        )
        assert traj.v.shape == (513, 3)
        assert np.allclose(traj.v[-1], np.cos(root), atol=1e-8)
        assert np.allclose(traj.dv[-1], -root * np.sin(root), atol=1e-8)

    def test_flux_starts_at_zero(self):
        mesh = build_mesh(33)
        traj = march_flux(
            mesh, 2.0, radial_forcing(mesh, 2.0), 1.0, lambda v: v, [1.0], [1.0], [0.0]
        )
        assert traj.w[0, 0] == 0.0
        assert traj.v[0, 0] == 1.0


# =============================================================================
# Terminal values
# =============================================================================


class TestSentinelTerminal:
    """Tests for first_crossing and sentinel_terminal."""

    def test_positive_column_returns_value(self):
        nodes = np.array([0.0, 0.5, 1.0])
        v = np.array([[1.0], [0.8], [0.6]])
        terminal, r_hat = sentinel_terminal(v, nodes)
        assert terminal[0] == pytest.approx(0.6)
        assert math.isnan(r_hat[0])

    def test_crossing_column_returns_negative_distance(self):
        """Crossing at r = 0.75 gives -(R - 0.75)."""
        nodes = np.array([0.0, 0.5, 1.0])
        v = np.array([[1.0], [0.5], [-0.5]])
        terminal, r_hat = sentinel_terminal(v, nodes)
        assert r_hat[0] == pytest.approx(0.75)
        assert terminal[0] == pytest.approx(-0.25)

    def test_non_finite_counts_as_crossing(self):
        nodes = np.array([0.0, 0.5, 1.0])
        v = np.array([[1.0], [np.nan], [np.nan]])
        r_hat, crossed = first_crossing(v, nodes)
        assert crossed[0]
        assert r_hat[0] == pytest.approx(0.0)

    def test_batch_columns_independent(self):
        nodes = np.array([0.0, 0.5, 1.0])
        v = np.array([[1.0, 1.0], [0.8, 0.5], [0.6, -0.5]])
        terminal, _ = sentinel_terminal(v, nodes)
        assert terminal[0] > 0 > terminal[1]


# =============================================================================
# Bracketing
# =============================================================================


class TestExpandUpper:
    """Tests for expand_upper."""

    def test_finds_bracket(self):
        """hi grows by 4 until terminal(hi) <= 0."""
        lo, hi, found = expand_upper(lambda x, idx: 10.0 - x, [1.0], [2.0])
        assert found[0]
        assert lo[0] == pytest.approx(8.0)
        assert hi[0] == pytest.approx(32.0)

    def test_cap_reached(self):
        """Members still positive at the cap are reported as not found."""
        _, hi, found = expand_upper(lambda x, idx: 10.0 - x, [1.0], [2.0], cap=5.0)
        assert not found[0]
        assert hi[0] == pytest.approx(5.0)

    def test_members_tracked_separately(self):
        roots = np.array([3.0, 100.0])
        _, hi, found = expand_upper(lambda x, idx: roots[idx] - x, [1.0, 1.0], [2.0, 2.0])
        assert found.all()
        assert hi[0] == pytest.approx(8.0)
        assert hi[1] == pytest.approx(128.0)


class TestBisection:
    """Tests for log_bisect and linear_bisect."""

    @pytest.mark.parametrize("fan", [1, 7])
    def test_log_bisect_converges(self, fan):
        lo, hi = log_bisect(lambda x, idx: 2.0 - x, [1.0], [4.0], rtol=1e-12, fan=fan)
        assert lo[0] <= 2.0 <= hi[0]
        assert hi[0] / lo[0] - 1.0 <= 1e-12

    def test_log_bisect_batch(self):
        roots = np.array([1.5, 3.0, 7.0])
        lo, _ = log_bisect(lambda x, idx: roots[idx] - x, np.ones(3), np.full(3, 8.0))
        assert np.allclose(lo, roots, rtol=1e-9)

    def test_linear_bisect_crosses_zero(self):
        """A bracket straddling zero is handled in linear space."""
        lo, hi = linear_bisect(lambda x, idx: -0.5 - x, [-2.0], [3.0], tol=1e-12, fan=5)
        assert lo[0] == pytest.approx(-0.5, abs=1e-11)
        assert hi[0] - lo[0] <= 1e-12

    def test_low_end_keeps_positive_terminal(self):
        lo, _ = linear_bisect(lambda x, idx: 1.0 - x, [0.0], [5.0])
        assert 1.0 - lo[0] > 0
