"""Tests for the fixed-point operators and the damped Picard iteration."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.bvp import (
    NonlinearitySpec,
    amplitude_grid,
    make_nonlinearity,
    solve_amplitudes_for_lambda,
)
from matool.eigen import lambda1
from matool.errors import OperatorError
from matool.mesh import RadialProfile, build_mesh, sample_profile, sup_norm
from matool.operators import (
    OperatorSpec,
    apply_operator,
    fixed_point_check,
    phi_p,
    picard_iterate,
)

MU_1 = math.pi**2 / 4.0


@pytest.fixture(scope="module")
def cosine(mesh):
    return sample_profile(
        mesh,
        lambda r: np.cos(0.5 * np.pi * r),
        lambda r: -0.5 * np.pi * np.sin(0.5 * np.pi * r),
    )


class TestPhiP:
    def test_odd_power(self):
        assert phi_p(-2.0, 3.0) == pytest.approx(-4.0)

    def test_zero_maps_to_zero(self):
        assert phi_p(0.0, 2.5) == 0.0

    def test_p_two_is_identity(self):
        s = np.array([-1.0, 0.5])
        assert np.array_equal(phi_p(s, 2.0), s)


class TestOperatorSpec:
    """Tests for OperatorSpec validation."""

    def test_unknown_kind(self, mesh_small):
        with pytest.raises(OperatorError):
            OperatorSpec("T_x", mesh_small, 1.0)

    def test_eigen_operator_needs_p(self, mesh_small):
        with pytest.raises(OperatorError, match="p >= 2"):
            OperatorSpec("T_mu_p", mesh_small, 1.0, p=1.5)

    def test_load_positive(self, mesh_small):
        with pytest.raises(OperatorError):
            OperatorSpec("T_N", mesh_small, 0.0, N=1)

    def test_perturbation_must_vanish_at_zero(self, mesh_small):
        """T_g rejects g with g(s)/s^N not tending to 0."""
        spec = make_nonlinearity("ratpow", 1, alpha=1, beta=1)
        with pytest.raises(OperatorError, match="g"):
            OperatorSpec("T_g", mesh_small, 1.0, N=1, nonlinearity=spec)

    def test_nonlinearity_required(self, mesh_small):
        with pytest.raises(OperatorError):
            OperatorSpec("T_f", mesh_small, 1.0, N=1)


class TestApplyOperator:
    """Tests for apply_operator."""

    def test_eigenfunction_is_fixed(self, mesh, cosine):
        """T at mu_1 maps the principal eigenfunction to itself (p = 2)."""
        spec = OperatorSpec("T_mu_p", mesh, MU_1, p=2.0)
        image = apply_operator(spec, cosine)
        assert np.max(np.abs(image.values - cosine.values)) < 1e-5

    def test_boundary_values(self, mesh, cosine):
        """Images vanish at R and are flat at the origin."""
        spec = OperatorSpec("T_N", mesh, 1.0, N=2)
        image = apply_operator(spec, cosine)
        assert image.values[-1] == 0.0
        assert image.dvalues[0] == 0.0

    def test_scales_with_load(self, mesh, cosine):
        one = apply_operator(OperatorSpec("T_N", mesh, 1.0, N=1), cosine)
        three = apply_operator(OperatorSpec("T_N", mesh, 3.0, N=1), cosine)
        assert np.allclose(three.values, 3.0 * one.values)

    def test_negative_profile_rejected(self, mesh, cosine):
        spec = OperatorSpec("T_N", mesh, 1.0, N=1)
        with pytest.raises(OperatorError, match="non-negative"):
            apply_operator(spec, cosine.scaled(-1.0))

    def test_mesh_mismatch(self, mesh, mesh_small, cosine):
        spec = OperatorSpec("T_N", mesh_small, 1.0, N=1)
        with pytest.raises(OperatorError, match="different mesh"):
            apply_operator(spec, cosine)


class TestOperatorProperties:
    """Structural properties shared by the operators."""

    @pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
    def test_phi_conjugate_inverts(self, p):
        """phi_{p'}(phi_p(s)) = s with 1/p + 1/p' = 1."""
        s = np.linspace(-3.0, 3.0, 13)
        conjugate = p / (p - 1.0)
        assert np.allclose(phi_p(phi_p(s, p), conjugate), s, rtol=1e-12, atol=0.0)

    @pytest.mark.parametrize("N", [1, 2, 3])
    @pytest.mark.parametrize("c", [0.5, 3.0])
    def test_positively_homogeneous(self, mesh, cosine, N, c):
        spec = OperatorSpec("T_N", mesh, 1.0, N=N)
        base = apply_operator(spec, cosine)
        scaled = apply_operator(spec, cosine.scaled(c))
        assert np.allclose(scaled.values, c * base.values, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_monotone(self, mesh, cosine, N):
        """v <= w pointwise gives T_N v <= T_N w."""
        spec = OperatorSpec("T_N", mesh, 1.0, N=N)
        bump = sample_profile(mesh, lambda r: 0.1 * (1.0 - r**2), lambda r: -0.2 * r)
        larger = RadialProfile(mesh, cosine.values + bump.values, cosine.dvalues + bump.dvalues)
        low = apply_operator(spec, cosine).values
        high = apply_operator(spec, larger).values
        assert np.all(high >= low - 1e-15)
        assert high[0] > low[0]

    @pytest.mark.parametrize(
        "kind,N,preset",
        [("T_N", 1, None), ("T_N", 3, None), ("T_f", 1, "exponential"), ("T_f", 2, "ratpow")],
    )
    def test_image_concave_nonincreasing(self, mesh, cosine, kind, N, preset):
        f = make_nonlinearity(preset, N) if preset else None
        image = apply_operator(OperatorSpec(kind, mesh, 2.0, N=N, nonlinearity=f), cosine)
        slack = 1e-12 * np.max(image.values)
        assert np.all(np.diff(image.values) <= slack)
        assert np.all(np.diff(image.values, 2) <= slack)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_image_of_one(self, mesh, N):
        """T_N(1)(r) = (1 - r^2) / 2 in every dimension."""
        one = sample_profile(mesh, np.ones_like, np.zeros_like)
        image = apply_operator(OperatorSpec("T_N", mesh, 1.0, N=N), one)
        assert np.allclose(image.values, 0.5 * (1.0 - mesh.nodes**2), atol=1e-5)

    def test_zero_nonlinearity(self, mesh, cosine):
        zero = NonlinearitySpec("zero", 1, np.zeros_like, np.zeros_like, f0=0.0, finf=0.0)
        image = apply_operator(OperatorSpec("T_f", mesh, 5.0, N=1, nonlinearity=zero), cosine)
        assert np.all(image.values == 0.0)
        assert np.all(image.dvalues == 0.0)


class TestPicardIterate:
    """Tests for picard_iterate."""

    def test_contracts_to_zero(self, mesh, cosine):
        """A negligible f drives every start to (almost) zero."""
        f = make_nonlinearity("power", 1, alpha=2, coefficient=1e-12)
        spec = OperatorSpec("T_f", mesh, 1.0, N=1, nonlinearity=f)
        result = picard_iterate(spec, cosine, damping=0.7, tol=1e-10)
        assert result.converged
        assert sup_norm(result.profile) < 1e-9

    def test_divergence_reported(self, mesh, cosine):
        """Above mu_1 the eigen operator doubles the eigenfunction each step."""
        spec = OperatorSpec("T_mu_p", mesh, 2.0 * MU_1, p=2.0)
        result = picard_iterate(spec, cosine, damping=0.7)
        assert not result.converged
        assert "diverged" in result.diagnostic

    def test_iteration_budget(self, mesh, cosine):
        spec = OperatorSpec("T_mu_p", mesh, MU_1, p=2.0)
        result = picard_iterate(spec, cosine, tol=1e-300, max_iter=3)
        assert not result.converged
        assert result.iterations == 3

    def test_bad_damping(self, mesh, cosine):
        spec = OperatorSpec("T_N", mesh, 1.0, N=1)
        with pytest.raises(ValueError):
            picard_iterate(spec, cosine, damping=0.0)


class TestFixedPointCheck:
    """Picard iteration of T_f started at shooting solutions."""

    def test_stable_solution_reproduced(self, mesh):
        """s/(1+s) at twice lambda_1 has one stable solution; T_f iterates back onto it."""
        spec = make_nonlinearity("ratpow", 1, alpha=1, beta=1)
        lam = 2.0 * lambda1(1, mesh)
        shots = solve_amplitudes_for_lambda(lam, spec, mesh, amplitude_grid(1e-2, 1e2, 8))
        assert len(shots) == 1
        check = fixed_point_check(spec, mesh, lam, shots[0].profile)
        assert check.converged
        assert check.gap < 1e-5

    def test_unstable_solution_not_confirmed(self, mesh):
        """The upper e^s solution repels the iteration."""
        spec = make_nonlinearity("exponential", 1)
        shots = solve_amplitudes_for_lambda(0.5, spec, mesh, amplitude_grid(1e-2, 10.0, 16))
        assert len(shots) == 2
        check = fixed_point_check(spec, mesh, 0.5, shots[1].profile)
        assert not check.converged or check.gap > 1e-2
