"""Tests for nonlinearities, the shooting solver and solution hygiene."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.bvp import (
    INF,
    check_limits,
    double_zero_check,
    integrate_ivp,
    make_nonlinearity,
    quotient_bounds,
    solution_hygiene,
    solve_amplitudes_for_lambda,
    solve_lambda_batch,
    solve_lambda_for_amplitude,
    threshold,
)
from matool.errors import BracketError, NonlinearityError
from matool.mesh import build_mesh, sample_profile

QUARTER_PI_SQUARED = math.pi**2 / 4.0


# =============================================================================
# Nonlinearities
# =============================================================================


class TestMakeNonlinearity:
    """Tests for make_nonlinearity presets and declared limits."""

    def test_power_limits(self):
        spec = make_nonlinearity("power", 1, alpha=2)
        assert spec.f0 == 0.0
        assert spec.finf == INF

    def test_power_below_dimension(self):
        spec = make_nonlinearity("power", 2, alpha=1)
        assert spec.f0 == INF
        assert spec.finf == 0.0

    def test_saturating(self, saturating_spec):
        assert saturating_spec.f0 == 1.0
        assert saturating_spec.finf == 0.0
        assert check_limits(saturating_spec) == []

    def test_exponential(self):
        spec = make_nonlinearity("exponential", 1)
        assert spec.f0 == INF
        assert spec.finf == INF
        assert spec.f(np.array([0.0]))[0] == pytest.approx(1.0)

    def test_homogeneous(self):
        spec = make_nonlinearity("homogeneous", 2, coefficient=3.0)
        assert spec.homogeneous_coefficient == 3.0
        assert spec.f0 == spec.finf == 3.0

    def test_derivative_matches_difference(self, saturating_spec):
        s = np.array([0.5, 2.0])
        h = 1e-6
        numeric = (saturating_spec.f(s + h) - saturating_spec.f(s - h)) / (2 * h)
        assert np.allclose(saturating_spec.fprime(s), numeric, rtol=1e-6)

    def test_table_preset(self):
        s = np.geomspace(1e-7, 1e7, 200)
        spec = make_nonlinearity("table", 1, s=s, f=s / (1 + s), f0=1.0, finf=0.0)
        assert spec.f(np.array([1.0]))[0] == pytest.approx(0.5, rel=1e-3)

    def test_table_inconsistent_limits(self):
        """Declared limits are checked against the samples."""
        s = np.geomspace(1e-7, 1e7, 200)
        with pytest.raises(NonlinearityError, match="declared f0"):
            make_nonlinearity("table", 1, s=s, f=s / (1 + s), f0=5.0, finf=0.0)

    def test_unknown_preset(self):
        with pytest.raises(NonlinearityError, match="Unknown nonlinearity"):
            make_nonlinearity("sine", 1)

    def test_unused_parameter(self):
        with pytest.raises(NonlinearityError, match="Unused"):
            make_nonlinearity("exponential", 1, alpha=2)

    def test_bad_dimension(self):
        with pytest.raises(NonlinearityError):
            make_nonlinearity("power", 0)

    def test_label(self, saturating_spec):
        assert saturating_spec.label().startswith("ratpow(")


class TestThresholds:
    """Tests for threshold and quotient_bounds."""

    def test_zero_limit_is_infinite(self):
        assert threshold(2.0, 0.0, 1) == INF

    def test_infinite_limit_is_zero(self):
        assert threshold(2.0, INF, 1) == 0.0

    def test_root_of_limit(self):
        assert threshold(2.0, 4.0, 2) == pytest.approx(1.0)

    def test_quotient_bounds(self, saturating_spec):
        lower, upper = quotient_bounds(saturating_spec)
        assert upper == pytest.approx(1.0, rel=1e-5)
        assert 0 < lower < 1e-5

    def test_overflow_makes_sup_infinite(self):
        lower, upper = quotient_bounds(make_nonlinearity("exponential", 1))
        assert upper == INF
        assert lower == pytest.approx(math.e, rel=1e-2)


# =============================================================================
# Shooting
# =============================================================================


class TestIntegrateIvp:
    def test_negligible_forcing_keeps_profile_flat(self, mesh):
        spec = make_nonlinearity("power", 1, coefficient=1e-12)
        shot = integrate_ivp(1.0, 1.0, spec, mesh)
        assert shot.terminal == pytest.approx(1.0, abs=1e-6)
        assert shot.hit_zero_at is None

    def test_large_load_hits_zero(self, mesh, saturating_spec):
        """Far above the branch the profile reaches zero inside the ball."""
        shot = integrate_ivp(100.0, 1.0, saturating_spec, mesh)
        assert shot.hit_zero_at is not None
        assert shot.terminal == pytest.approx(-(1.0 - shot.hit_zero_at))

    def test_linear_cosine_profile(self, mesh):
        """f(s) = s, N = 1 at lambda = pi^2/4: v = s cos(pi r / 2) vanishes at R."""
        shot = integrate_ivp(QUARTER_PI_SQUARED, 2.0, make_nonlinearity("homogeneous", 1), mesh)
        expected = 2.0 * np.cos(0.5 * np.pi * mesh.nodes)
        assert np.max(np.abs(shot.profile.values - expected)) < 1e-6
        assert shot.terminal == pytest.approx(0.0, abs=1e-6)

    def test_rejects_bad_input(self, mesh, saturating_spec):
        with pytest.raises(ValueError):
            integrate_ivp(-1.0, 1.0, saturating_spec, mesh)
        with pytest.raises(ValueError):
            integrate_ivp(1.0, 0.0, saturating_spec, mesh)


class TestSolveLambda:
    """Tests for solving the load at a given amplitude."""

    def test_small_amplitude_near_bifurcation(self, mesh, saturating_spec):
        """At s = 1e-4 the load is lambda_1 / f0 = pi^2 / 4."""
        lam, shot = solve_lambda_for_amplitude(1e-4, saturating_spec, mesh)
        assert lam == pytest.approx(QUARTER_PI_SQUARED, rel=1e-3)
        assert shot.profile.values[0] == pytest.approx(1e-4)
        assert solution_hygiene(shot) == []

    def test_supplied_bracket(self, mesh, saturating_spec):
        lam, _ = solve_lambda_for_amplitude(1.0, saturating_spec, mesh, bracket=(1.0, 10.0))
        expected, _ = solve_lambda_for_amplitude(1.0, saturating_spec, mesh)
        assert lam == pytest.approx(expected, rel=1e-8)

    def test_cap_below_solution(self, mesh, saturating_spec):
        """A cap below lambda_1 leaves the terminal positive."""
        with pytest.raises(BracketError, match="lambda-range"):
            solve_lambda_for_amplitude(1e-3, saturating_spec, mesh, lambda_cap=1.0)

    def test_second_order_under_refinement(self, saturating_spec):
        """lambda(1) converges at observed order >= 2 as the step halves."""
        def load(n):
            return solve_lambda_for_amplitude(1.0, saturating_spec, build_mesh(n), tol=1e-13)[0]

        reference = load(2049)
        errors = [abs(load(n) - reference) for n in (33, 65, 129)]
        assert errors[2] < errors[0]
        assert math.log2(errors[0] / errors[2]) / 2.0 >= 1.8

    def test_batch(self, mesh_small, saturating_spec):
        solves = solve_lambda_batch([1e-3, 1.0, 10.0], saturating_spec, mesh_small)
        assert all(s.success for s in solves)
        lams = [s.lam for s in solves]
        assert lams == sorted(lams)

    def test_batch_reports_failures(self, mesh_small, saturating_spec):
        solves = solve_lambda_batch([1e-3], saturating_spec, mesh_small, lambda_cap=1.0)
        assert not solves[0].success
        assert solves[0].lam is None
        assert "lambda-range" in solves[0].error


class TestSolveAmplitudes:
    """Tests for solve_amplitudes_for_lambda."""

    def test_one_solution_above_bifurcation(self, mesh, saturating_spec):
        shots = solve_amplitudes_for_lambda(2.0 * QUARTER_PI_SQUARED, saturating_spec, mesh)
        assert len(shots) == 1
        assert abs(shots[0].terminal) < 1e-6

    def test_none_below_bifurcation(self, mesh, saturating_spec):
        assert solve_amplitudes_for_lambda(0.9 * QUARTER_PI_SQUARED, saturating_spec, mesh) == []

    def test_two_solutions_for_exponential(self, mesh_small):
        """f = e^s at lambda = 0.5 has a lower and an upper solution."""
        spec = make_nonlinearity("exponential", 1)
        grid = np.geomspace(1e-2, 10.0, 64)
        shots = solve_amplitudes_for_lambda(0.5, spec, mesh_small, grid)
        assert len(shots) == 2
        assert shots[0].amplitude < shots[1].amplitude


# =============================================================================
# Hygiene
# =============================================================================


class TestHygiene:
    """Tests for double_zero_check and solution_hygiene."""

    def test_double_zero_detected(self, mesh_small):
        """(1 - r)^2 vanishes together with its derivative at R."""
        profile = sample_profile(mesh_small, lambda r: (1.0 - r) ** 2)
        assert double_zero_check(profile)

    def test_simple_zero_passes(self, mesh_small):
        profile = sample_profile(mesh_small, lambda r: np.cos(0.5 * np.pi * r))
        assert not double_zero_check(profile)

    def test_zero_profile_is_not_flagged(self, mesh_small):
        profile = sample_profile(mesh_small, lambda r: 0.0 * r)
        assert not double_zero_check(profile)

    def test_overshoot_reported(self, mesh, saturating_spec):
        shot = integrate_ivp(100.0, 1.0, saturating_spec, mesh)
        assert solution_hygiene(shot) != []
