"""Principal eigenvalue of the radial p-Laplacian problem.

    -(|v'|^(p-2) v')' = mu^(p-1) (p-1) r^(p-2) a(r) |v|^(p-2) v,   v'(0) = v(R) = 0

mu_1(p) is computed by shooting in mu and independently by minimizing the
discrete Rayleigh quotient; lambda_1 of the Monge-Ampere problem in
dimension N is mu_1(N + 1).
"""

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from matool.config import worker_count
from matool.errors import BracketError, ConvergenceError, EigenError
from matool.mesh import (
    RadialMesh,
    RadialProfile,
    count_sign_changes,
    origin_moments,
    radial_forcing,
)
from matool.operators import phi_p
from matool.shooting import FluxTrajectory, expand_upper, log_bisect, march_flux, sentinel_terminal

logger = logging.getLogger(__name__)

P_MAX = 16.0
MU_START = 1e-2
MU_FLOOR = 1e-12
MU_CAP = 1e8
CROSS_CHECK_TOLERANCE = 1e-4


@dataclass(frozen=True, eq=False)
class Eigenpair:
    """Principal eigenvalue with its eigenfunction (sup norm 1)."""

    mu1: float
    eigenfunction: RadialProfile
    method: str
    p: float
    residual: float
    converged: bool = True
    iterations: int = 0

    @property
    def eta1(self) -> float:
        """mu1^(p-1), the infimum of the Rayleigh quotient."""
        return self.mu1 ** (self.p - 1.0)


@dataclass(frozen=True)
class RayleighState:
    f1: float
    f2: float
    quotient: float


def _check_exponent(p: float) -> None:
    if not (p >= 2.0 and math.isfinite(p)):
        raise ValueError(f"Exponent p must be a finite real >= 2, got {p}")


# =============================================================================
# Shooting
# =============================================================================


def _shoot(mus, p: float, mesh: RadialMesh, amplitude: float) -> FluxTrajectory:
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    k = p - 1.0
    m_w, m_v = origin_moments(mesh, k)
    scale = mus**k
    g0 = amplitude**k
    w1 = scale * g0 * m_w
    v1 = amplitude - mus * amplitude * m_v
    return march_flux(
        mesh,
        k,
        radial_forcing(mesh, k),
        scale,
        lambda v: phi_p(v, p),
        np.full(mus.size, amplitude),
        v1,
        w1,
    )


def terminal_value(p: float, mesh: RadialMesh, mus, amplitude: float = 1.0) -> np.ndarray:
    """Raw v(R; mu) for each mu, starting from v(0) = amplitude."""
    _check_exponent(p)
    return _shoot(mus, p, mesh, amplitude).v[-1].copy()


def eig_shoot(
    p: float,
    mesh: RadialMesh,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-10,
    *,
    amplitude: float = 1.0,
) -> Eigenpair:
    """mu_1(p) by bisection on the terminal value of the initial value problem.

    Without a bracket one is found by geometric expansion from mu = 0.01.
    """
    _check_exponent(p)
    if not amplitude > 0:
        raise ValueError(f"Amplitude must be positive, got {amplitude}")

    def terminal(mus, idx):
        return sentinel_terminal(_shoot(mus, p, mesh, amplitude).v, mesh.nodes)[0]

    if bracket is not None:
        lo, hi = (float(x) for x in bracket)
        t_lo, t_hi = terminal(np.array([lo, hi]), None)
        if not (0 < lo < hi and t_lo > 0 >= t_hi):
            raise BracketError(
                f"bracket ({lo:g}, {hi:g}) does not straddle a sign change "
                f"(terminals {t_lo:.6g}, {t_hi:.6g})",
                lo=lo, hi=hi, terminal_lo=float(t_lo), terminal_hi=float(t_hi),
            )
        lo_arr, hi_arr = np.array([lo]), np.array([hi])
    else:
        lo = MU_START
        while terminal(np.array([lo]), None)[0] <= 0:
            lo /= 4.0
            if lo < MU_FLOOR:
                raise BracketError("no positive terminal value above mu=1e-12", lo=lo)
        lo_arr, hi_arr, found = expand_upper(terminal, [lo], [4.0 * lo], cap=MU_CAP)
        if not found[0]:
            raise BracketError(f"terminal value stays positive up to mu={MU_CAP:g}")

    lo_arr, _ = log_bisect(terminal, lo_arr, hi_arr, rtol=1e-14, fan=15)
    mu1 = float(lo_arr[0])
    traj = _shoot(mu1, p, mesh, amplitude)
    values = traj.v[:, 0] / amplitude
    dvalues = traj.dv[:, 0] / amplitude
    if count_sign_changes(values[:-1]) > 0:
        raise EigenError(f"eigenfunction at mu={mu1:.8g} has an interior zero; not principal")
    residual = abs(float(values[-1]))
    if residual > tol:
        logger.warning("shooting residual %.3g exceeds tolerance %.3g", residual, tol)
    return Eigenpair(
        mu1=mu1,
        eigenfunction=RadialProfile(mesh, values, dvalues),
        method="shooting",
        p=p,
        residual=residual,
    )


# =============================================================================
# Rayleigh quotient
# =============================================================================


def _denominator_density(p: float, mesh: RadialMesh) -> np.ndarray:
    return (p - 1.0) * mesh.weights * np.power(mesh.nodes, p - 2.0) * mesh.a_values


def rayleigh_quotient(v: RadialProfile | np.ndarray, p: float, mesh: RadialMesh) -> RayleighState:
    """Discrete f1 = int |v'|^p / p and f2 = ((p-1)/p) int r^(p-2) a |v|^p.

    v' is taken as the slope between consecutive nodes.
    """
    _check_exponent(p)
    values = v.values if isinstance(v, RadialProfile) else np.asarray(v, dtype=float)
    h = mesh.steps
    slopes = np.diff(values) / h
    f1 = float(np.sum(h * np.abs(slopes) ** p) / p)
    f2 = float(np.sum(_denominator_density(p, mesh) * np.abs(values) ** p) / p)
    quotient = f1 / f2 if f2 > 0 else math.inf
    return RayleighState(f1=f1, f2=f2, quotient=quotient)


def _values_from_slopes(slopes: np.ndarray, h: np.ndarray) -> np.ndarray:
    tail = np.cumsum((h * slopes)[::-1])[::-1]
    return np.append(-tail, 0.0)


def eig_rayleigh(
    p: float,
    mesh: RadialMesh,
    tol: float = 1e-10,
    max_iter: int = 20000,
) -> Eigenpair:
    """mu_1(p) = eta_1^(1/(p-1)) from the minimum of the discrete quotient.

    Profiles are parametrized by their node-to-node slopes so v(R) = 0 holds
    exactly; the quotient is scale invariant and is minimized by L-BFGS-B
    with its analytic gradient. The result is marked converged when L-BFGS-B
    reports success or its largest gradient component is at most
    sqrt(tol) * max(1, eta).
    """
    _check_exponent(p)
    h = mesh.steps
    density = _denominator_density(p, mesh)
    radius = mesh.radius

    def objective(slopes):
        v = _values_from_slopes(slopes, h)
        f1 = np.sum(h * np.abs(slopes) ** p) / p
        f2 = np.sum(density * np.abs(v) ** p) / p
        quotient = f1 / f2
        grad_f1 = h * phi_p(slopes, p)
        grad_f2 = -h * np.cumsum(density * phi_p(v, p))[:-1]
        return quotient, (grad_f1 - quotient * grad_f2) / f2

    start = np.cos(0.5 * math.pi * mesh.nodes / radius)
    slopes0 = np.diff(start) / h
    result = optimize.minimize(
        objective,
        slopes0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": tol * 1e-3, "gtol": tol},
    )
    eta = float(result.fun)
    values = np.abs(_values_from_slopes(result.x, h))
    values /= values.max()
    dvalues = np.gradient(values, mesh.nodes, edge_order=2)
    dvalues[0] = 0.0

    # A line-search stop counts only when the gradient is already at the
    # rounding floor of the quotient.
    gradient = float(np.max(np.abs(result.jac)))
    converged = bool(result.success) or gradient <= math.sqrt(tol) * max(1.0, eta)
    if not converged:
        logger.warning("Rayleigh descent stopped: %s", result.message)
    return Eigenpair(
        mu1=eta ** (1.0 / (p - 1.0)),
        eigenfunction=RadialProfile(mesh, values, dvalues),
        method="rayleigh",
        p=p,
        residual=gradient,
        converged=converged,
        iterations=int(result.nit),
    )


# =============================================================================
# lambda_1, scans and qualitative checks
# =============================================================================


@functools.lru_cache(maxsize=32)
def lambda1(N: int, mesh: RadialMesh, tolerance: float = CROSS_CHECK_TOLERANCE) -> float:
    """lambda_1 = mu_1(N + 1), cross-checked between shooting and the Rayleigh quotient."""
    if int(N) != N or N < 1:
        raise ValueError(f"Dimension N must be an integer >= 1, got {N}")
    shot = eig_shoot(N + 1.0, mesh)
    ray = eig_rayleigh(N + 1.0, mesh)
    if not ray.converged:
        raise ConvergenceError(
            f"Rayleigh descent for lambda_1 (N={N}) used all {ray.iterations} iterations"
        )
    gap = abs(shot.mu1 - ray.mu1) / shot.mu1
    if gap > tolerance:
        raise EigenError(
            f"lambda_1 methods disagree for N={N}: shooting {shot.mu1:.8g}, "
            f"rayleigh {ray.mu1:.8g} (relative gap {gap:.2e})"
        )
    logger.debug("lambda_1(N=%d) = %.10g (gap %.1e)", N, shot.mu1, gap)
    return shot.mu1


@dataclass(frozen=True)
class Mu1Scan:
    """mu_1 over an exponent grid with its observed modulus of continuity."""

    rows: tuple[tuple[float, float], ...]
    modulus: float


def mu1_scan(
    p_grid,
    mesh: RadialMesh,
    *,
    p_max: float = P_MAX,
    workers: int | None = None,
) -> Mu1Scan:
    """mu_1(p) on a non-decreasing grid in [2, p_max], computed in parallel."""
    grid = [float(p) for p in p_grid]
    if not grid:
        raise ValueError("Exponent grid is empty")
    if any(p < 2.0 or p > p_max for p in grid):
        raise ValueError(f"Exponent grid must lie in [2, {p_max:g}]")
    if any(b < a for a, b in zip(grid, grid[1:], strict=False)):
        raise ValueError("Exponent grid must be non-decreasing")

    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        values = list(pool.map(lambda p: eig_shoot(p, mesh).mu1, grid))

    jumps = np.abs(np.diff(values)) if len(values) > 1 else np.zeros(0)
    modulus = float(jumps.max()) if jumps.size else 0.0
    return Mu1Scan(rows=tuple(zip(grid, values, strict=True)), modulus=modulus)


def sign_change_check(profile: RadialProfile, tol: float = 1e-12) -> bool:
    """True iff the profile takes values above tol and below -tol."""
    return bool(np.any(profile.values > tol) and np.any(profile.values < -tol))
