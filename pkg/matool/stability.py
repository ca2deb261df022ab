"""Linearized stability of computed positive solutions.

About a solution v of ((-v')^N)' = lambda^N N r^(N-1) a f(v) the linearized
problem reads

    (-q phi')' - c phi = (mu / N) rho phi,   psi(0) = 0,  phi(R) = 0

with q = (-v')^(N-1), c = lambda^N r^(N-1) a f'(v) and psi = -q phi' the
linearized flux. The weight rho is 1 for N <= 2 and r^(N-1) otherwise. The
system phi' = -psi/q, psi' = (c + mu rho / N) phi is marched by RK4 from a
power-law startup at the first node, many members per pass.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicSpline

from matool.bvp import NonlinearitySpec
from matool.errors import BracketError, EigenError, MeshError, NonlinearityError
from matool.mesh import RadialProfile, count_sign_changes
from matool.shooting import linear_bisect, sentinel_terminal

if TYPE_CHECKING:
    from matool.branch import Branch

logger = logging.getLogger(__name__)

FAN = 15
CHUNK = 48
EXPANSION_ROUNDS = 60
DEGENERATE_TOL = 1e-6


# =============================================================================
# Linearization
# =============================================================================


@dataclass(frozen=True, eq=False)
class LinearizedProblem:
    """Coefficients of the linearization about one positive solution."""

    profile: RadialProfile
    lam: float
    spec: NonlinearitySpec = dataclasses.field(repr=False)
    q: np.ndarray = dataclasses.field(repr=False)
    c: np.ndarray = dataclasses.field(repr=False)
    q_mid: np.ndarray = dataclasses.field(repr=False)
    c_mid: np.ndarray = dataclasses.field(repr=False)

    @property
    def mesh(self):
        return self.profile.mesh

    @property
    def N(self) -> int:
        return self.spec.N


def _mu_weight(r, N: int):
    r = np.asarray(r, dtype=float)
    return np.ones_like(r) if N <= 2 else np.power(r, N - 1.0)


def linearize(profile: RadialProfile, lam: float, spec: NonlinearitySpec) -> LinearizedProblem:
    """Sample q and c at nodes, and at step midpoints from cubic splines of v and v'."""
    if not lam > 0:
        raise ValueError(f"Load lambda must be positive, got {lam}")
    if not np.all(profile.values[:-1] > 0):
        raise ValueError("Base profile must be positive on [0, R)")
    mesh = profile.mesh
    N = spec.N
    nodes, mids = mesh.nodes, mesh.midpoints

    v_mid = CubicSpline(nodes, profile.values)(mids)
    dv_mid = CubicSpline(nodes, profile.dvalues)(mids)

    def coefficients(r, v, dv, a):
        slope = np.maximum(-dv, 0.0)
        q = np.power(slope, N - 1.0)
        with np.errstate(all="ignore"):
            c = lam**N * np.power(r, N - 1.0) * a * spec.fprime(np.maximum(v, 0.0))
        return q, c

    q, c = coefficients(nodes, profile.values, profile.dvalues, mesh.a_values)
    q_mid, c_mid = coefficients(mids, v_mid, dv_mid, mesh.weight(mids))
    return LinearizedProblem(profile, float(lam), spec, q, c, q_mid, c_mid)


@dataclass(frozen=True)
class _Stack:
    """Coefficients of several linearized problems on one mesh, shape (n, K)."""

    nodes: np.ndarray
    N: int
    q: np.ndarray
    c: np.ndarray
    q_mid: np.ndarray
    c_mid: np.ndarray
    rho: np.ndarray
    rho_mid: np.ndarray

    @classmethod
    def of(cls, problems: list[LinearizedProblem]) -> _Stack:
        mesh = problems[0].mesh
        N = problems[0].N
        if any(lp.mesh is not mesh or lp.N != N for lp in problems):
            raise MeshError("Stacked linearized problems must share mesh and dimension")
        return cls(
            nodes=mesh.nodes,
            N=N,
            q=np.column_stack([lp.q for lp in problems]),
            c=np.column_stack([lp.c for lp in problems]),
            q_mid=np.column_stack([lp.q_mid for lp in problems]),
            c_mid=np.column_stack([lp.c_mid for lp in problems]),
            rho=_mu_weight(mesh.nodes, N),
            rho_mid=_mu_weight(mesh.midpoints, N),
        )

    def take(self, members: np.ndarray) -> _Stack:
        return dataclasses.replace(
            self,
            q=self.q[:, members],
            c=self.c[:, members],
            q_mid=self.q_mid[:, members],
            c_mid=self.c_mid[:, members],
        )

    @property
    def size(self) -> int:
        return self.q.shape[1]


def _march(stack: _Stack, mus: np.ndarray) -> np.ndarray:
    """phi at every node for each column of stack, at the matching mu."""
    nodes, N = stack.nodes, stack.N
    n, size = stack.q.shape
    shift = np.asarray(mus, dtype=float) / N
    r1 = nodes[1]

    # psi ~ r^N from the potential; from the mu term psi ~ r (rho = 1) or r^N.
    psi_c = stack.c[1] * r1 / N
    psi_mu = r1 / N if N <= 2 else r1**N / N**2
    e_mu = 3.0 - N if N <= 2 else 2.0

    phi = np.empty((n, size))
    psi = np.empty((n, size))
    phi[0] = 1.0
    psi[0] = 0.0
    with np.errstate(all="ignore"):
        psi[1] = psi_c + shift * N * psi_mu
        phi[1] = 1.0 - (psi_c * r1 / 2.0 + shift * N * psi_mu * r1 / e_mu) / stack.q[1]
        steps = np.diff(nodes)
        for i in range(1, n - 1):
            h = steps[i]
            qa, qm, qb = stack.q[i], stack.q_mid[i], stack.q[i + 1]
            pa = stack.c[i] + shift * stack.rho[i]
            pm = stack.c_mid[i] + shift * stack.rho_mid[i]
            pb = stack.c[i + 1] + shift * stack.rho[i + 1]
            f, s = phi[i], psi[i]

            k1f = -s / qa
            k1s = pa * f
            k2f = -(s + 0.5 * h * k1s) / qm
            k2s = pm * (f + 0.5 * h * k1f)
            k3f = -(s + 0.5 * h * k2s) / qm
            k3s = pm * (f + 0.5 * h * k2f)
            k4f = -(s + h * k3s) / qb
            k4s = pb * (f + h * k3f)

            phi[i + 1] = f + (h / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
            psi[i + 1] = s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return phi


def _terminal(stack: _Stack, mus: np.ndarray, members: np.ndarray) -> np.ndarray:
    return sentinel_terminal(_march(stack.take(members), mus), stack.nodes)[0]


# =============================================================================
# Principal eigenvalue and Morse index
# =============================================================================


@dataclass(frozen=True, eq=False)
class LinearizedPair:
    """Principal eigenvalue mu_1 of the linearization with phi_1 (phi_1(0) = 1)."""

    mu: float
    eigenfunction: RadialProfile


def _bracket(stack: _Stack) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grow [-1, 1] additively, doubling the step, until every member straddles zero."""
    size = stack.size
    both = np.concatenate([np.arange(size), np.arange(size)])
    lo = np.full(size, -1.0)
    hi = np.full(size, 1.0)
    step = np.full(size, 2.0)
    for _ in range(EXPANSION_ROUNDS + 1):
        values = _terminal(stack, np.concatenate([lo, hi]), both)
        low_bad = ~(values[:size] > 0)
        high_bad = values[size:] > 0
        if not (low_bad.any() or high_bad.any()):
            break
        # The terminal decreases in mu, so at most one end is wrong per member.
        hi = np.where(low_bad, lo, hi)
        lo = np.where(low_bad, lo - step, lo)
        lo = np.where(high_bad, hi, lo)
        hi = np.where(high_bad, hi + step, hi)
        step = np.where(low_bad | high_bad, 2.0 * step, step)
    return lo, hi, ~(low_bad | high_bad)


def _principal_batch(problems: list[LinearizedProblem], tol: float) -> np.ndarray:
    """mu_1 for every problem, nan where no bracket was found."""
    stack = _Stack.of(problems)
    mus = np.full(stack.size, np.nan)
    for start in range(0, stack.size, CHUNK):
        members = np.arange(start, min(start + CHUNK, stack.size))
        part = stack.take(members)
        lo, hi, ok = _bracket(part)
        good = np.flatnonzero(ok)
        if good.size == 0:
            continue
        lo_b, _ = linear_bisect(
            lambda x, idx, part=part, good=good: _terminal(part, x, good[idx]),
            lo[good], hi[good], tol=tol, fan=FAN,
        )
        mus[members[good]] = lo_b
    return mus


def _pair_from_column(lp: LinearizedProblem, mu: float, phi: np.ndarray) -> LinearizedPair:
    if count_sign_changes(phi[:-1]) > 0:
        raise EigenError(f"linearized mode at mu={mu:.8g} has an interior zero")
    dphi = np.gradient(phi, lp.mesh.nodes, edge_order=2)
    dphi[0] = 0.0
    return LinearizedPair(mu, RadialProfile(lp.mesh, phi, dphi))


def linearized_principal_pair(
    lp: LinearizedProblem,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-10,
) -> LinearizedPair:
    """Principal eigenpair by bisection on phi(R; mu) with the zero-crossing sentinel.

    Without a bracket one is grown additively around [-1, 1].
    """
    stack = _Stack.of([lp])
    only = np.array([0])
    if bracket is not None:
        lo, hi = (float(x) for x in bracket)
        t_lo, t_hi = _terminal(stack, np.array([lo, hi]), np.array([0, 0]))
        if not (lo < hi and t_lo > 0 >= t_hi):
            raise BracketError(
                f"bracket ({lo:g}, {hi:g}) does not straddle the principal eigenvalue "
                f"(terminals {t_lo:.6g}, {t_hi:.6g})",
                lo=lo, hi=hi, terminal_lo=float(t_lo), terminal_hi=float(t_hi),
            )
        lo_arr, hi_arr = np.array([lo]), np.array([hi])
    else:
        lo_arr, hi_arr, ok = _bracket(stack)
        if not ok[0]:
            raise BracketError(
                "no bracket for the linearized eigenvalue",
                lo=float(lo_arr[0]), hi=float(hi_arr[0]),
            )
    lo_b, _ = linear_bisect(
        lambda x, idx: _terminal(stack, x, only[idx]), lo_arr, hi_arr, tol=tol, fan=FAN
    )
    mu = float(lo_b[0])
    return _pair_from_column(lp, mu, _march(stack, lo_b)[:, 0])


def linearized_principal_eig(
    lp: LinearizedProblem,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-10,
) -> float:
    return linearized_principal_pair(lp, bracket, tol).mu


@dataclass(frozen=True)
class MorseReport:
    """Interior zeros of phi at mu = 0; degenerate when phi(R) vanishes too."""

    index: int
    degenerate: bool
    terminal: float


def _morse_from_column(phi: np.ndarray, degenerate_tol: float) -> MorseReport:
    scale = float(np.nanmax(np.abs(phi)))
    end = float(phi[-1])
    degenerate = abs(end) <= degenerate_tol * scale
    band = 1e-12 * scale
    zeros = count_sign_changes(phi[:-1] if degenerate else phi, band)
    return MorseReport(index=zeros, degenerate=degenerate, terminal=end / scale)


def morse_index(lp: LinearizedProblem, degenerate_tol: float = DEGENERATE_TOL) -> MorseReport:
    """Count of negative linearized eigenvalues from the oscillation of phi at mu = 0."""
    phi = _march(_Stack.of([lp]), np.zeros(1))[:, 0]
    return _morse_from_column(phi, degenerate_tol)


def identity_residual(lp: LinearizedProblem, pair: LinearizedPair) -> float:
    """Relative residual of mu int rho phi v = N int lambda^N r^(N-1) a phi (N f(v) - f'(v) v)."""
    mesh = lp.mesh
    v = np.maximum(lp.profile.values, 0.0)
    phi = pair.eigenfunction.values
    N = lp.N
    base = lp.lam**N * np.power(mesh.nodes, N - 1.0) * mesh.a_values * phi
    with np.errstate(all="ignore"):
        fv = lp.spec.f(v)
        dfv = np.nan_to_num(lp.spec.fprime(v) * v)
    lhs = pair.mu * float(mesh.weights @ (_mu_weight(mesh.nodes, N) * phi * v))
    rhs = N * float(mesh.weights @ (base * (N * fv - dfv)))
    size = abs(lhs) + N * float(mesh.weights @ np.abs(base * (N * fv + np.abs(dfv))))
    return abs(lhs - rhs) / size if size > 0 else 0.0


# =============================================================================
# Hypothesis check and branch-level analyses
# =============================================================================


@dataclass(frozen=True)
class ConditionReport:
    """Whether f'(s) s < N f(s) on every sample; first_violation is the first failing s."""

    holds: bool
    first_violation: float | None = None


def stability_condition_check(
    spec: NonlinearitySpec,
    s_max: float = 1e6,
    s_min: float = 1e-6,
    samples: int = 400,
) -> ConditionReport:
    """Sample f'(s) s - N f(s) on a log grid; strict negativity means f(s)/s^N decreases."""
    s = np.geomspace(s_min, s_max, samples)
    with np.errstate(all="ignore"):
        f = spec.f(s)
        gap = spec.fprime(s) * s - spec.N * f
    for x, fx, g in zip(s, f, gap, strict=True):
        if not (math.isfinite(g) and math.isfinite(fx)):
            raise NonlinearityError(f"f or f' is not finite at s={x:.6g}")
        if not g < -1e-12 * spec.N * abs(fx):
            return ConditionReport(False, float(x))
    return ConditionReport(True)


@dataclass(frozen=True)
class MonotonicityIssue:
    index: int
    kind: str
    detail: str


@dataclass(frozen=True)
class MonotonicityReport:
    violations: tuple[MonotonicityIssue, ...]
    ties: tuple[MonotonicityIssue, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def branch_monotonicity(branch: Branch, tol: float = 1e-6) -> MonotonicityReport:
    """Check lambda(s) strictly increasing and v_lambda pointwise increasing in lambda.

    Consecutive loads equal within tol are ties: a resolution failure, not a
    violation.
    """
    violations, ties = [], []
    points = branch.points
    for i, (a, b) in enumerate(zip(points, points[1:], strict=False)):
        gap = b.lam - a.lam
        if abs(gap) <= tol * max(abs(a.lam), abs(b.lam)):
            ties.append(MonotonicityIssue(i, "tie", f"lambda {a.lam:.10g} ~ {b.lam:.10g}"))
            continue
        if gap < 0:
            violations.append(
                MonotonicityIssue(i, "lambda decreases",
                                  f"s {a.s:.6g} -> {b.s:.6g}: lambda {a.lam:.8g} -> {b.lam:.8g}")
            )
            continue
        slack = tol * max(1.0, b.sup_norm)
        drop = float(np.max(a.profile.values - b.profile.values))
        if drop > slack:
            violations.append(
                MonotonicityIssue(i, "profile ordering",
                                  f"v at lambda={b.lam:.8g} lies {drop:.3g} below v at {a.lam:.8g}")
            )
    return MonotonicityReport(tuple(violations), tuple(ties))


def annotate_stability(branch: Branch, tol: float = 1e-9) -> Branch:
    """Fill principal_eig and morse_index for every branch point."""
    problems = [linearize(p.profile, p.lam, branch.spec) for p in branch.points]
    mus = _principal_batch(problems, tol)
    phis0 = np.column_stack(
        [_march(_Stack.of(problems[i : i + CHUNK]), np.zeros(len(problems[i : i + CHUNK])))
         for i in range(0, len(problems), CHUNK)]
    )
    points = []
    for j, point in enumerate(branch.points):
        morse = _morse_from_column(phis0[:, j], DEGENERATE_TOL)
        mu = None if math.isnan(mus[j]) else float(mus[j])
        if mu is not None and not morse.degenerate and (morse.index == 0) != (mu > 0):
            logger.warning(
                "sign mismatch at s=%.6g: mu_1=%.3g but Morse index %d", point.s, mu, morse.index
            )
        points.append(dataclasses.replace(point, principal_eig=mu, morse_index=morse.index))
    return dataclasses.replace(branch, points=tuple(points))


@dataclass(frozen=True)
class LocalBifurcationReport:
    """Distance of v/s from the principal eigenfunction for the smallest amplitudes."""

    amplitudes: tuple[float, ...]
    distances: tuple[float, ...]

    @property
    def decreasing(self) -> bool:
        d = self.distances
        return all(b < a for a, b in zip(d, d[1:], strict=False))


def local_bifurcation_check(
    branch: Branch, eigenfunction: RadialProfile, count: int = 3
) -> LocalBifurcationReport:
    """sup |v/s - psi_1| for the `count` smallest amplitudes, largest amplitude first."""
    if eigenfunction.mesh is not branch.mesh:
        raise MeshError("Eigenfunction and branch must share a mesh")
    psi = eigenfunction.values / eigenfunction.values[0]
    smallest = sorted(branch.points, key=lambda p: p.s)[:count][::-1]
    distances = tuple(float(np.max(np.abs(p.profile.values / p.s - psi))) for p in smallest)
    return LocalBifurcationReport(tuple(p.s for p in smallest), distances)
