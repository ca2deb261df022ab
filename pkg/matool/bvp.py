"""Shooting solver for the radial problem ((-v')^N)' = lambda^N N r^(N-1) a(r) f(v).

Boundary conditions are v'(0) = 0 and v(R) = 0, for positive concave v.
Given (lambda, s) the initial value problem is marched from v(0) = s; given
s the load lambda is found by log-space bisection on the terminal value;
given lambda every amplitude with a solution is located on a log grid.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from matool.errors import BracketError, NonlinearityError
from matool.mesh import RadialMesh, RadialProfile, origin_moments, radial_forcing, sup_norm
from matool.shooting import (
    FluxTrajectory,
    expand_upper,
    log_bisect,
    march_flux,
    sentinel_terminal,
)

logger = logging.getLogger(__name__)

INF = math.inf

NONLINEARITY_PRESETS = ("power", "homogeneous", "ratpow", "exponential", "table")

LAMBDA_FLOOR = 1e-6
LAMBDA_START = 1.0
LAMBDA_CAP = 1e8
LAMBDA_GROWTH = 4.0

AMPLITUDE_MIN = 1e-4
AMPLITUDE_MAX = 1e4
POINTS_PER_DECADE = 48

LIMIT_PROBE_LOW = 1e-6
LIMIT_PROBE_HIGH = 1e6


# =============================================================================
# Nonlinearities
# =============================================================================


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """A nonlinearity f with derivative and the limits of f(s)/s^N."""

    preset: str
    N: int
    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    f0: float
    finf: float
    params: dict = field(default_factory=dict)
    homogeneous_coefficient: float | None = None

    def quotient(self, s):
        """f(s) / s^N."""
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return self.f(s) / s**self.N

    def label(self) -> str:
        if not self.params:
            return self.preset
        inner = ", ".join(
            f"{k}={v:g}" for k, v in self.params.items() if isinstance(v, int | float)
        )
        return f"{self.preset}({inner})"


def _power_limit(exponent: float, coefficient: float) -> float:
    """Limit of c * s^exponent, as s -> 0+ (use -exponent for s -> inf)."""
    if exponent > 0:
        return 0.0
    if exponent < 0:
        return INF
    return coefficient


def _centered_derivative(f: Callable[[np.ndarray], np.ndarray]) -> Callable:
    def fprime(s):
        s = np.asarray(s, dtype=float)
        h = np.maximum(1e-6, 1e-6 * np.abs(s))
        with np.errstate(all="ignore"):
            central = (f(s + h) - f(np.maximum(s - h, 0.0))) / (s + h - np.maximum(s - h, 0.0))
        return central

    return fprime


def _power(N: int, alpha: float, coefficient: float) -> NonlinearitySpec:
    def f(s):
        s = np.asarray(s, dtype=float)
        return coefficient * np.power(s, alpha)

    def fprime(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return coefficient * alpha * np.power(s, alpha - 1.0)

    exponent = alpha - N
    return NonlinearitySpec(
        preset="power",
        N=N,
        f=f,
        fprime=fprime,
        f0=_power_limit(exponent, coefficient),
        finf=_power_limit(-exponent, coefficient),
        params={"alpha": alpha, "coefficient": coefficient},
        homogeneous_coefficient=coefficient if exponent == 0 else None,
    )


def _ratpow(N: int, alpha: float, beta: float, coefficient: float) -> NonlinearitySpec:
    def f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return coefficient * np.power(s, alpha) / (1.0 + np.power(s, beta))

    def fprime(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            sb = np.power(s, beta)
            return coefficient * np.power(s, alpha - 1.0) * (alpha + (alpha - beta) * sb) / (
                (1.0 + sb) ** 2
            )

    if beta == 0:
        f0 = _power_limit(alpha - N, coefficient / 2.0)
        finf = _power_limit(N - alpha, coefficient / 2.0)
    else:
        f0 = _power_limit(alpha - N, coefficient)
        finf = _power_limit(N + beta - alpha, coefficient)
    return NonlinearitySpec(
        preset="ratpow",
        N=N,
        f=f,
        fprime=fprime,
        f0=f0,
        finf=finf,
        params={"alpha": alpha, "beta": beta, "coefficient": coefficient},
    )


def _exponential(N: int, coefficient: float) -> NonlinearitySpec:
    def f(s):
        with np.errstate(over="ignore"):
            return coefficient * np.exp(np.asarray(s, dtype=float))

    return NonlinearitySpec(
        preset="exponential",
        N=N,
        f=f,
        fprime=f,
        f0=INF,
        finf=INF,
        params={"coefficient": coefficient},
    )


def _table(N: int, s_values, f_values, f0: float, finf: float) -> NonlinearitySpec:
    s_values = np.asarray(s_values, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    if s_values.ndim != 1 or s_values.size < 4 or s_values.shape != f_values.shape:
        raise NonlinearityError("Table needs matching 1-D s and f arrays with at least 4 samples")
    if np.any(s_values <= 0) or np.any(np.diff(s_values) <= 0):
        raise NonlinearityError("Table abscissae must be positive and strictly increasing")
    if np.any(f_values <= 0):
        raise NonlinearityError("Table values must be positive (f(s) > 0 for s > 0)")

    # Monotone interpolation of log(f/s^N) in log s, constant beyond the table.
    log_s = np.log(s_values)
    interp = PchipInterpolator(log_s, np.log(f_values) - N * log_s, extrapolate=False)
    lo, hi = log_s[0], log_s[-1]

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0
        ls = np.clip(np.log(s[pos]), lo, hi)
        out[pos] = np.exp(interp(ls)) * s[pos] ** N
        return out

    return NonlinearitySpec(
        preset="table",
        N=N,
        f=f,
        fprime=_centered_derivative(f),
        f0=float(f0),
        finf=float(finf),
        params={"samples": int(s_values.size)},
    )


def make_nonlinearity(preset: str, N: int = 1, **params) -> NonlinearitySpec:
    """Build a preset nonlinearity.

    Presets:
        power: f = c s^alpha (alpha defaults to N + 1)
        homogeneous: f = c s^N
        ratpow: f = c s^alpha / (1 + s^beta)
        exponential: f = c e^s
        table: tabulated (s, f) samples with declared f0 and finf
    """
    if int(N) != N or N < 1:
        raise NonlinearityError(f"Dimension N must be an integer >= 1, got {N}")
    N = int(N)
    coefficient = float(params.pop("coefficient", 1.0))
    if not (coefficient > 0 and math.isfinite(coefficient)):
        raise NonlinearityError(f"Coefficient must be positive and finite, got {coefficient}")

    if preset == "power":
        alpha = float(params.pop("alpha", N + 1))
        if alpha <= 0:
            raise NonlinearityError(f"power exponent must be positive, got {alpha}")
        spec = _power(N, alpha, coefficient)
    elif preset == "homogeneous":
        spec = _power(N, float(N), coefficient)
        spec = NonlinearitySpec(
            preset="homogeneous",
            N=N,
            f=spec.f,
            fprime=spec.fprime,
            f0=spec.f0,
            finf=spec.finf,
            params={"coefficient": coefficient},
            homogeneous_coefficient=coefficient,
        )
    elif preset == "ratpow":
        alpha = float(params.pop("alpha", N + 1))
        beta = float(params.pop("beta", 2.0))
        if alpha <= 0 or beta < 0:
            raise NonlinearityError(f"ratpow needs alpha > 0 and beta >= 0, got {alpha}, {beta}")
        spec = _ratpow(N, alpha, beta, coefficient)
    elif preset == "exponential":
        spec = _exponential(N, coefficient)
    elif preset == "table":
        try:
            s_values = params.pop("s")
            f_values = params.pop("f")
            f0 = params.pop("f0")
            finf = params.pop("finf")
        except KeyError as e:
            raise NonlinearityError(f"table preset needs s, f, f0 and finf ({e} missing)") from e
        spec = _table(N, s_values, np.asarray(f_values, dtype=float) * coefficient, f0, finf)
        problems = check_limits(spec)
        if problems:
            raise NonlinearityError("; ".join(problems))
    else:
        raise NonlinearityError(
            f"Unknown nonlinearity preset {preset!r} (expected one of {NONLINEARITY_PRESETS})"
        )

    if params:
        raise NonlinearityError(f"Unused parameters for {preset}: {sorted(params)}")
    return spec


def _limit_matches(value: float, declared: float) -> bool:
    if declared == INF:
        return value > 1e2
    if declared == 0.0:
        return value < 1e-2
    return math.isfinite(value) and abs(value - declared) <= 1e-2 * max(1.0, declared)


def check_limits(spec: NonlinearitySpec) -> list[str]:
    """Compare declared f0 / finf with f(s)/s^N probed at 1e-6 and 1e6."""
    problems = []
    q_low = float(spec.quotient(LIMIT_PROBE_LOW))
    q_high = float(spec.quotient(LIMIT_PROBE_HIGH))
    if not _limit_matches(q_low, spec.f0):
        problems.append(f"declared f0={spec.f0:g} but f(s)/s^N={q_low:.6g} at s=1e-6")
    if not _limit_matches(q_high, spec.finf):
        problems.append(f"declared finf={spec.finf:g} but f(s)/s^N={q_high:.6g} at s=1e6")
    return problems


def quotient_bounds(
    spec: NonlinearitySpec,
    s_min: float = LIMIT_PROBE_LOW,
    s_max: float = LIMIT_PROBE_HIGH,
    samples: int = 481,
) -> tuple[float, float]:
    """(inf, sup) of f(s)/s^N over a log grid; an overflowing sample makes sup infinite."""
    q = spec.quotient(np.geomspace(s_min, s_max, samples))
    finite = q[np.isfinite(q)]
    lower = float(finite.min()) if finite.size else INF
    upper = INF if finite.size < q.size else float(finite.max())
    return lower, upper


def threshold(lambda1: float, limit: float, N: int) -> float:
    """Bifurcation load lambda1 * limit^(-1/N) with lambda1/0 = inf, lambda1/inf = 0."""
    if limit == 0:
        return INF
    if limit == INF:
        return 0.0
    return lambda1 * limit ** (-1.0 / N)


# =============================================================================
# Shots
# =============================================================================


@dataclass(frozen=True, eq=False)
class ShotResult:
    """One shot of the initial value problem."""

    profile: RadialProfile
    terminal: float
    hit_zero_at: float | None
    flux: np.ndarray
    lam: float
    amplitude: float


def amplitude_grid(
    s_min: float = AMPLITUDE_MIN,
    s_max: float = AMPLITUDE_MAX,
    per_decade: int = POINTS_PER_DECADE,
) -> np.ndarray:
    decades = math.log10(s_max / s_min)
    return np.geomspace(s_min, s_max, int(round(decades * per_decade)) + 1)


def _shoot(lams, amps, spec: NonlinearitySpec, mesh: RadialMesh) -> FluxTrajectory:
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    amps = np.atleast_1d(np.asarray(amps, dtype=float))
    lams, amps = np.broadcast_arrays(lams, amps)
    k = float(spec.N)
    m_w, m_v = origin_moments(mesh, k)
    with np.errstate(all="ignore"):
        f_s = spec.f(amps)
        scale = lams**spec.N
        w1 = scale * f_s * m_w
        v1 = amps - lams * f_s ** (1.0 / k) * m_v

    def source(v):
        return spec.f(np.maximum(v, 0.0))

    return march_flux(mesh, k, radial_forcing(mesh, k), scale, source, amps, v1, w1)


def shoot_terminal(lams, amps, spec: NonlinearitySpec, mesh: RadialMesh) -> np.ndarray:
    """Terminal values (with the zero-crossing sentinel) for a batch of shots."""
    traj = _shoot(lams, amps, spec, mesh)
    return sentinel_terminal(traj.v, mesh.nodes)[0]


def _collect_shots(traj: FluxTrajectory, lams, amps, mesh: RadialMesh) -> list[ShotResult]:
    terminal, r_hat = sentinel_terminal(traj.v, mesh.nodes)
    dv = traj.dv
    shots = []
    for j in range(traj.v.shape[1]):
        profile = RadialProfile(mesh, traj.v[:, j].copy(), dv[:, j].copy())
        hit = None if np.isnan(r_hat[j]) else float(r_hat[j])
        shots.append(
            ShotResult(
                profile=profile,
                terminal=float(terminal[j]),
                hit_zero_at=hit,
                flux=traj.w[:, j].copy(),
                lam=float(np.broadcast_to(lams, traj.v.shape[1:])[j]),
                amplitude=float(np.broadcast_to(amps, traj.v.shape[1:])[j]),
            )
        )
    return shots


def integrate_ivp(lam: float, s: float, spec: NonlinearitySpec, mesh: RadialMesh) -> ShotResult:
    """March from (v, w)(0) = (s, 0) at load lam."""
    if not lam > 0:
        raise ValueError(f"Load lambda must be positive, got {lam}")
    if not s > 0:
        raise ValueError(f"Amplitude must be positive, got {s}")
    traj = _shoot(lam, s, spec, mesh)
    return _collect_shots(traj, lam, s, mesh)[0]


# =============================================================================
# Load for a given amplitude
# =============================================================================


@dataclass(frozen=True, eq=False)
class LambdaSolve:
    """Outcome of solving for the load at one amplitude."""

    amplitude: float
    shot: ShotResult | None = None
    error: str | None = None

    @property
    def success(self) -> bool:
        return self.shot is not None

    @property
    def lam(self) -> float | None:
        return None if self.shot is None else self.shot.lam


def solve_lambda_batch(
    amplitudes,
    spec: NonlinearitySpec,
    mesh: RadialMesh,
    *,
    tol: float = 1e-10,
    bracket: tuple[float, float] = (LAMBDA_FLOOR, LAMBDA_START),
    lambda_cap: float = LAMBDA_CAP,
    growth: float = LAMBDA_GROWTH,
) -> list[LambdaSolve]:
    """Solve lambda(s) for every amplitude at once.

    Each member keeps a bracket with positive terminal at the low end; the
    returned shot is taken at the low end so v(R) >= 0 and the profile stays
    positive.
    """
    amps = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    if np.any(~(amps > 0)):
        raise ValueError("Amplitudes must be positive")
    size = amps.size
    results: list[LambdaSolve | None] = [None] * size

    def terminal(lams, idx):
        return shoot_terminal(lams, amps[idx], spec, mesh)

    lo0 = np.full(size, float(bracket[0]))
    hi0 = np.full(size, float(bracket[1]))
    t_floor = terminal(lo0, np.arange(size))
    for j in np.flatnonzero(~(t_floor > 0)):
        results[j] = LambdaSolve(
            float(amps[j]), error=f"terminal already non-positive at lambda={lo0[j]:g}"
        )

    live = np.flatnonzero(t_floor > 0)
    if live.size:
        lo, hi, found = expand_upper(
            lambda lams, idx: terminal(lams, live[idx]),
            lo0[live],
            hi0[live],
            growth=growth,
            cap=lambda_cap,
        )
        for j in live[~found]:
            results[j] = LambdaSolve(
                float(amps[j]),
                error=f"no solution at this amplitude within lambda-range (cap {lambda_cap:g})",
            )
        good = np.flatnonzero(found)
        if good.size:
            members = live[good]
            lo_b, _ = log_bisect(
                lambda lams, idx: terminal(lams, members[idx]),
                lo[good],
                hi[good],
                rtol=tol,
            )
            traj = _shoot(lo_b, amps[members], spec, mesh)
            for j, shot in zip(members, _collect_shots(traj, lo_b, amps[members], mesh),
                               strict=True):
                results[j] = LambdaSolve(float(amps[j]), shot=shot)

    failed = sum(1 for r in results if r is not None and not r.success)
    if failed:
        logger.info("%d of %d amplitudes have no solution in range", failed, size)
    return results  # type: ignore[return-value]


def check_monotone_shooting(
    s: float,
    spec: NonlinearitySpec,
    mesh: RadialMesh,
    bracket: tuple[float, float],
    probes: int = 8,
) -> bool:
    """True if terminal(lambda) strictly decreases across `probes` points of the bracket."""
    lams = np.geomspace(bracket[0], bracket[1], probes)
    values = shoot_terminal(lams, np.full(probes, s), spec, mesh)
    return bool(np.all(np.diff(values) < 0))


def solve_lambda_for_amplitude(
    s: float,
    spec: NonlinearitySpec,
    mesh: RadialMesh,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-10,
    *,
    lambda_cap: float = LAMBDA_CAP,
) -> tuple[float, ShotResult]:
    """Load lambda(s) and the positive profile at amplitude s.

    A supplied bracket is used when its terminal values straddle zero;
    otherwise the default bracket is expanded geometrically up to lambda_cap.
    """
    if not s > 0:
        raise ValueError(f"Amplitude must be positive, got {s}")
    start = (LAMBDA_FLOOR, LAMBDA_START)
    if bracket is not None:
        lo, hi = bracket
        if not 0 < lo < hi:
            raise ValueError(f"Bracket must satisfy 0 < lo < hi, got {bracket}")
        t_lo, t_hi = shoot_terminal(np.array([lo, hi]), np.array([s, s]), spec, mesh)
        if t_lo > 0 >= t_hi:
            start = (lo, hi)
        else:
            logger.info(
                "bracket (%g, %g) does not straddle (terminals %.3g, %.3g); expanding",
                lo, hi, t_lo, t_hi,
            )

    lo_arr, hi_arr, found = expand_upper(
        lambda lams, idx: shoot_terminal(lams, s, spec, mesh),
        [start[0]],
        [start[1]],
        cap=lambda_cap,
    )
    if shoot_terminal(lo_arr, s, spec, mesh)[0] <= 0:
        raise BracketError(
            "no solution at this amplitude within lambda-range (terminal non-positive at floor)",
            lo=float(lo_arr[0]), hi=float(hi_arr[0]),
        )
    if not found[0]:
        raise BracketError(
            f"no solution at this amplitude within lambda-range (cap {lambda_cap:g})",
            lo=float(lo_arr[0]), hi=float(hi_arr[0]),
        )
    if not check_monotone_shooting(s, spec, mesh, (lo_arr[0], hi_arr[0])):
        raise BracketError(
            "shooting map is not monotone on the bracket",
            lo=float(lo_arr[0]), hi=float(hi_arr[0]),
        )

    lo_b, _ = log_bisect(
        lambda lams, idx: shoot_terminal(lams, s, spec, mesh), lo_arr, hi_arr, rtol=tol
    )
    shot = integrate_ivp(float(lo_b[0]), s, spec, mesh)
    return shot.lam, shot


# =============================================================================
# Amplitudes for a given load
# =============================================================================


def solve_amplitudes_for_lambda(
    lam: float,
    spec: NonlinearitySpec,
    mesh: RadialMesh,
    s_grid=None,
    *,
    tol: float = 1e-10,
) -> list[ShotResult]:
    """Every amplitude carrying a positive solution at load lam, in increasing s."""
    if not lam > 0:
        raise ValueError(f"Load lambda must be positive, got {lam}")
    grid = amplitude_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    values = shoot_terminal(np.full(grid.size, lam), grid, spec, mesh)
    positive = values > 0
    cells = np.flatnonzero(positive[:-1] != positive[1:])
    if cells.size == 0:
        return []

    # Orient each cell so the bracket's low end has the positive terminal.
    orient = np.where(positive[cells], 1.0, -1.0)

    def oriented(s_values, idx):
        return orient[idx] * shoot_terminal(np.full(s_values.size, lam), s_values, spec, mesh)

    lo, hi = log_bisect(oriented, grid[cells], grid[cells + 1], rtol=tol)
    roots = np.where(orient > 0, lo, hi)

    cell_width = math.log(grid[1] / grid[0])
    kept = [roots[0]]
    for root in roots[1:]:
        if math.log(root / kept[-1]) >= cell_width:
            kept.append(root)
    kept_arr = np.array(kept)
    traj = _shoot(np.full(kept_arr.size, lam), kept_arr, spec, mesh)
    return _collect_shots(traj, lam, kept_arr, mesh)


# =============================================================================
# Solution hygiene
# =============================================================================


def double_zero_check(obj: ShotResult | RadialProfile, tol: float = 1e-8) -> bool:
    """True iff v and v' vanish together somewhere while v is not identically zero."""
    profile = obj.profile if isinstance(obj, ShotResult) else obj
    norm = sup_norm(profile)
    if norm <= tol:
        return False
    v_tol = tol * max(1.0, norm)
    dv_tol = tol * max(1.0, float(np.max(np.abs(profile.dvalues))))
    both = (np.abs(profile.values) <= v_tol) & (np.abs(profile.dvalues) <= dv_tol)
    return bool(np.any(both))


def solution_hygiene(shot: ShotResult, tol: float = 1e-8) -> list[str]:
    """Properties every accepted positive solution must have; returns violations."""
    v = shot.profile.values
    nodes = shot.profile.mesh.nodes
    norm = sup_norm(shot.profile)
    slack = tol * max(1.0, norm)
    issues = []
    if double_zero_check(shot, tol):
        issues.append("double zero")
    if np.any(v < (1.0 - nodes / nodes[-1]) * norm - slack):
        issues.append("chord bound violated")
    slopes = np.diff(v) / np.diff(nodes)
    if np.any(np.diff(slopes) > slack):
        issues.append("profile not concave")
    if np.any(np.diff(shot.flux) < -tol * max(1.0, float(np.max(shot.flux)))):
        issues.append("flux not monotone")
    if not np.all(np.isfinite(v)):
        issues.append("non-finite values")
    return issues