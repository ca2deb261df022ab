"""Sturm comparison and the Picone identity for ((-u')^N)' = b(r) u^N.

Two coefficients b2 >= b1 > 0 with u1 positive on (0, R) and u1(R) = 0
force u2 to vanish inside (0, R) unless b1 = b2, in which case u2 is a
multiple of u1. On [0, r_end] with both profiles positive,

    H(r_end) = int_0^r_end (Y + (b2 - b1) u1^(N+1)) dr,
    H = u1^(N+1) (-u2')^N / u2^N - u1 (-u1')^N,

where the Young integrand Y is non-negative pointwise.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from matool.config import worker_count
from matool.errors import BracketError, MeshError
from matool.mesh import RadialMesh, RadialProfile, count_sign_changes
from matool.operators import phi_p
from matool.shooting import (
    FluxTrajectory,
    expand_upper,
    first_crossing,
    log_bisect,
    march_flux,
    sentinel_terminal,
)

logger = logging.getLogger(__name__)

COEFFICIENT_PRESETS = ("constant", "box", "bump")
SHIFT_START = 1.0
SHIFT_FLOOR = 1e-12
SHIFT_CAP = 1e12
INTERIOR_MARGIN = 1e-8
PROPORTIONAL_TOL = 1e-8

Coefficient = Callable[[np.ndarray], np.ndarray] | np.ndarray


# =============================================================================
# Coefficients
# =============================================================================


def coefficient_preset(
    name: str,
    base: float = 1.0,
    height: float = 1.0,
    lo: float = 0.3,
    hi: float = 0.6,
) -> Callable[[np.ndarray], np.ndarray]:
    """b = base, base (1 + height 1_[lo, hi]) or base (1 + height * smooth bump on (lo, hi))."""
    if name not in COEFFICIENT_PRESETS:
        raise ValueError(f"Unknown coefficient preset {name!r} (expected {COEFFICIENT_PRESETS})")
    if not base > 0 or height < 0 or not lo < hi:
        raise ValueError("Coefficient preset needs base > 0, height >= 0 and lo < hi")

    def constant(r):
        return np.full(np.shape(r), base, dtype=float)

    def box(r):
        r = np.asarray(r, dtype=float)
        return base * (1.0 + height * ((r >= lo) & (r <= hi)))

    def bump(r):
        r = np.asarray(r, dtype=float)
        x = (2.0 * r - (lo + hi)) / (hi - lo)
        inside = np.abs(x) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            shape = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - np.where(inside, x, 0.0) ** 2)), 0.0)
        return base * (1.0 + height * shape)

    return {"constant": constant, "box": box, "bump": bump}[name]


def _forcing(b: Coefficient, mesh: RadialMesh) -> tuple[np.ndarray, np.ndarray]:
    """b at nodes and midpoints as (n, K) and (n-1, K)."""
    if callable(b):
        nodes = np.asarray(b(mesh.nodes), dtype=float)
        mids = np.asarray(b(mesh.midpoints), dtype=float)
    else:
        nodes = np.asarray(b, dtype=float)
        if nodes.shape[0] != mesh.n:
            raise MeshError(f"Coefficient needs {mesh.n} samples, got {nodes.shape[0]}")
        columns = nodes.reshape(mesh.n, -1)
        mids = np.column_stack([np.interp(mesh.midpoints, mesh.nodes, col) for col in columns.T])
    nodes = nodes.reshape(mesh.n, -1)
    mids = mids.reshape(mesh.n - 1, -1)
    if np.any(~(nodes > 0)):
        raise ValueError("Coefficient b must be positive on [0, R]")
    return nodes, mids


def _shoot(
    forcing: tuple[np.ndarray, np.ndarray], mesh: RadialMesh, N: int, scale, amplitude: float
) -> FluxTrajectory:
    b_nodes, b_mids = forcing
    size = b_nodes.shape[1]
    scale = np.broadcast_to(np.asarray(scale, dtype=float), (size,))
    r1 = mesh.nodes[1]
    b_bar = 0.5 * (b_nodes[0] + b_nodes[1]) * scale
    u0 = np.full(size, amplitude)
    w1 = b_bar * u0**N * r1
    u1 = u0 * (1.0 - b_bar ** (1.0 / N) * r1 ** (1.0 + 1.0 / N) * N / (N + 1.0))
    return march_flux(
        mesh, float(N), (b_nodes, b_mids), scale, lambda u: phi_p(u, N + 1.0), u0, u1, w1
    )


def _profile(traj: FluxTrajectory, mesh: RadialMesh, column: int = 0) -> RadialProfile:
    return RadialProfile(mesh, traj.v[:, column].copy(), traj.dv[:, column].copy())


def solve_comparison_profile(
    b: Coefficient, mesh: RadialMesh, N: int = 1, amplitude: float = 1.0
) -> RadialProfile:
    """March ((-u')^N)' = b u^N from u(0) = amplitude, continuing through zeros."""
    if not amplitude > 0:
        raise ValueError(f"Amplitude must be positive, got {amplitude}")
    forcing = _forcing(b, mesh)
    if forcing[0].shape[1] != 1:
        raise ValueError("solve_comparison_profile takes a single coefficient")
    return _profile(_shoot(forcing, mesh, N, 1.0, amplitude), mesh)


def interior_zeros(profile: RadialProfile) -> int:
    """Sign changes of u strictly inside (0, R), ignoring a zero at R."""
    scale = float(np.max(np.abs(profile.values)))
    return count_sign_changes(profile.values[:-1], dead_band=1e-12 * scale)


def _principal_shift_batch(
    forcing: tuple[np.ndarray, np.ndarray], mesh: RadialMesh, N: int
) -> np.ndarray:
    b_nodes, b_mids = forcing
    size = b_nodes.shape[1]

    def terminal(shifts, idx):
        part = (b_nodes[:, idx], b_mids[:, idx])
        return sentinel_terminal(_shoot(part, mesh, N, shifts, 1.0).v, mesh.nodes)[0]

    lo = np.full(size, SHIFT_START)
    members = np.arange(size)
    low = terminal(lo, members) <= 0
    while low.any():
        lo[low] /= 4.0
        if np.any(lo < SHIFT_FLOOR):
            raise BracketError("no positive terminal value above shift 1e-12")
        low[low] = terminal(lo[low], members[low]) <= 0
    lo, hi, found = expand_upper(terminal, lo, 4.0 * lo, cap=SHIFT_CAP)
    if not found.all():
        raise BracketError(f"terminal value stays positive up to shift {SHIFT_CAP:g}")
    shift, _ = log_bisect(terminal, lo, hi, rtol=1e-13, fan=15)
    return shift


def principal_shift(b: Coefficient, mesh: RadialMesh, N: int = 1) -> float:
    """Factor c > 0 for which c b carries a positive profile with u(R) = 0."""
    return float(_principal_shift_batch(_forcing(b, mesh), mesh, N)[0])


# =============================================================================
# Comparison instances
# =============================================================================


@dataclass(frozen=True, eq=False)
class ComparisonInstance:
    mesh: RadialMesh
    N: int
    b1: np.ndarray = field(repr=False)
    b2: np.ndarray = field(repr=False)
    u1: RadialProfile = field(repr=False)
    u2: RadialProfile = field(repr=False)
    shift: float = 1.0


def build_instance(
    b1: Coefficient,
    b2: Coefficient,
    mesh: RadialMesh,
    N: int = 1,
    *,
    normalize: bool = True,
    amplitude2: float = 1.0,
) -> ComparisonInstance:
    """Sample both coefficients and solve both profiles.

    With normalize=True both coefficients are multiplied by principal_shift(b1),
    so u1 is positive on (0, R) and vanishes at R.
    """
    b1_nodes = _forcing(b1, mesh)[0][:, 0]
    b2_nodes = _forcing(b2, mesh)[0][:, 0]
    shift = principal_shift(b1, mesh, N) if normalize else 1.0
    b1_nodes, b2_nodes = shift * b1_nodes, shift * b2_nodes
    u1 = solve_comparison_profile(_scaled(b1, shift), mesh, N)
    u2 = solve_comparison_profile(_scaled(b2, shift), mesh, N, amplitude2)
    return ComparisonInstance(mesh, N, b1_nodes, b2_nodes, u1, u2, shift)


def _scaled(b: Coefficient, factor: float) -> Coefficient:
    if callable(b):
        return lambda r: factor * np.asarray(b(r), dtype=float)
    return factor * np.asarray(b, dtype=float)


@dataclass(frozen=True)
class SturmResult:
    zero_in_interior: bool
    proportional: bool
    mu: float | None
    violations: tuple[str, ...]
    first_zero: float | None = None

    @property
    def passed(self) -> bool:
        return not self.violations


def _zero_before(profile: RadialProfile) -> float | None:
    r_hat, crossed = first_crossing(profile.values[:, None], profile.mesh.nodes)
    radius = profile.mesh.radius
    if crossed[0] and r_hat[0] < radius * (1.0 - INTERIOR_MARGIN):
        return float(r_hat[0])
    return None


def sturm_compare(inst: ComparisonInstance) -> SturmResult:
    """Check the comparison conclusions on an instance; hypothesis failures are listed."""
    b1, b2, u1, u2 = inst.b1, inst.b2, inst.u1, inst.u2
    violations = []
    if np.any(b1 <= 0):
        violations.append("b1 is not positive")
    if np.any(b2 < b1 * (1.0 - 1e-12)):
        violations.append("b2 < b1 somewhere")
    scale1 = float(np.max(np.abs(u1.values)))
    if np.any(u1.values[:-1] <= 0) or abs(u1.values[-1]) > 1e-6 * scale1:
        violations.append("u1 is not a positive profile vanishing at R")

    zero = _zero_before(u2)
    equal = bool(np.allclose(b1, b2, rtol=1e-12, atol=0.0))
    proportional, mu = False, None
    if equal:
        mu = float(u2.values[0] / u1.values[0])
        gap = float(np.max(np.abs(u2.values - mu * u1.values)))
        proportional = gap <= PROPORTIONAL_TOL * float(np.max(np.abs(u2.values)))
        if not proportional:
            violations.append(f"b1 = b2 but u2 is not a multiple of u1 (gap {gap:.3g})")
    elif not violations and zero is None:
        violations.append("b2 > b1 but u2 has no zero in (0, R)")
    return SturmResult(zero is not None, proportional, mu, tuple(violations), zero)


# =============================================================================
# Picone identity
# =============================================================================


def _spow(x, e: float):
    return np.sign(x) * np.abs(x) ** e


def _truncation(inst: ComparisonInstance, eps: float | None) -> int:
    """Index of the last node of [0, r_end], r_end = (first zero of u2, or R) - eps."""
    mesh = inst.mesh
    eps = 1e-3 * mesh.radius if eps is None else eps
    if not eps > 0:
        raise ValueError(f"Truncation eps must be positive, got {eps}")
    zero = _zero_before(inst.u2)
    end = (mesh.radius if zero is None else zero) - eps
    last = int(np.searchsorted(mesh.nodes, end, side="right")) - 1
    if last < 2:
        raise ValueError(f"Truncation eps={eps:g} leaves fewer than three nodes")
    for name, u in (("u1", inst.u1), ("u2", inst.u2)):
        tail = u.values[: last + 1]
        if np.min(tail) <= 1e-8 * np.max(np.abs(u.values)):
            raise ValueError(f"{name} vanishes before r={end:.6g}: eps={eps:g} is too small")
    return last


def young_integrand(inst: ComparisonInstance, eps: float | None = None) -> np.ndarray:
    """Y = (-u1')^(N+1) + N (-u1 u2'/u2)^(N+1) + (N+1) u1^N u1' (-u2'/u2)^N on [0, r_end]."""
    last = _truncation(inst, eps)
    N = inst.N
    u1, du1 = inst.u1.values[: last + 1], inst.u1.dvalues[: last + 1]
    u2, du2 = inst.u2.values[: last + 1], inst.u2.dvalues[: last + 1]
    ratio = -du2 / u2
    return (
        _spow(-du1, N + 1.0)
        + N * _spow(u1 * ratio, N + 1.0)
        + (N + 1.0) * u1**N * du1 * _spow(ratio, float(N))
    )


@dataclass(frozen=True)
class PiconeReport:
    residual: float
    boundary: float
    integral: float
    young_min: float
    r_end: float


def picone_report(inst: ComparisonInstance, eps: float | None = None) -> PiconeReport:
    last = _truncation(inst, eps)
    N = inst.N
    nodes = inst.mesh.nodes[: last + 1]
    u1, du1 = inst.u1.values[last], inst.u1.dvalues[last]
    u2, du2 = inst.u2.values[last], inst.u2.dvalues[last]
    boundary = float(u1 ** (N + 1) * _spow(-du2, float(N)) / u2**N - u1 * _spow(-du1, float(N)))

    young = young_integrand(inst, eps)
    weight = (inst.b2 - inst.b1)[: last + 1] * inst.u1.values[: last + 1] ** (N + 1)
    integral = float(trapezoid(young + weight, nodes))
    return PiconeReport(
        residual=abs(boundary - integral),
        boundary=boundary,
        integral=integral,
        young_min=float(np.min(young)),
        r_end=float(nodes[-1]),
    )


def picone_residual(inst: ComparisonInstance, eps: float | None = None) -> float:
    """|H(r_end) - int_0^r_end (Y + (b2 - b1) u1^(N+1))| with eps defaulting to 1e-3 R."""
    return picone_report(inst, eps).residual


# =============================================================================
# Randomized suite
# =============================================================================


@dataclass(frozen=True)
class SturmTrial:
    index: int
    center: float
    width: float
    height: float
    first_zero: float | None

    @property
    def passed(self) -> bool:
        return self.first_zero is not None


@dataclass(frozen=True)
class SturmSuiteReport:
    N: int
    seed: int
    trials: tuple[SturmTrial, ...]

    @property
    def failures(self) -> list[SturmTrial]:
        return [t for t in self.trials if not t.passed]

    @property
    def passed(self) -> bool:
        return not self.failures


def _run_trials(b1: float, mesh: RadialMesh, N: int, params: list) -> list[SturmTrial]:
    columns = []
    for _, center, width, height in params:
        b = coefficient_preset("bump", b1, height, center - width / 2, center + width / 2)
        columns.append(b)
    b_nodes = np.column_stack([b(mesh.nodes) for b in columns])
    b_mids = np.column_stack([b(mesh.midpoints) for b in columns])
    traj = _shoot((b_nodes, b_mids), mesh, N, 1.0, 1.0)
    trials = []
    for j, (index, center, width, height) in enumerate(params):
        trials.append(SturmTrial(index, center, width, height, _zero_before(_profile(traj, mesh, j))))
    return trials


def sturm_suite(
    mesh: RadialMesh,
    N: int = 1,
    trials: int = 100,
    seed: int = 0,
    *,
    workers: int | None = None,
) -> SturmSuiteReport:
    """Random smooth bumps b2 = b1 (1 + U) over a principal constant b1; each u2 must vanish inside.

    Trial k draws its bump from the k-th child of SeedSequence(seed).
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    radius = mesh.radius
    b1 = principal_shift(coefficient_preset("constant"), mesh, N)
    params = []
    for index, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        width = rng.uniform(0.1, 0.4) * radius
        center = rng.uniform(width / 2, radius - width / 2)
        height = rng.uniform(0.2, 2.0)
        params.append((index, center, width, height))

    workers = workers or worker_count()
    size = math.ceil(len(params) / workers)
    chunks = [params[i : i + size] for i in range(0, len(params), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda chunk: _run_trials(b1, mesh, N, chunk), chunks))
    report = SturmSuiteReport(N, seed, tuple(t for chunk in results for t in chunk))
    if not report.passed:
        logger.warning("%d of %d Sturm trials had no interior zero", len(report.failures), trials)
    return report
