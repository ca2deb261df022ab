"""Fixed-step RK4 marching of radial flux systems and vectorized bracketing.

All shooting problems in matool reduce to the first-order system

    v' = -root_k(w),    w' = scale * F(r) * g(v),    F(r) = k r^(k-1) a(r)

marched from an analytic startup at r_1. Every array carries a trailing batch
axis of size K so a whole family of shots (amplitudes, loads, trial
coefficients) advances in one pass.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from matool.mesh import RadialMesh

logger = logging.getLogger(__name__)

TerminalFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def odd_root(w, k: float):
    """Sign-preserving k-th root, |w|^(1/k) sign(w)."""
    if k == 1:
        return w
    return np.sign(w) * np.abs(w) ** (1.0 / k)


@dataclass(frozen=True, eq=False)
class FluxTrajectory:
    """Node samples of (v, w), each of shape (n, K)."""

    v: np.ndarray
    w: np.ndarray
    k: float = 1.0

    @property
    def dv(self) -> np.ndarray:
        return -odd_root(self.w, self.k)


def march_flux(
    mesh: RadialMesh,
    k: float,
    forcing: tuple[np.ndarray, np.ndarray],
    scale,
    g: Callable[[np.ndarray], np.ndarray],
    v0,
    v1,
    w1,
) -> FluxTrajectory:
    """March the flux system from node 1 to R with classical RK4.

    Args:
        mesh: Radial mesh.
        k: Root exponent of the flux.
        forcing: F at nodes (n,) and at step midpoints (n-1,); a trailing
            batch axis (n, K) is allowed for per-member coefficients.
        scale: Per-member multiplier of the forcing, shape (K,).
        g: Vectorized source term g(v).
        v0: Values at r = 0, shape (K,). The flux at r = 0 is zero.
        v1, w1: Startup state at r_1, shape (K,).
    """
    f_nodes, f_mids = forcing
    v1 = np.atleast_1d(np.asarray(v1, dtype=float))
    size = v1.size
    n = mesh.n
    scale = np.broadcast_to(np.asarray(scale, dtype=float), (size,))

    v = np.empty((n, size))
    w = np.empty((n, size))
    v[0] = v0
    w[0] = 0.0
    v[1] = v1
    w[1] = w1

    steps = mesh.steps
    with np.errstate(all="ignore"):
        for i in range(1, n - 1):
            h = steps[i]
            vi = v[i]
            wi = w[i]
            fa = scale * f_nodes[i]
            fm = scale * f_mids[i]
            fb = scale * f_nodes[i + 1]

            k1v = -odd_root(wi, k)
            k1w = fa * g(vi)
            k2v = -odd_root(wi + 0.5 * h * k1w, k)
            k2w = fm * g(vi + 0.5 * h * k1v)
            k3v = -odd_root(wi + 0.5 * h * k2w, k)
            k3w = fm * g(vi + 0.5 * h * k2v)
            k4v = -odd_root(wi + h * k3w, k)
            k4w = fb * g(vi + h * k3v)

            v[i + 1] = vi + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            w[i + 1] = wi + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)

    return FluxTrajectory(v=v, w=w, k=k)


def first_crossing(v: np.ndarray, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First radius where each column of v reaches zero.

    A non-finite value counts as a crossing at the preceding node. Returns
    (r_hat, crossed) with r_hat = nan for columns that stay positive.
    """
    tail = v[1:]
    hit = ~(tail > 0.0)
    crossed = hit.any(axis=0)
    idx = np.argmax(hit, axis=0) + 1
    cols = np.arange(v.shape[1])
    prev = v[idx - 1, cols]
    cur = v[idx, cols]
    with np.errstate(all="ignore"):
        frac = np.where(np.isfinite(cur), prev / (prev - cur), 0.0)
    frac = np.clip(np.nan_to_num(frac), 0.0, 1.0)
    r_hat = nodes[idx - 1] + frac * (nodes[idx] - nodes[idx - 1])
    return np.where(crossed, r_hat, np.nan), crossed


def sentinel_terminal(v: np.ndarray, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """v(R) for columns that stay positive, else -(R - r_hat).

    Returns (terminal, r_hat).
    """
    r_hat, crossed = first_crossing(v, nodes)
    radius = nodes[-1]
    terminal = np.where(crossed, -(radius - np.nan_to_num(r_hat)), v[-1])
    return terminal, r_hat


# =============================================================================
# Bracketing
# =============================================================================


def expand_upper(
    terminal: TerminalFn,
    lo,
    hi,
    *,
    growth: float = 4.0,
    cap: float = 1e8,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grow hi geometrically until terminal(hi) <= 0 for each member.

    Returns (lo, hi, found); members with found = False still have a positive
    terminal value at the cap.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    members = np.arange(hi.size)
    t_hi = terminal(hi, members)
    pending = t_hi > 0.0
    rounds = 0
    while pending.any():
        grow = np.flatnonzero(pending & (hi < cap))
        if grow.size == 0:
            break
        lo[grow] = hi[grow]
        hi[grow] = np.minimum(hi[grow] * growth, cap)
        t_hi[grow] = terminal(hi[grow], grow)
        pending = t_hi > 0.0
        rounds += 1
    if rounds:
        logger.debug("bracket expansion took %d rounds, %d exhausted", rounds, pending.sum())
    return lo, hi, ~pending


def _fan_bisect(
    terminal: TerminalFn,
    lo,
    hi,
    *,
    tol: float,
    max_iter: int,
    fan: int,
    log_space: bool,
) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    fractions = np.arange(1, fan + 1) / (fan + 1)
    for _ in range(max_iter):
        if log_space:
            active = np.flatnonzero(hi / lo - 1.0 > tol)
        else:
            size = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
            active = np.flatnonzero(hi - lo > tol * size)
        if active.size == 0:
            break
        a, b = lo[active], hi[active]
        if log_space:
            a, b = np.log(a), np.log(b)
        points = a[:, None] + fractions[None, :] * (b - a)[:, None]
        if log_space:
            points = np.exp(points)
        values = terminal(points.ravel(), np.repeat(active, fan)).reshape(active.size, fan)
        below = ~(values > 0.0)
        any_below = below.any(axis=1)
        first = np.argmax(below, axis=1)
        rows = np.arange(active.size)
        new_hi = np.where(any_below, points[rows, first], hi[active])
        left = np.where(first > 0, points[rows, np.maximum(first - 1, 0)], lo[active])
        new_lo = np.where(any_below, left, points[:, -1])
        lo[active] = new_lo
        hi[active] = new_hi
    return lo, hi


def log_bisect(
    terminal: TerminalFn,
    lo,
    hi,
    *,
    rtol: float = 1e-10,
    max_iter: int = 200,
    fan: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Shrink brackets with terminal(lo) > 0 >= terminal(hi) in log space.

    Each round probes `fan` log-spaced interior points per member in one
    batched call, so fan = 1 is plain bisection and larger fans trade batch
    width for fewer rounds.
    """
    return _fan_bisect(terminal, lo, hi, tol=rtol, max_iter=max_iter, fan=fan, log_space=True)


def linear_bisect(
    terminal: TerminalFn,
    lo,
    hi,
    *,
    tol: float = 1e-10,
    max_iter: int = 200,
    fan: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Same as log_bisect for brackets that may straddle zero.

    Stops when hi - lo <= tol * max(1, |lo|, |hi|).
    """
    return _fan_bisect(terminal, lo, hi, tol=tol, max_iter=max_iter, fan=fan, log_space=False)
