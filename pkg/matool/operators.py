"""Integral operators of the fixed-point formulations and a damped Picard iterator.

Every operator has the form

    (T v)(r) = L * int_r^R root_k( int_0^s k t^(k-1) a(t) G(v(t)) dt ) ds

with (k, L, G) depending on the kind:

    T_mu_p   k = p - 1, L = mu,     G = phi_p(v)     (sign-changing v allowed)
    T_N      k = N,     L = lambda, G = v^N
    T_g      k = N,     L = lambda, G = v^N + g(v)
    T_f      k = N,     L = lambda, G = f(v)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from matool.bvp import NonlinearitySpec
from matool.errors import OperatorError
from matool.mesh import RadialMesh, RadialProfile, sup_norm

logger = logging.getLogger(__name__)

OPERATOR_KINDS = ("T_mu_p", "T_g", "T_N", "T_f")
NEGATIVE_SLACK = 1e-12


def phi_p(s, p: float):
    """|s|^(p-2) s, with phi_p(0) = 0 for every p."""
    s = np.asarray(s, dtype=float)
    if p == 2:
        return s
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sign(s) * np.abs(s) ** (p - 1.0)
    return np.where(s == 0, 0.0, out)


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Which operator to apply, on which mesh, at which load."""

    kind: str
    mesh: RadialMesh
    mu_or_lambda: float
    p: float | None = None
    N: int | None = None
    nonlinearity: NonlinearitySpec | None = None

    def __post_init__(self) -> None:
        if self.kind not in OPERATOR_KINDS:
            raise OperatorError(f"Unknown operator {self.kind!r} (expected {OPERATOR_KINDS})")
        if not (self.mu_or_lambda > 0 and math.isfinite(self.mu_or_lambda)):
            raise OperatorError(f"Load must be positive, got {self.mu_or_lambda}")
        if self.kind == "T_mu_p":
            if self.p is None or self.p < 2:
                raise OperatorError(f"T_mu_p needs p >= 2, got {self.p}")
            return
        if self.N is None or int(self.N) != self.N or self.N < 1:
            raise OperatorError(f"{self.kind} needs an integer dimension N >= 1, got {self.N}")
        if self.kind in ("T_g", "T_f") and self.nonlinearity is None:
            raise OperatorError(f"{self.kind} needs a nonlinearity")
        if self.kind == "T_g" and self.nonlinearity.f0 != 0.0:
            raise OperatorError("T_g perturbation g must satisfy g(s)/s^N -> 0 as s -> 0")

    @property
    def exponent(self) -> float:
        return self.p - 1.0 if self.kind == "T_mu_p" else float(self.N)

    def kernel(self, v: np.ndarray) -> np.ndarray:
        if self.kind == "T_mu_p":
            return phi_p(v, self.p)
        if self.kind == "T_N":
            return v**self.N
        if self.kind == "T_g":
            return v**self.N + self.nonlinearity.f(v)
        return self.nonlinearity.f(v)


def apply_operator(spec: OperatorSpec, v: RadialProfile) -> RadialProfile:
    """Evaluate the operator by a prefix-sum inner integral and a suffix-sum outer one."""
    mesh = spec.mesh
    if v.mesh is not mesh and not np.array_equal(v.mesh.nodes, mesh.nodes):
        raise OperatorError("Profile is sampled on a different mesh than the operator")
    values = v.values
    if spec.kind != "T_mu_p":
        if np.any(values < -NEGATIVE_SLACK):
            raise OperatorError(f"{spec.kind} acts on non-negative profiles only")
        values = np.maximum(values, 0.0)

    k = spec.exponent
    nodes = mesh.nodes
    density = k * np.power(nodes, k - 1.0) * mesh.a_values * spec.kernel(values)
    inner = cumulative_trapezoid(density, nodes, initial=0.0)
    # phi_{p'} with p' = p/(p-1) is the odd k-th root.
    flux = phi_p(inner, 1.0 + 1.0 / k)
    outer = cumulative_trapezoid(flux, nodes, initial=0.0)
    load = spec.mu_or_lambda
    result = load * (outer[-1] - outer)
    result[-1] = 0.0
    return RadialProfile(mesh, result, -load * flux)


@dataclass(frozen=True, eq=False)
class PicardResult:
    profile: RadialProfile
    converged: bool
    iterations: int
    diagnostic: str = ""


def picard_iterate(
    spec: OperatorSpec,
    v0: RadialProfile,
    damping: float = 0.7,
    tol: float = 1e-10,
    max_iter: int = 500,
    *,
    cap: float = 1e12,
) -> PicardResult:
    """Damped iteration v <- (1 - damping) v + damping T(v) until the sup-norm update < tol."""
    if not 0 < damping <= 1:
        raise ValueError(f"Damping must lie in (0, 1], got {damping}")
    current = v0
    for iteration in range(1, max_iter + 1):
        image = apply_operator(spec, current)
        values = (1.0 - damping) * current.values + damping * image.values
        dvalues = (1.0 - damping) * current.dvalues + damping * image.dvalues
        update = float(np.max(np.abs(values - current.values)))
        current = RadialProfile(spec.mesh, values, dvalues)
        if not math.isfinite(update) or sup_norm(current) > cap:
            logger.info("Picard iteration diverged after %d steps", iteration)
            return PicardResult(
                current, False, iteration, f"diverged: sup norm exceeded {cap:g}"
            )
        if update < tol:
            return PicardResult(current, True, iteration)
    return PicardResult(
        current, False, max_iter, f"no convergence in {max_iter} iterations (last update {update:.3g})"
    )


@dataclass(frozen=True, eq=False)
class FixedPointCheck:
    """Picard iterate of T_f started at a shooting solution, and its distance from it."""

    result: PicardResult
    gap: float

    @property
    def converged(self) -> bool:
        return self.result.converged


def fixed_point_check(
    nonlinearity: NonlinearitySpec,
    mesh: RadialMesh,
    lam: float,
    profile: RadialProfile,
    tol: float = 1e-10,
    damping: float = 0.7,
    max_iter: int = 500,
) -> FixedPointCheck:
    """Iterate T_f from a shooting profile; gap is the relative sup-norm distance between the two.

    Unstable solutions repel the iteration, so a non-converged result says
    nothing about the shot.
    """
    spec = OperatorSpec("T_f", mesh, lam, N=nonlinearity.N, nonlinearity=nonlinearity)
    start = RadialProfile(mesh, np.maximum(profile.values, 0.0), profile.dvalues)
    result = picard_iterate(spec, start, damping=damping, tol=tol, max_iter=max_iter)
    scale = max(sup_norm(start), np.finfo(float).tiny)
    gap = float(np.max(np.abs(result.profile.values - start.values))) / scale
    logger.debug(
        "fixed-point check at lambda=%g: gap %.3g after %d steps", lam, gap, result.iterations
    )
    return FixedPointCheck(result, gap)
