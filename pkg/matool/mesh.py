"""Radial meshes, quadrature, discrete norms and weight presets.

Every numerical module samples on a RadialMesh. Meshes and profiles are
immutable once built and compare by identity, so they can be used as cache
keys and shared across worker threads.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from matool.errors import MeshError

MIN_NODES = 16
ZERO_DEAD_BAND = 1e-12
GEOMETRIC_STRETCH = 4.0

WEIGHT_PRESETS = ("one", "linear", "power")
GRADINGS = ("uniform", "geometric")
QUADRATURES = ("trapezoid", "simpson")


# =============================================================================
# Weight presets
# =============================================================================


@dataclass(frozen=True)
class WeightPreset:
    """Radial weight a(r): `one` (a = 1), `linear` (a = 1 + r), `power` (a = r^gamma)."""

    name: str = "one"
    gamma: float = 0.0
    scale: float = 1.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.name == "one":
            base = np.ones_like(r)
        elif self.name == "linear":
            base = 1.0 + r
        else:
            base = np.power(r, self.gamma)
        return self.scale * base

    @property
    def is_constant(self) -> bool:
        return self.name == "one" or (self.name == "power" and self.gamma == 0.0)

    def label(self) -> str:
        if self.name == "power":
            return f"power(gamma={self.gamma:g})"
        return self.name


def weight_preset(name: str, gamma: float = 0.0, scale: float = 1.0) -> WeightPreset:
    """Validate and build a weight preset."""
    if name not in WEIGHT_PRESETS:
        raise MeshError(f"Unknown weight preset {name!r} (expected one of {WEIGHT_PRESETS})")
    if gamma < 0:
        raise MeshError(f"Weight exponent gamma must be >= 0, got {gamma}")
    if scale < 0 or not math.isfinite(scale):
        raise MeshError(f"Weight scale must be a finite non-negative number, got {scale}")
    return WeightPreset(name=name, gamma=float(gamma), scale=float(scale))


# =============================================================================
# Mesh and profile types
# =============================================================================


@dataclass(frozen=True, eq=False)
class RadialMesh:
    """Discretization of [0, R] with quadrature weights and sampled a(r)."""

    nodes: np.ndarray
    weights: np.ndarray
    a_values: np.ndarray
    weight: WeightPreset
    grading: str = "uniform"
    quadrature: str = "trapezoid"

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @property
    def radius(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def describe(self) -> str:
        return (
            f"n={self.n}, R={self.radius:g}, a={self.weight.label()}, "
            f"{self.grading}, {self.quadrature}"
        )


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Values v(r_i) and derivatives v'(r_i) on a mesh."""

    mesh: RadialMesh
    values: np.ndarray
    dvalues: np.ndarray

    def __post_init__(self) -> None:
        n = self.mesh.n
        if np.shape(self.values) != (n,) or np.shape(self.dvalues) != (n,):
            raise MeshError(
                f"Profile arrays must have length {n}, got "
                f"{np.shape(self.values)} and {np.shape(self.dvalues)}"
            )

    def scaled(self, factor: float) -> RadialProfile:
        return RadialProfile(self.mesh, factor * self.values, factor * self.dvalues)

    def is_admissible_positive(self, tol: float = 1e-8) -> bool:
        """Interior values positive, v(R) = 0 and v'(0) = 0 within tol."""
        scale = max(1.0, sup_norm(self))
        return bool(
            np.all(self.values[1:-1] > 0.0)
            and abs(self.values[-1]) <= tol * scale
            and abs(self.dvalues[0]) <= tol * scale
        )


# =============================================================================
# Construction
# =============================================================================


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    h = np.diff(nodes)
    weights = np.zeros_like(nodes)
    weights[:-1] += 0.5 * h
    weights[1:] += 0.5 * h
    return weights


def _simpson_weights(nodes: np.ndarray) -> np.ndarray:
    n = nodes.size
    if n % 2 == 0:
        raise MeshError(f"Simpson quadrature needs an odd node count, got {n}")
    h = np.diff(nodes)
    if not np.allclose(h, h[0], rtol=1e-12, atol=0.0):
        raise MeshError("Simpson quadrature needs a uniform mesh")
    weights = np.full(n, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    return weights * (nodes[-1] - nodes[0]) / (3.0 * (n - 1))


def build_mesh(
    n: int,
    radius: float = 1.0,
    a_preset: str | WeightPreset = "one",
    grading: str = "uniform",
    *,
    gamma: float = 0.0,
    scale: float = 1.0,
    quadrature: str = "trapezoid",
) -> RadialMesh:
    """Build a radial mesh on [0, radius].

    Args:
        n: Node count, at least 16.
        radius: Outer radius R.
        a_preset: Weight preset name or a prepared WeightPreset.
        grading: "uniform" or "geometric" (nodes clustered toward r = 0).
        gamma: Exponent for the `power` preset.
        scale: Positive multiplier applied to the weight.
        quadrature: "trapezoid" or "simpson" (odd n, uniform only).

    Returns:
        The mesh, with a(r) sampled at every node.
    """
    if int(n) != n or n < MIN_NODES:
        raise MeshError(f"Mesh needs at least {MIN_NODES} nodes, got {n}")
    if not (radius > 0 and math.isfinite(radius)):
        raise MeshError(f"Radius must be positive and finite, got {radius}")
    if grading not in GRADINGS:
        raise MeshError(f"Unknown grading {grading!r} (expected one of {GRADINGS})")
    if quadrature not in QUADRATURES:
        raise MeshError(f"Unknown quadrature {quadrature!r} (expected one of {QUADRATURES})")

    weight = a_preset if isinstance(a_preset, WeightPreset) else weight_preset(
        a_preset, gamma=gamma, scale=scale
    )

    n = int(n)
    unit = np.linspace(0.0, 1.0, n)
    if grading == "uniform":
        nodes = radius * unit
    else:
        nodes = radius * np.expm1(GEOMETRIC_STRETCH * unit) / math.expm1(GEOMETRIC_STRETCH)
    nodes[0] = 0.0
    nodes[-1] = radius

    if quadrature == "simpson":
        if grading != "uniform":
            raise MeshError("Simpson quadrature needs a uniform mesh")
        weights = _simpson_weights(nodes)
    else:
        weights = _trapezoid_weights(nodes)

    a_values = np.asarray(weight(nodes), dtype=float)
    if np.any(a_values < 0) or not np.all(np.isfinite(a_values)):
        raise MeshError("Weight function must be finite and non-negative on the mesh")
    if not np.any(a_values > 0):
        raise MeshError("Weight function vanishes identically on the mesh")

    for arr in (nodes, weights, a_values):
        arr.setflags(write=False)
    return RadialMesh(
        nodes=nodes,
        weights=weights,
        a_values=a_values,
        weight=weight,
        grading=grading,
        quadrature=quadrature,
    )


def sample_profile(
    mesh: RadialMesh,
    fn: Callable[[np.ndarray], np.ndarray],
    dfn: Callable[[np.ndarray], np.ndarray] | None = None,
) -> RadialProfile:
    """Sample a closed-form profile; derivative by finite differences if dfn is None."""
    values = np.asarray(fn(mesh.nodes), dtype=float) * np.ones(mesh.n)
    if dfn is None:
        dvalues = np.gradient(values, mesh.nodes, edge_order=2)
    else:
        dvalues = np.asarray(dfn(mesh.nodes), dtype=float) * np.ones(mesh.n)
    return RadialProfile(mesh, values, dvalues)


# =============================================================================
# Quadrature and norms
# =============================================================================


def quad_integrate(mesh: RadialMesh, samples) -> float:
    """Composite quadrature of node samples over [0, R]."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (mesh.n,):
        raise MeshError(f"Expected {mesh.n} samples, got shape {samples.shape}")
    return float(mesh.weights @ samples)


def sup_norm(profile: RadialProfile) -> float:
    if profile.values.size == 0:
        return 0.0
    return float(np.max(np.abs(profile.values)))


def count_sign_changes(values, dead_band: float = ZERO_DEAD_BAND) -> int:
    """Sign changes between consecutive samples, ignoring |v| <= dead_band."""
    values = np.asarray(values, dtype=float)
    signs = np.sign(values[np.abs(values) > dead_band])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


# =============================================================================
# Cached radial coefficients
# =============================================================================


@functools.lru_cache(maxsize=64)
def radial_forcing(mesh: RadialMesh, k: float) -> tuple[np.ndarray, np.ndarray]:
    """k r^(k-1) a(r) at nodes and at step midpoints."""

    def forcing(r: np.ndarray) -> np.ndarray:
        return k * np.power(r, k - 1.0) * mesh.weight(r)

    nodes = forcing(mesh.nodes)
    mids = forcing(mesh.midpoints)
    nodes.setflags(write=False)
    mids.setflags(write=False)
    return nodes, mids


@functools.lru_cache(maxsize=64)
def origin_moments(mesh: RadialMesh, k: float) -> tuple[float, float]:
    """Startup moments on [0, r_1].

    Returns (M_w, M_v) with M_w = k int_0^r1 t^(k-1) a(t) dt and
    M_v = int_0^r1 (k int_0^t tau^(k-1) a(tau) dtau)^(1/k) dt.
    """
    r1 = float(mesh.nodes[1])

    def density(t: float) -> float:
        return k * t ** (k - 1.0) * float(mesh.weight(t))

    def inner(t: float) -> float:
        if t <= 0.0:
            return 0.0
        if mesh.weight.is_constant:
            return mesh.weight.scale * t**k
        return integrate.quad(density, 0.0, t, limit=200)[0]

    m_w = inner(r1)
    m_v = integrate.quad(lambda t: max(inner(t), 0.0) ** (1.0 / k), 0.0, r1, limit=200)[0]
    return m_w, m_v
