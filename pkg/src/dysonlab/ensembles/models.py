"""
Finite-k Dyson models: H = Ψ + Φ on the Weyl chamber.

Ψ(x) = -2 Σ_{i<j} log|x_i - x_j| is the logarithmic repulsion shared by both
regimes; the confinement Φ is Σ x²/(2k) in the bulk and
Σ (x + 2k^(2/3))² / (4 k^(1/3)) at the soft edge. All functions here are
vectorized over leading batch dimensions: a state is an array of shape
(..., k) with coordinates in decreasing order.
"""

import math
from dataclasses import dataclass

import numpy as np

from dysonlab.core.exceptions import ConfigError

BULK = "bulk"
EDGE = "edge"


@dataclass(frozen=True)
class ModelSpec:
    """Regime and particle count of a finite Dyson model."""

    regime: str
    k: int

    def __post_init__(self) -> None:
        if self.regime not in (BULK, EDGE):
            raise ConfigError(f"Unknown regime '{self.regime}' (expected bulk or edge)")
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"Particle count must be a positive integer, got {self.k}")

    @classmethod
    def bulk(cls, k: int) -> "ModelSpec":
        return cls(BULK, k)

    @classmethod
    def edge(cls, k: int) -> "ModelSpec":
        return cls(EDGE, k)

    @property
    def edge_shift(self) -> float:
        return 2.0 * self.k ** (2.0 / 3.0) if self.regime == EDGE else 0.0

    @property
    def confinement_curvature(self) -> float:
        """Φ'' per coordinate: 1/k in the bulk, 1/(2 k^(1/3)) at the edge."""
        if self.regime == BULK:
            return 1.0 / self.k
        return 1.0 / (2.0 * self.k ** (1.0 / 3.0))

    def from_gue(self, eigenvalues: np.ndarray) -> np.ndarray:
        """Exact change of variables from β=2 GUE eigenvalues to e^(-H).

        Bulk: x = sqrt(k) λ. Edge: x = sqrt(2) k^(1/6) λ - 2 k^(2/3).
        """
        lam = np.asarray(eigenvalues, dtype=float)
        if self.regime == BULK:
            return math.sqrt(self.k) * lam
        return math.sqrt(2.0) * self.k ** (1.0 / 6.0) * lam - self.edge_shift

    def spread_state(self) -> np.ndarray:
        """Deterministic strictly decreasing state at the semicircle positions."""
        i = np.arange(1, self.k + 1)
        lam = 2.0 * math.sqrt(self.k) * np.cos(math.pi * (i - 0.5) / self.k)
        return self.from_gue(lam)


def _differences(x: np.ndarray) -> np.ndarray:
    diff = x[..., :, None] - x[..., None, :]
    k = x.shape[-1]
    diff[..., np.arange(k), np.arange(k)] = np.inf
    return diff


def is_ordered(x: np.ndarray) -> np.ndarray:
    """Strict decreasing order along the last axis."""
    values = np.asarray(x, dtype=float)
    if values.shape[-1] < 2:
        return np.isfinite(values).all(axis=-1)
    return np.all(np.diff(values, axis=-1) < 0, axis=-1) & np.isfinite(values).all(axis=-1)


def min_gap(x: np.ndarray) -> np.ndarray:
    """Smallest consecutive gap x_i - x_(i+1); inf for a single particle."""
    values = np.asarray(x, dtype=float)
    if values.shape[-1] < 2:
        return np.full(values.shape[:-1], np.inf)
    return np.min(-np.diff(values, axis=-1), axis=-1)


def interaction(x: np.ndarray) -> np.ndarray:
    """Ψ(x); +inf where two coordinates coincide or cross."""
    values = np.asarray(x, dtype=float)
    k = values.shape[-1]
    if k < 2:
        return np.zeros(values.shape[:-1])
    i, j = np.triu_indices(k, 1)
    gaps = values[..., i] - values[..., j]
    with np.errstate(divide="ignore", invalid="ignore"):
        energy = -2.0 * np.sum(np.log(np.where(gaps > 0, gaps, np.nan)), axis=-1)
    return np.where(np.all(gaps > 0, axis=-1), energy, np.inf)


def confinement(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if model.regime == BULK:
        return np.sum(values**2, axis=-1) / (2.0 * model.k)
    return np.sum((values + model.edge_shift) ** 2, axis=-1) / (4.0 * model.k ** (1.0 / 3.0))


def confinement_gradient(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    return model.confinement_curvature * (np.asarray(x, dtype=float) + model.edge_shift)


def interaction_gradient(x: np.ndarray) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if values.shape[-1] < 2:
        return np.zeros_like(values)
    return -2.0 * np.sum(1.0 / _differences(values), axis=-1)


def energy(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """H = Ψ + Φ, batched."""
    return interaction(x) + confinement(model, x)


def gradient(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """∇H, batched."""
    return interaction_gradient(x) + confinement_gradient(model, x)


def hessian(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """Analytic Hessian of H, shape (..., k, k)."""
    values = np.asarray(x, dtype=float)
    k = values.shape[-1]
    inverse_square = 1.0 / _differences(values) ** 2
    matrix = -2.0 * inverse_square
    diagonal = 2.0 * np.sum(inverse_square, axis=-1) + model.confinement_curvature
    idx = np.arange(k)
    matrix[..., idx, idx] = diagonal
    return matrix


def curvature_bound(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """Upper bound on the largest Hessian eigenvalue.

    Gershgorin with Σ_{j≠i} 1/(x_i-x_j)² ≤ 2(π²/6)/g² for the smallest gap g
    gives λ_max ≤ 8(π²/6)/g² + Φ''.
    """
    gap = min_gap(x)
    with np.errstate(divide="ignore"):
        return 8.0 * (math.pi**2 / 6.0) / gap**2 + model.confinement_curvature
