"""
Finite-k Dyson dynamics.

The SDE dX = -∇H dt + sqrt(2) dB (Full speed, generator Δ - ∇H·∇) or
dX = -½∇H dt + dB (Half speed) is integrated by Euler-Maruyama on a
uniform base grid. A step is accepted when every copy stays strictly
ordered, keeps its smallest gap above gap_factor·sqrt(h)·k and satisfies
the curvature guard h·λ_max ≤ 2; otherwise the Brownian increment is
split at a bridge sample and both halves are retried recursively.

Copies of one path share their noise (synchronous coupling). Each path p
draws its increments from stream (p, 0) and its bridge refinements from
stream (p, 1), so a path's trajectory does not depend on the batch it
runs in.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from dysonlab.core.config import config
from dysonlab.core.constants import DEFAULT_DT, DEFAULT_GAP_FACTOR, DEFAULT_MAX_SUBSTEPS
from dysonlab.core.exceptions import Collision, ConfigError, SubstepExhausted, ValidationError
from dysonlab.space.configspace import EmpiricalLaw, WeylPoint
from dysonlab.utils.helpers import RngLike, as_generator, as_stream, get_run_stats

from . import models
from .models import ModelSpec

logger = logging.getLogger(__name__)

FULL = "full"
HALF = "half"

# Cap on pre-drawn noise held in memory per block (floats).
_MAX_NOISE_DRAWS = 2_000_000

StateLike = Union[WeylPoint, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SdeConfig:
    """Integrator settings."""

    dt: float = DEFAULT_DT
    t_end: float = 0.0
    speed: str = FULL
    max_substeps: int = DEFAULT_MAX_SUBSTEPS
    gap_factor: float = DEFAULT_GAP_FACTOR
    literal_drift: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.speed not in (FULL, HALF):
            raise ConfigError(f"Unknown speed '{self.speed}' (expected full or half)")
        if self.max_substeps < 1:
            raise ConfigError(f"max_substeps must be at least 1, got {self.max_substeps}")
        if not self.gap_factor > 0:
            raise ConfigError(f"gap_factor must be positive, got {self.gap_factor}")

    @classmethod
    def from_config(cls, **overrides) -> "SdeConfig":
        """Settings from the dynamics section of the configuration, then overrides."""
        values = {
            "dt": float(config.get("dynamics.dt", DEFAULT_DT)),
            "speed": str(config.get("dynamics.speed", FULL)),
            "max_substeps": int(config.get("dynamics.max_substeps", DEFAULT_MAX_SUBSTEPS)),
            "gap_factor": float(config.get("dynamics.gap_factor", DEFAULT_GAP_FACTOR)),
            "literal_drift": bool(config.get("dynamics.literal_drift", False)),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def noise_scale(self) -> float:
        return math.sqrt(2.0) if self.speed == FULL else 1.0

    @property
    def drift_factor(self) -> float:
        return 1.0 if self.speed == FULL else 0.5


@dataclass(frozen=True)
class CoupledTrace:
    """ℓ² distances between two synchronously coupled copies over time."""

    times: np.ndarray
    distances: np.ndarray

    def __post_init__(self) -> None:
        if self.times.shape != self.distances.shape:
            raise ValidationError("CoupledTrace times and distances differ in length")


def _state(w: StateLike) -> np.ndarray:
    if isinstance(w, WeylPoint):
        return w.coords.copy()
    values = np.asarray(w, dtype=float).reshape(-1)
    WeylPoint(values)
    return values.copy()


def _checked(model: ModelSpec, w: StateLike) -> np.ndarray:
    x = _state(w)
    if x.size != model.k:
        raise ValidationError(f"Model has k={model.k} particles, state has {x.size}")
    if not models.is_ordered(x):
        raise Collision(f"State {x.tolist()} is not strictly ordered")
    return x


def hamiltonian(model: ModelSpec, w: StateLike) -> float:
    """H = Ψ + Φ at a Weyl point.

    Raises:
        Collision: If two particles coincide
    """
    return float(models.energy(model, _checked(model, w)))


def grad_hamiltonian(model: ModelSpec, w: StateLike) -> np.ndarray:
    """∂_i H = -2 Σ_{j≠i} 1/(x_i - x_j) + ∂_i Φ."""
    return models.gradient(model, _checked(model, w))


def hessian(model: ModelSpec, w: StateLike) -> np.ndarray:
    """Analytic Hessian of H."""
    return models.hessian(model, _checked(model, w))


def hessian_min_eigenvalue(model: ModelSpec, w: StateLike) -> float:
    """Smallest eigenvalue of the Hessian of H."""
    return float(np.linalg.eigvalsh(hessian(model, w))[0])


def drift(model: ModelSpec, x: np.ndarray, cfg: SdeConfig) -> np.ndarray:
    """Drift of the SDE, batched over leading axes.

    With literal_drift the confinement enters as 2∇Φ, matching the
    coefficient displayed for the finite-k systems; e^(-H) is then no
    longer invariant.
    """
    confinement = models.confinement_gradient(model, x)
    if cfg.literal_drift:
        confinement = 2.0 * confinement
    return -cfg.drift_factor * (models.interaction_gradient(x) + confinement)


class _Integrator:
    """Adaptive Euler-Maruyama for a batch of paths with coupled copies."""

    def __init__(
        self,
        model: ModelSpec,
        cfg: SdeConfig,
        bridges: Optional[List[np.random.Generator]],
        on_substep: Optional[Callable[[float, np.ndarray], None]] = None,
    ) -> None:
        self.model = model
        self.cfg = cfg
        self.bridges = bridges
        self.on_substep = on_substep
        self.sigma = cfg.noise_scale
        curvature_factor = 2.0 if cfg.literal_drift else 1.0
        self._confinement_excess = (curvature_factor - 1.0) * model.confinement_curvature
        self.refinements = 0

    def propose(self, x: np.ndarray, h: float, dw: np.ndarray) -> np.ndarray:
        return x + drift(self.model, x, self.cfg) * h + self.sigma * dw

    def accept(self, old: np.ndarray, new: np.ndarray, h: float) -> np.ndarray:
        """Per-path acceptance over all copies; arrays have shape (..., C, k)."""
        ordered = np.all(models.is_ordered(new), axis=-1)
        threshold = self.cfg.gap_factor * math.sqrt(h) * self.model.k
        with np.errstate(invalid="ignore"):
            gaps = np.minimum(models.min_gap(old), models.min_gap(new))
        wide = np.all(gaps >= threshold, axis=-1)
        curvature = models.curvature_bound(self.model, old) + self._confinement_excess
        stable = np.all(self.cfg.drift_factor * h * curvature <= 2.0, axis=-1)
        return ordered & wide & stable

    def refine(self, path: int, x: np.ndarray, h: float, dw: np.ndarray, time: float, depth: int) -> np.ndarray:
        """Redo one step of one path as two half steps, recursively."""
        if depth > self.cfg.max_substeps:
            raise SubstepExhausted(
                f"Step of size {h:.3g} at t={time:.6g} still rejected after "
                f"{self.cfg.max_substeps} halvings"
            )
        self.refinements += 1
        half = 0.5 * h
        if self.bridges is not None:
            first = 0.5 * dw + 0.5 * math.sqrt(h) * self.bridges[path].standard_normal(dw.shape[-1])
        else:
            first = 0.5 * dw
        for piece in (first, dw - first):
            candidate = self.propose(x, half, piece)
            if self.accept(x, candidate, half):
                x = candidate
                if self.on_substep is not None:
                    self.on_substep(time + half, x)
            else:
                x = self.refine(path, x, half, piece, time, depth + 1)
            time += half
        return x

    def advance(self, x: np.ndarray, h: float, dw: np.ndarray, time: float) -> np.ndarray:
        """One base step for all paths; x has shape (P, C, k), dw shape (P, k)."""
        candidate = self.propose(x, h, dw[:, None, :])
        ok = self.accept(x, candidate, h)
        for path in np.flatnonzero(~ok):
            candidate[path] = self.refine(int(path), x[path], h, dw[path], time, 1)
        if self.on_substep is not None and ok.all():
            self.on_substep(time + h, candidate[0])
        return candidate


def _base_grid(t: float, dt: float) -> Tuple[int, float]:
    if t < 0:
        raise ConfigError(f"Evolution time must be nonnegative, got {t}")
    if t == 0:
        return 0, 0.0
    steps = max(1, math.ceil(t / dt - 1e-9))
    return steps, t / steps


def evolve_paths(
    model: ModelSpec,
    x0: np.ndarray,
    t: float,
    cfg: Optional[SdeConfig] = None,
    rng: RngLike = None,
    on_base_step: Optional[Callable[[float, np.ndarray], None]] = None,
    on_substep: Optional[Callable[[float, np.ndarray], None]] = None,
) -> np.ndarray:
    """Integrate a batch of paths, each with one or more coupled copies.

    Args:
        x0: initial states, shape (P, k) or (P, C, k), rows strictly decreasing
        on_base_step: called with (time, states) after every base step
        on_substep: called with (time, copies of path 0) after every accepted
            step or substep; only for single-path batches

    Returns:
        terminal states with the shape of x0
    """
    settings = cfg or SdeConfig.from_config()
    states = np.array(x0, dtype=float)
    squeeze = states.ndim == 2
    if squeeze:
        states = states[:, None, :]
    if states.ndim != 3 or states.shape[-1] != model.k:
        raise ValidationError(f"Expected states of shape (P, [C,] {model.k}), got {np.shape(x0)}")
    if not np.all(models.is_ordered(states)):
        raise Collision("Initial states must be strictly ordered")
    if on_substep is not None and states.shape[0] != 1:
        raise ValidationError("Substep recording is only available for a single path")

    steps, h = _base_grid(t, settings.dt)
    if steps == 0:
        return states[:, 0, :] if squeeze else states

    stream = as_stream(rng)
    n_paths, _, k = states.shape
    noise = [stream.spawn(p).spawn(0).generator() for p in range(n_paths)]
    bridges = [stream.spawn(p).spawn(1).generator() for p in range(n_paths)]
    integrator = _Integrator(model, settings, bridges, on_substep)
    block = max(1, min(steps, _MAX_NOISE_DRAWS // (n_paths * k)))
    root_h = math.sqrt(h)

    done = 0
    while done < steps:
        size = min(block, steps - done)
        increments = np.stack([g.standard_normal((size, k)) for g in noise]) * root_h
        for s in range(size):
            time = (done + s) * h
            states = integrator.advance(states, h, increments[:, s, :], time)
            if on_base_step is not None:
                on_base_step(time + h, states)
        done += size

    get_run_stats().record_operation("evolve_paths")
    logger.debug(
        f"Integrated {n_paths} path(s) of {model.regime} k={model.k} to t={t} "
        f"({steps} base steps, {integrator.refinements} refinements)"
    )
    return states[:, 0, :] if squeeze else states


def step(
    model: ModelSpec,
    w: StateLike,
    dt: float,
    noise: np.ndarray,
    cfg: Optional[SdeConfig] = None,
    rng: RngLike = None,
) -> WeylPoint:
    """One adaptive Euler-Maruyama step.

    Args:
        noise: the Brownian increment over dt (standard normals scaled by sqrt(dt))
        rng: source for Brownian-bridge refinements; without one a rejected
            step splits the increment at its midpoint

    Raises:
        SubstepExhausted: If halving exceeds cfg.max_substeps
    """
    settings = cfg or SdeConfig.from_config()
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    x = _checked(model, w)[None, :]
    dw = np.asarray(noise, dtype=float).reshape(-1)
    if dw.size != model.k:
        raise ValidationError(f"Noise has {dw.size} components for k={model.k}")
    bridges = None if rng is None else [as_generator(rng)]
    integrator = _Integrator(model, settings, bridges)
    candidate = integrator.propose(x, dt, dw)
    if not integrator.accept(x, candidate, dt):
        candidate = integrator.refine(0, x, dt, dw, 0.0, 1)
    return WeylPoint(candidate[0])


def evolve(
    model: ModelSpec,
    w0: StateLike,
    t: float,
    cfg: Optional[SdeConfig] = None,
    rng: RngLike = None,
) -> WeylPoint:
    """Terminal state of one path started at w0 (the path with stream index 0)."""
    x = _checked(model, w0)
    return WeylPoint(evolve_paths(model, x[None, :], t, cfg, rng)[0])


def _law_states(model: ModelSpec, law: Union[EmpiricalLaw, np.ndarray]) -> np.ndarray:
    if isinstance(law, EmpiricalLaw):
        states = np.array([m.points[::-1] for m in law])
    else:
        states = np.asarray(law, dtype=float)
        if states.ndim == 1:
            states = states[None, :]
    if states.ndim != 2 or states.shape[1] != model.k:
        raise ValidationError(f"Every member must hold k={model.k} points")
    return states


def evolve_ensemble(
    model: ModelSpec,
    law: Union[EmpiricalLaw, np.ndarray],
    t: float,
    cfg: Optional[SdeConfig] = None,
    rng: RngLike = None,
) -> EmpiricalLaw:
    """Evolve every member independently, member a on stream index a."""
    states = _law_states(model, law)
    return EmpiricalLaw.from_array(evolve_paths(model, states, t, cfg, rng))


def evolve_coupled(
    model: ModelSpec,
    w0: StateLike,
    v0: StateLike,
    t: float,
    cfg: Optional[SdeConfig] = None,
    rng: RngLike = None,
) -> CoupledTrace:
    """Two copies driven by identical noise; distance recorded at every accepted step."""
    x = np.stack([_checked(model, w0), _checked(model, v0)])[None, :, :]
    times: List[float] = [0.0]
    distances: List[float] = [float(np.linalg.norm(x[0, 0] - x[0, 1]))]

    def record(time: float, copies: np.ndarray) -> None:
        times.append(time)
        distances.append(float(np.linalg.norm(copies[0] - copies[1])))

    evolve_paths(model, x, t, cfg, rng, on_substep=record)
    return CoupledTrace(np.array(times), np.array(distances))


@dataclass(frozen=True)
class CoupledBatch:
    """Distances between coupled copies of many paths on the base grid."""

    times: np.ndarray
    distances: np.ndarray
    terminal: np.ndarray


def evolve_coupled_batch(
    model: ModelSpec,
    x0: np.ndarray,
    y0: np.ndarray,
    t: float,
    cfg: Optional[SdeConfig] = None,
    rng: RngLike = None,
    p: float = 2.0,
) -> CoupledBatch:
    """Synchronously coupled pairs (x0[i], y0[i]); ℓ^p distances at every base step.

    Returns:
        CoupledBatch with distances of shape (steps + 1, P) and terminal
        states of shape (P, 2, k)
    """
    left = np.asarray(x0, dtype=float)
    right = np.asarray(y0, dtype=float)
    if left.shape != right.shape:
        raise ValidationError(f"Coupled batches differ in shape: {left.shape} vs {right.shape}")
    states = np.stack([left, right], axis=1)

    def distance(s: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(s[:, 0, :] - s[:, 1, :]) ** p, axis=-1) ** (1.0 / p)

    times: List[float] = [0.0]
    distances: List[np.ndarray] = [distance(states)]

    def record(time: float, s: np.ndarray) -> None:
        times.append(time)
        distances.append(distance(s))

    terminal = evolve_paths(model, states, t, cfg, rng, on_base_step=record)
    return CoupledBatch(np.array(times), np.stack(distances), terminal)


