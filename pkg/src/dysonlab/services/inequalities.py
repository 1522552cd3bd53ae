"""
Inequality checks for the Dyson flows.

Closed-form checks work on the one-particle bulk model, where the flow is
an Ornstein-Uhlenbeck process and Gaussian laws stay Gaussian: EVI, HWI,
the energy and slope identities, Brunn-Minkowski with the Gaussian
measure, and the Harnack and Bakry-Émery estimates by Gauss-Hermite
quadrature against the transition kernel. Monte Carlo checks evolve
ensembles of Weyl points with synchronously coupled noise.

Every check returns a CheckReport; none of them raises on failure.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import ndtr

from dysonlab.core.config import config
from dysonlab.core.constants import (
    CLOSED_FORM_TOLERANCE,
    CONTRACTION_SLACK_PER_DT,
    GAUSS_HERMITE_ORDER,
    MONTE_CARLO_BIAS_FLOOR,
    QUADRATURE_TOLERANCE,
)
from dysonlab.core.exceptions import ConfigError, EmptySet, SizeMismatch, ValidationError
from dysonlab.ensembles.dynamics import FULL, SdeConfig, evolve_paths
from dysonlab.ensembles.models import BULK, ModelSpec
from dysonlab.ensembles.sampling import sample_mu_k_ensemble
from dysonlab.flows.functionals import (
    STANDARD,
    GaussianLaw,
    energy_identity_residual,
    gaussian_entropy,
    gaussian_fisher,
    gaussian_fisher_quarter,
    gaussian_w2,
    metric_slope,
    numerical_slope,
    ou_evolve,
    w2_squared_rate,
)
from dysonlab.space.configspace import EmpiricalLaw
from dysonlab.space.transport import optimal_plan, wasserstein
from dysonlab.utils.helpers import RngLike, as_generator, as_stream

from .reports import CheckReport, report

logger = logging.getLogger(__name__)

ArrayFunction = Callable[[np.ndarray], np.ndarray]

# Finite-difference offset for coupled gradient estimates.
_COUPLING_OFFSET = 1e-4


@dataclass(frozen=True)
class TestFunction:
    """A scalar test function with its derivative."""

    __test__ = False

    name: str
    value: ArrayFunction
    gradient: ArrayFunction
    positive: bool


def _constant(x: np.ndarray) -> np.ndarray:
    return np.ones_like(np.asarray(x, dtype=float))


def _zero(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


TEST_FUNCTIONS: Dict[str, TestFunction] = {
    f.name: f
    for f in (
        TestFunction("gaussian_bump", lambda x: np.exp(-(x**2)), lambda x: -2.0 * x * np.exp(-(x**2)), True),
        TestFunction("shifted_sine", lambda x: 2.0 + np.sin(x), np.cos, True),
        TestFunction("cauchy", lambda x: 1.0 / (1.0 + x**2), lambda x: -2.0 * x / (1.0 + x**2) ** 2, True),
        TestFunction("constant", _constant, _zero, True),
        TestFunction("linear", lambda x: np.asarray(x, dtype=float), _constant, False),
        TestFunction("sine", np.sin, np.cos, False),
        TestFunction("tanh", np.tanh, lambda x: 1.0 - np.tanh(x) ** 2, False),
    )
}

HARNACK_FUNCTIONS = tuple(name for name, f in TEST_FUNCTIONS.items() if f.positive)
GRADIENT_FUNCTIONS = tuple(TEST_FUNCTIONS)


def test_function(spec: Union[str, TestFunction]) -> TestFunction:
    if isinstance(spec, TestFunction):
        return spec
    try:
        return TEST_FUNCTIONS[spec]
    except KeyError:
        raise ConfigError(f"Unknown test function '{spec}' (known: {', '.join(TEST_FUNCTIONS)})") from None


test_function.__test__ = False


def _tolerance(key: str, default: float) -> float:
    return float(config.get(key, default))


def ou_expectation(f: ArrayFunction, x: Union[float, np.ndarray], t: float, order: Optional[int] = None) -> np.ndarray:
    """T_t f(x) = E f(x e^(-t) + sqrt(1 - e^(-2t)) Z) for the Full-speed k=1 bulk flow."""
    points = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return np.asarray(f(points), dtype=float)
    n = int(order or config.get("harness.quadrature_order", GAUSS_HERMITE_ORDER))
    nodes, weights = hermegauss(n)
    spread = math.sqrt(-math.expm1(-2.0 * t))
    arguments = points[:, None] * math.exp(-t) + spread * nodes[None, :]
    return np.sum(np.asarray(f(arguments), dtype=float) * weights, axis=1) / math.sqrt(2.0 * math.pi)


# ----------------------------------------------------------------------
# EVI
# ----------------------------------------------------------------------


def evi_residual(sigma: GaussianLaw, nu: GaussianLaw, curvature: float = 0.0, speed: str = FULL) -> float:
    """H(ν) - H(σ) - ½ d/dt W2²(σ_t, ν) - (K/2) W2²(σ, ν) at the current law σ."""
    distance = gaussian_w2(sigma, nu)
    return (
        gaussian_entropy(nu)
        - gaussian_entropy(sigma)
        - 0.5 * w2_squared_rate(sigma, nu, speed)
        - 0.5 * curvature * distance**2
    )


def check_evi_gaussian(
    sigma0: GaussianLaw,
    nu: GaussianLaw,
    t_grid: Sequence[float],
    curvature: float = 0.0,
    speed: str = FULL,
) -> CheckReport:
    """EVI_K along the k=1 flow from σ0, minimum residual over the time grid."""
    residuals = [evi_residual(ou_evolve(sigma0, float(t), speed), nu, curvature, speed) for t in t_grid]
    worst = int(np.argmin(residuals))
    return report(
        "evi_gaussian",
        residuals[worst],
        _tolerance("harness.closed_form_tolerance", CLOSED_FORM_TOLERANCE),
        parameters={
            "sigma0": [sigma0.mean, sigma0.variance],
            "nu": [nu.mean, nu.variance],
            "K": curvature,
            "speed": speed,
            "t_worst": float(t_grid[worst]),
        },
    )


def check_evi_half_speed_control(
    sigma0: GaussianLaw = GaussianLaw(0.0, 4.0),
    nu: GaussianLaw = STANDARD,
) -> CheckReport:
    """The Half-speed flow must violate EVI_0 at t=0; passes when it does."""
    half = evi_residual(sigma0, nu, 0.0, "half")
    full = evi_residual(sigma0, nu, 0.0, FULL)
    return report(
        "evi_half_speed_control",
        -half,
        0.0,
        parameters={"half_speed_residual": half, "full_speed_residual": full},
        label="negative-control",
    )


@dataclass(frozen=True)
class EnsembleSpec:
    """Equilibrium samples of a model pushed through x ↦ shift + scale·x.

    For the k=1 bulk model this is the Gaussian law N(shift, scale²).
    """

    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ConfigError(f"Ensemble scale must be positive, got {self.scale}")

    @classmethod
    def from_gaussian(cls, g: GaussianLaw) -> "EnsembleSpec":
        return cls(g.mean, g.std)

    def gaussian(self) -> GaussianLaw:
        return GaussianLaw(self.shift, self.scale**2)

    def sample(self, model: ModelSpec, n: int, rng: RngLike) -> np.ndarray:
        return self.shift + self.scale * sample_mu_k_ensemble(model, n, rng, method="exact")


def check_evi_monte_carlo(
    model: ModelSpec,
    sigma0: EnsembleSpec,
    nu: EnsembleSpec,
    t: float,
    n: int,
    rng: RngLike = None,
    cfg: Optional[SdeConfig] = None,
    curvature: float = 0.0,
    batches: int = 10,
) -> CheckReport:
    """EVI from simulated ensembles.

    With one bulk particle the evolved ensemble is Gaussian: each batch is
    fitted by its sample mean and variance and the EVI residual is read
    off the fit, giving a batch-mean standard error. Otherwise no entropy
    is available and the check degrades to W2 contraction between the
    evolved ensembles.
    """
    stream = as_stream(rng)
    start = sigma0.sample(model, n, stream.spawn(0))
    if model.k != 1 or model.regime != BULK:
        target = nu.sample(model, n, stream.spawn(1))
        contraction = check_wasserstein_contraction(model, start, target, [t], 2.0, stream.spawn(2), cfg)
        return report(
            "evi_monte_carlo",
            contraction.residual,
            contraction.tolerance,
            contraction.statistical_error,
            parameters={**contraction.parameters, "k": model.k, "regime": model.regime},
            label="contraction-only",
        )

    if n < 2 * batches:
        raise ConfigError(f"Need at least {2 * batches} paths for {batches} batches, got {n}")
    settings = cfg or SdeConfig.from_config()
    evolved = evolve_paths(model, start, t, settings, stream.spawn(2))[:, 0]
    target = nu.gaussian()
    residuals = []
    for batch in np.array_split(evolved, batches):
        fitted = GaussianLaw(float(np.mean(batch)), float(np.var(batch, ddof=1)))
        residuals.append(evi_residual(fitted, target, curvature, settings.speed))
    exact = evi_residual(ou_evolve(sigma0.gaussian(), t, settings.speed), target, curvature, settings.speed)
    return report(
        "evi_monte_carlo",
        float(np.mean(residuals)),
        _tolerance("harness.bias_floor", MONTE_CARLO_BIAS_FLOOR),
        float(np.std(residuals, ddof=1) / math.sqrt(batches)),
        parameters={"k": 1, "t": t, "n": n, "K": curvature, "closed_form_residual": exact},
        label="gaussian-fit",
    )


# ----------------------------------------------------------------------
# Wasserstein contraction
# ----------------------------------------------------------------------


def _states(value: Union[EmpiricalLaw, np.ndarray], k: int) -> np.ndarray:
    if isinstance(value, EmpiricalLaw):
        return np.array([m.points[::-1] for m in value])
    states = np.asarray(value, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if states.ndim != 2 or states.shape[1] != k:
        raise ValidationError(f"Ensemble members must hold k={k} points")
    return states


def check_wasserstein_contraction(
    model: ModelSpec,
    a: Union[EmpiricalLaw, np.ndarray],
    b: Union[EmpiricalLaw, np.ndarray],
    t_grid: Sequence[float],
    p: float = 2.0,
    rng: RngLike = None,
    cfg: Optional[SdeConfig] = None,
) -> CheckReport:
    """W_p(A, B) - W_p(T_t A, T_t B), minimum over the time grid.

    Members are paired along an optimal plan and each pair is driven by
    identical noise; W_p of the evolved ensembles is recomputed from
    scratch at every grid time. The coupled cost is tracked alongside as
    the pathwise certificate.
    """
    left, right = _states(a, model.k), _states(b, model.k)
    if left.shape[0] != right.shape[0]:
        raise SizeMismatch(f"Ensembles have different sizes: {left.shape[0]} vs {right.shape[0]}")
    law_a, law_b = EmpiricalLaw.from_array(left), EmpiricalLaw.from_array(right)
    plan = optimal_plan(law_a, law_b, p, lexicographic=False)
    initial = plan.cost
    states = np.stack([left, right[plan.assignment]], axis=1)

    stream = as_stream(rng)
    times = sorted(float(t) for t in t_grid)
    if not times or times[0] < 0:
        raise ConfigError("Contraction check needs a nonempty grid of nonnegative times")
    residuals, coupled, errors = [], [], []
    clock = 0.0
    for index, t in enumerate(times):
        if t > clock:
            states = evolve_paths(model, states, t - clock, cfg, stream.spawn(index))
            clock = t
        distance = np.sqrt(np.sum((states[:, 0, :] - states[:, 1, :]) ** 2, axis=-1))
        current = float(wasserstein(EmpiricalLaw.from_array(states[:, 0]), EmpiricalLaw.from_array(states[:, 1]), p))
        coupled_cost = float(np.mean(distance**p)) ** (1.0 / p)
        residuals.append(initial - current)
        coupled.append(coupled_cost)
        if coupled_cost > 0 and len(distance) > 1:
            errors.append(float(np.std(distance**p, ddof=1)) / (math.sqrt(len(distance)) * p * coupled_cost ** (p - 1.0)))
        else:
            errors.append(0.0)

    worst = int(np.argmin(residuals))
    tolerance = CONTRACTION_SLACK_PER_DT * times[-1] + 1e-12
    return report(
        "wasserstein_contraction",
        residuals[worst],
        tolerance,
        errors[worst],
        parameters={
            "k": model.k,
            "regime": model.regime,
            "p": p,
            "n": int(left.shape[0]),
            "t_grid": times,
            "initial": initial,
            "coupled_cost": coupled,
            "pathwise_increase": max(0.0, max(coupled) - initial),
        },
    )


def pathwise_contraction_violations(distances: np.ndarray, dt: float) -> int:
    """Number of base steps where a coupled distance grows by more than 1e-6·dt."""
    increments = np.diff(np.asarray(distances, dtype=float), axis=0)
    return int(np.sum(increments > CONTRACTION_SLACK_PER_DT * dt))


# ----------------------------------------------------------------------
# Harnack inequalities
# ----------------------------------------------------------------------


def _positive(u: TestFunction) -> TestFunction:
    if not u.positive:
        raise ValidationError(f"Harnack checks need a positive test function, '{u.name}' is not")
    return u


def _check_time(t: float) -> float:
    if not t > 0:
        raise ValidationError(f"Harnack checks need t > 0, got {t}")
    return float(t)


def check_log_harnack(
    u: Union[str, TestFunction], x: float, y: float, t: float, order: Optional[int] = None
) -> CheckReport:
    """T_t log u(x) ≤ log T_t u(y) + (x - y)²/(4t)."""
    f = _positive(test_function(u))
    t = _check_time(t)
    lhs = float(ou_expectation(lambda z: np.log(f.value(z)), x, t, order)[0])
    rhs = math.log(float(ou_expectation(f.value, y, t, order)[0])) + (x - y) ** 2 / (4.0 * t)
    return report(
        "log_harnack",
        rhs - lhs,
        QUADRATURE_TOLERANCE,
        parameters={"u": f.name, "x": x, "y": y, "t": t, "lhs": lhs, "rhs": rhs},
    )


def check_dimension_free_harnack(
    u: Union[str, TestFunction], x: float, y: float, t: float, alpha: float, order: Optional[int] = None
) -> CheckReport:
    """(T_t u)^α(x) ≤ T_t(u^α)(y)·exp(α (x - y)²/(4(α - 1)t))."""
    if not alpha > 1:
        raise ValidationError(f"Harnack exponent must exceed 1, got {alpha}")
    f = _positive(test_function(u))
    t = _check_time(t)
    lhs = float(ou_expectation(f.value, x, t, order)[0]) ** alpha
    moment = float(ou_expectation(lambda z: f.value(z) ** alpha, y, t, order)[0])
    rhs = moment * math.exp(alpha * (x - y) ** 2 / (4.0 * (alpha - 1.0) * t))
    return report(
        "dimension_free_harnack",
        rhs - lhs,
        QUADRATURE_TOLERANCE,
        parameters={"u": f.name, "x": x, "y": y, "t": t, "alpha": alpha, "lhs": lhs, "rhs": rhs},
    )


# ----------------------------------------------------------------------
# Bakry-Émery gradient estimate
# ----------------------------------------------------------------------


def _bakry_emery_quadrature(f: TestFunction, t: float, p: float, points: np.ndarray, order: Optional[int]) -> np.ndarray:
    # ∇T_t u(x) = e^(-t) T_t u'(x) for the Full-speed k=1 flow.
    lhs = np.abs(math.exp(-t) * ou_expectation(f.gradient, points, t, order)) ** p
    rhs = ou_expectation(lambda z: np.abs(f.gradient(z)) ** p, points, t, order)
    return rhs - lhs


def _bakry_emery_coupled(
    f: TestFunction, model: ModelSpec, t: float, p: float, n: int, rng: RngLike, cfg: Optional[SdeConfig]
) -> Tuple[float, float]:
    """RHS - LHS for the linear statistic U(x) = Σ f(x_i) at the spread state.

    ∇T_t U is estimated by forward differences along k+1 synchronously
    coupled copies started at x and x + h e_i.
    """
    k = model.k
    base = model.spread_state()
    copies = np.repeat(base[None, :], k + 1, axis=0)
    copies[1:] += _COUPLING_OFFSET * np.eye(k)
    states = np.repeat(copies[None, :, :], n, axis=0)
    terminal = evolve_paths(model, states, t, cfg, rng)

    values = np.sum(f.value(terminal), axis=-1)
    quotients = (values[:, 1:] - values[:, :1]) / _COUPLING_OFFSET
    gradient = quotients.mean(axis=0)
    gradient_se = quotients.std(axis=0, ddof=1) / math.sqrt(n)
    norm = float(np.linalg.norm(gradient))
    lhs = norm**p

    rhs_samples = np.linalg.norm(f.gradient(terminal[:, 0, :]), axis=-1) ** p
    rhs = float(rhs_samples.mean())
    rhs_se = float(rhs_samples.std(ddof=1) / math.sqrt(n))
    lhs_se = p * norm ** (p - 1.0) * float(np.linalg.norm(gradient_se)) if norm > 0 else float(np.linalg.norm(gradient_se))
    return rhs - lhs, math.hypot(rhs_se, lhs_se)


def check_bakry_emery(
    u: Union[str, TestFunction],
    t: float,
    p: float,
    k: int = 1,
    n: int = 200,
    rng: RngLike = None,
    cfg: Optional[SdeConfig] = None,
    points: Optional[Sequence[float]] = None,
    order: Optional[int] = None,
) -> CheckReport:
    """|∇T_t u|^p ≤ T_t(|∇u|^p) with K = 0.

    k=1 by quadrature at a grid of test points; 2 ≤ k ≤ 4 by coupled Monte
    Carlo on the linear statistic Σ u(x_i) of the bulk model.
    """
    f = test_function(u)
    if p < 1:
        raise ValidationError(f"Bakry-Émery exponent must be >= 1, got {p}")
    if t < 0:
        raise ValidationError(f"Time must be nonnegative, got {t}")
    if k == 1:
        grid = np.linspace(-2.0, 2.0, 9) if points is None else np.asarray(points, dtype=float)
        residuals = _bakry_emery_quadrature(f, t, p, grid, order)
        worst = int(np.argmin(residuals))
        return report(
            "bakry_emery",
            float(residuals[worst]),
            QUADRATURE_TOLERANCE,
            parameters={"u": f.name, "t": t, "p": p, "k": 1, "x_worst": float(grid[worst])},
        )
    if not 2 <= k <= 4:
        raise ConfigError(f"Coupled Bakry-Émery check supports 2 <= k <= 4, got {k}")
    residual, error = _bakry_emery_coupled(f, ModelSpec.bulk(k), t, p, n, rng, cfg)
    return report(
        "bakry_emery",
        residual,
        10.0 * _COUPLING_OFFSET,
        error,
        parameters={"u": f.name, "t": t, "p": p, "k": k, "n": n},
        label="coupled-monte-carlo",
    )


# ----------------------------------------------------------------------
# HWI, Brunn-Minkowski, energy and slope
# ----------------------------------------------------------------------


def hwi_residual(nu0: GaussianLaw, nu1: GaussianLaw, curvature: float = 0.0) -> float:
    distance = gaussian_w2(nu0, nu1)
    rhs = gaussian_entropy(nu1) + distance * math.sqrt(gaussian_fisher(nu0)) - 0.5 * curvature * distance**2
    return rhs - gaussian_entropy(nu0)


def check_hwi_gaussian(nu0: GaussianLaw, nu1: GaussianLaw, curvature: float = 0.0) -> CheckReport:
    """H(ν0) ≤ H(ν1) + W2·sqrt(F_def(ν0)) - (K/2) W2².

    With the quarter normalization F = F_def/4 the middle term reads 2 W2 F^(1/2).
    """
    return report(
        "hwi_gaussian",
        hwi_residual(nu0, nu1, curvature),
        _tolerance("harness.closed_form_tolerance", CLOSED_FORM_TOLERANCE),
        parameters={
            "nu0": [nu0.mean, nu0.variance],
            "nu1": [nu1.mean, nu1.variance],
            "K": curvature,
            "fisher_quarter": gaussian_fisher_quarter(nu0),
        },
    )


def gaussian_mass(interval: Tuple[float, float]) -> float:
    """N(0, 1) mass of [a, b], computed on the side of the smaller tail."""
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise EmptySet(f"Interval [{a}, {b}] is empty")
    if a > 0:
        mass = float(ndtr(-a) - ndtr(-b))
    else:
        mass = float(ndtr(b) - ndtr(a))
    if not mass > 0:
        raise EmptySet(f"Interval [{a}, {b}] has no Gaussian mass")
    return mass


def check_brunn_minkowski(a0: Tuple[float, float], a1: Tuple[float, float], t: float) -> CheckReport:
    """-log μ(A_t) ≤ (1-t)(-log μ(A0)) + t(-log μ(A1)) for A_t = (1-t)A0 + tA1."""
    if not 0 <= t <= 1:
        raise ValidationError(f"Interpolation parameter must lie in [0, 1], got {t}")
    mass0, mass1 = gaussian_mass(a0), gaussian_mass(a1)
    at = ((1.0 - t) * a0[0] + t * a1[0], (1.0 - t) * a0[1] + t * a1[1])
    mass_t = gaussian_mass(at)
    residual = (1.0 - t) * -math.log(mass0) + t * -math.log(mass1) + math.log(mass_t)
    return report(
        "brunn_minkowski",
        residual,
        _tolerance("harness.closed_form_tolerance", CLOSED_FORM_TOLERANCE),
        parameters={"A0": list(a0), "A1": list(a1), "t": t, "At": list(at)},
    )


def check_energy_identity(g0: GaussianLaw, t_end: float = 2.0, n_steps: int = 200, speed: str = FULL) -> CheckReport:
    return report(
        "energy_identity",
        -energy_identity_residual(g0, t_end, n_steps, speed),
        1e-10,
        parameters={"g0": [g0.mean, g0.variance], "T": t_end, "n_steps": n_steps, "speed": speed},
    )


def check_metric_slope(g: GaussianLaw) -> CheckReport:
    """|slope - sqrt(F_def)|, with the direction-sampled slope reported alongside."""
    slope = metric_slope(g)
    root_fisher = math.sqrt(gaussian_fisher(g))
    return report(
        "metric_slope",
        -abs(slope - root_fisher),
        1e-10,
        parameters={"g": [g.mean, g.variance], "slope": slope, "numerical_slope": numerical_slope(g)},
    )


def random_gaussians(rng: RngLike, n: int, mean_range: float = 2.0, log_var_range: float = 1.5) -> list:
    """n Gaussian laws with uniform means and log-uniform variances."""
    generator = as_generator(rng)
    means = generator.uniform(-mean_range, mean_range, n)
    variances = np.exp(generator.uniform(-log_var_range, log_var_range, n))
    return [GaussianLaw(float(m), float(v)) for m, v in zip(means, variances)]
