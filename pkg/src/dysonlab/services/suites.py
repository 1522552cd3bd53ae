#
# This file is part of Dyson Lab.
#
# Dyson Lab is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# Dyson Lab is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with Dyson Lab.  If not, see <https://www.gnu.org/licenses/>.
#
"""
Verification suites.

The closed-form suite is deterministic: one-particle Gaussian calculus,
quadrature against the Ornstein-Uhlenbeck kernel, Fredholm determinants
and the quantile JKO solver. The Monte Carlo suite simulates ensembles
and compares at the configured number of standard errors. Every check of
a suite owns the random stream RngStream(seed, index), so checks can run
in parallel and a suite is reproducible from its seed alone.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from dysonlab.core.constants import LIPSCHITZ_SLACK, SHELL_COST_BOUND
from dysonlab.core.exceptions import CheckFailure, ConfigError
from dysonlab.ensembles import models
from dysonlab.ensembles.dpp import KernelSpec, afd_condition, discretize, fredholm_det, gap_probability, generating_function
from dysonlab.ensembles.dynamics import HALF, FULL, SdeConfig, evolve_coupled_batch
from dysonlab.ensembles.models import ModelSpec
from dysonlab.ensembles.sampling import run_mcmc, sample_mu_k_ensemble, sample_sine_window, sample_window_counts
from dysonlab.flows.functionals import STANDARD, GaussianLaw, ou_evolve
from dysonlab.flows.jko import jko_step, jko_trajectory, quantile_of_gaussian, w2_q
from dysonlab.space.extension import FAMILIES, lipschitz_ladder
from dysonlab.utils.helpers import RngStream, parallel_map

from .inequalities import (
    GRADIENT_FUNCTIONS,
    HARNACK_FUNCTIONS,
    EnsembleSpec,
    check_bakry_emery,
    check_brunn_minkowski,
    check_dimension_free_harnack,
    check_energy_identity,
    check_evi_gaussian,
    check_evi_half_speed_control,
    check_evi_monte_carlo,
    check_hwi_gaussian,
    check_log_harnack,
    check_metric_slope,
    check_wasserstein_contraction,
    evi_residual,
    pathwise_contraction_violations,
    random_gaussians,
)
from .reports import CheckReport, publish, report, sweep
from .rigidity import count_variance_profile, sample_windows, shell, shell_occupancy_stats, shell_transport

logger = logging.getLogger(__name__)

CLOSED_FORM = "closed-form"
MONTE_CARLO = "monte-carlo"
ALL = "all"
SUITES = (CLOSED_FORM, MONTE_CARLO, ALL)

Check = Callable[[RngStream], CheckReport]


@dataclass(frozen=True)
class SuiteSizes:
    """Sample sizes of the Monte Carlo suite."""

    paths: int = 1000
    samples: int = 10_000
    pairs: int = 10_000
    pathwise_paths: int = 100
    pathwise_steps: int = 10_000
    window_k: int = 400


# ----------------------------------------------------------------------
# Closed-form checks
# ----------------------------------------------------------------------


def _evi_sweep(stream: RngStream) -> CheckReport:
    starts = [GaussianLaw(m, v) for m in np.linspace(-2.0, 2.0, 5) for v in (0.25, 0.5, 1.0, 2.0)]
    targets = [GaussianLaw(m, v) for m in np.linspace(-1.0, 1.0, 5) for v in (0.5, 1.0, 2.0, 4.0)]
    grid = np.linspace(0.0, 2.0, 21)
    results = [check_evi_gaussian(s, n, grid) for s in starts for n in targets]
    return sweep("evi_gaussian_sweep", results, {"t_max": 2.0})


def _evi_equality(stream: RngStream) -> CheckReport:
    sigma0, nu = GaussianLaw(1.0, 1.0), STANDARD
    residuals = [evi_residual(ou_evolve(sigma0, float(t)), nu, 1.0) for t in np.linspace(0.0, 2.0, 21)]
    return report("evi_equality_case", -max(abs(r) for r in residuals), 1e-10, parameters={"K": 1.0})


def _evi_control(stream: RngStream) -> CheckReport:
    return check_evi_half_speed_control()


def _hwi_sweep(stream: RngStream) -> CheckReport:
    laws = random_gaussians(stream.generator(), 2000)
    results = [check_hwi_gaussian(a, b) for a, b in zip(laws[::2], laws[1::2])]
    return sweep("hwi_gaussian_sweep", results)


def _brunn_minkowski_sweep(stream: RngStream) -> CheckReport:
    intervals = [(-1.0, 0.0), (0.0, 1.0), (2.0, 3.0), (-3.0, -2.5), (0.5, 4.0), (-0.1, 0.1)]
    results = [
        check_brunn_minkowski(a, b, float(t))
        for a, b in itertools.product(intervals, repeat=2)
        for t in np.linspace(0.0, 1.0, 11)
    ]
    return sweep("brunn_minkowski_sweep", results)


def _energy_sweep(stream: RngStream) -> CheckReport:
    laws = random_gaussians(stream.generator(), 20)
    results = [check_energy_identity(g, speed=speed) for g in laws for speed in (FULL, HALF)]
    return sweep("energy_identity_sweep", results)


def _slope_sweep(stream: RngStream) -> CheckReport:
    laws = random_gaussians(stream.generator(), 20) + [STANDARD, GaussianLaw(2.0, 1.0)]
    return sweep("metric_slope_sweep", [check_metric_slope(g) for g in laws])


_HARNACK_POINTS = ((0.0, 0.0), (0.0, 1.0), (-1.0, 1.5), (2.0, -0.5))
_HARNACK_TIMES = (0.1, 0.5, 1.0)


def _log_harnack_sweep(stream: RngStream) -> CheckReport:
    results = [
        check_log_harnack(u, x, y, t)
        for u in HARNACK_FUNCTIONS
        for x, y in _HARNACK_POINTS
        for t in _HARNACK_TIMES
    ]
    return sweep("log_harnack_sweep", results)


def _dimension_free_harnack_sweep(stream: RngStream) -> CheckReport:
    results = [
        check_dimension_free_harnack(u, x, y, t, alpha)
        for u in HARNACK_FUNCTIONS
        for x, y in _HARNACK_POINTS
        for t in _HARNACK_TIMES
        for alpha in (1.5, 2.0)
    ]
    return sweep("dimension_free_harnack_sweep", results)


def _bakry_emery_sweep(stream: RngStream) -> CheckReport:
    results = [
        check_bakry_emery(u, t, p)
        for u in GRADIENT_FUNCTIONS
        for t in (0.1, 0.3, 1.0)
        for p in (1.0, 2.0)
    ]
    return sweep("bakry_emery_quadrature_sweep", results)


def _fredholm_normalization(stream: RngStream) -> CheckReport:
    values = [generating_function(KernelSpec.sine(), r, 1.0) for r in (0.5, 1.0, 2.0)]
    return report("fredholm_normalization", -max(abs(v - 1.0) for v in values), 0.0)


def _fredholm_first_moment(stream: RngStream) -> CheckReport:
    h = 1e-4
    errors = []
    for r in (0.5, 1.0, 2.0):
        op = discretize(KernelSpec.sine(), -r, r)
        derivative = (fredholm_det(op, h) - fredholm_det(op, -h)) / (2.0 * h)
        errors.append(abs(derivative - 2.0 * r))
    return report("fredholm_first_moment", -max(errors), 1e-6, parameters={"radii": [0.5, 1.0, 2.0]})


def _fredholm_afd(stream: RngStream) -> CheckReport:
    try:
        condition = afd_condition(KernelSpec.sine(), 1.0)
    except CheckFailure as e:
        return report("fredholm_afd_bound", -1.0, 0.0, parameters={"error": str(e)})
    return report(
        "fredholm_afd_bound",
        condition.bound - condition.series_value,
        0.0,
        parameters={"series": condition.series_value, "bound": condition.bound, "trace": condition.trace},
    )


def _fredholm_node_doubling(stream: RngStream) -> CheckReport:
    deviations = []
    for spec, (a, b) in ((KernelSpec.sine(), (-1.0, 1.0)), (KernelSpec.airy(), (-2.0, math.inf))):
        coarse = gap_probability(spec, a, b, 80).value
        fine = gap_probability(spec, a, b, 160).value
        deviations.append(abs(coarse - fine))
    return report("fredholm_node_doubling", -max(deviations), 1e-8)


def _shell_bound(stream: RngStream) -> CheckReport:
    try:
        rows = shell_occupancy_stats("sine", 20)
    except CheckFailure as e:
        return report("shell_occupancy_bound", -1.0, 1e-9, parameters={"error": str(e)})
    return report(
        "shell_occupancy_bound",
        min(row.probability - row.bound for row in rows),
        1e-9,
        parameters={"shells": len(rows), "partial_sum": rows[-1].partial_sum},
    )


def _jko_single_step(stream: RngStream) -> CheckReport:
    q = jko_step(quantile_of_gaussian(GaussianLaw(1.0, 1.0), 512), 0.1)
    return report("jko_single_step", -abs(q.mean - 1.0 / 1.1), 1e-4, parameters={"mean": q.mean})


def jko_error(tau: float, horizon: float = 1.0, grid: int = 512, start: GaussianLaw = GaussianLaw(1.0, 1.0)) -> float:
    """max over the trajectory of W2 between the JKO iterate and the exact flow."""
    trajectory = jko_trajectory(quantile_of_gaussian(start, grid), tau, horizon)
    return max(
        w2_q(q, quantile_of_gaussian(ou_evolve(start, n * tau), grid)) for n, q in enumerate(trajectory)
    )


def _jko_order(stream: RngStream) -> CheckReport:
    coarse, fine = jko_error(0.1), jko_error(0.05)
    ratio = coarse / fine
    return report(
        "jko_first_order",
        min(ratio - 1.6, 2.4 - ratio),
        0.0,
        parameters={"error_0.1": coarse, "error_0.05": fine, "ratio": ratio},
    )


CLOSED_FORM_CHECKS: Tuple[Check, ...] = (
    _evi_sweep,
    _evi_equality,
    _evi_control,
    _hwi_sweep,
    _brunn_minkowski_sweep,
    _energy_sweep,
    _slope_sweep,
    _log_harnack_sweep,
    _dimension_free_harnack_sweep,
    _bakry_emery_sweep,
    _fredholm_normalization,
    _fredholm_first_moment,
    _fredholm_afd,
    _fredholm_node_doubling,
    _shell_bound,
    _jko_single_step,
    _jko_order,
)


# ----------------------------------------------------------------------
# Monte Carlo checks
# ----------------------------------------------------------------------


def _contraction(k: int, p: float, sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        model = ModelSpec.bulk(k)
        a = EnsembleSpec(0.0, 1.0).sample(model, sizes.paths, stream.spawn(0))
        b = EnsembleSpec(0.5, 1.2).sample(model, sizes.paths, stream.spawn(1))
        return check_wasserstein_contraction(model, a, b, (0.1, 0.5, 1.0), p, stream.spawn(2))

    return check


def _evi_monte_carlo(k: int, sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        return check_evi_monte_carlo(
            ModelSpec.bulk(k), EnsembleSpec(0.0, 2.0), EnsembleSpec(), 0.5, sizes.paths, stream
        )

    return check


def _pathwise(k: int, sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        model = ModelSpec.bulk(k)
        cfg = SdeConfig.from_config()
        x0 = sample_mu_k_ensemble(model, sizes.pathwise_paths, stream.spawn(0), "exact")
        y0 = sample_mu_k_ensemble(model, sizes.pathwise_paths, stream.spawn(1), "exact")
        batch = evolve_coupled_batch(model, x0, y0, sizes.pathwise_steps * cfg.dt, cfg, stream.spawn(2))
        violations = pathwise_contraction_violations(batch.distances, cfg.dt)
        return report(
            "pathwise_contraction",
            -float(violations),
            0.0,
            parameters={"k": k, "paths": sizes.pathwise_paths, "steps": sizes.pathwise_steps},
        )

    return check


def _bakry_emery_coupled(stream: RngStream) -> CheckReport:
    results = [
        check_bakry_emery(u, 0.3, p, k=k, n=200, rng=stream.spawn(i))
        for i, (u, p, k) in enumerate(itertools.product(("sine", "tanh"), (1.0, 2.0), (2, 4)))
    ]
    return sweep("bakry_emery_coupled_sweep", results)


def _two_sample(name: str, x: np.ndarray, y: np.ndarray, parameters: Dict) -> CheckReport:
    error = math.hypot(float(np.std(x, ddof=1)) / math.sqrt(x.size), float(np.std(y, ddof=1)) / math.sqrt(y.size))
    return report(name, -abs(float(np.mean(x)) - float(np.mean(y))), 0.0, error, parameters)


def _energy_cross_check(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        model = ModelSpec.bulk(4)
        exact = models.energy(model, sample_mu_k_ensemble(model, sizes.paths, stream.spawn(0), "exact"))
        chains = run_mcmc(model, rng=stream.spawn(1), chains=sizes.paths)
        mcmc = models.energy(model, chains.states)
        return _two_sample(
            "sampling_energy_cross_check",
            exact,
            mcmc,
            {"k": 4, "regime": "bulk", "acceptance": chains.mean_acceptance},
        )

    return check


def _sine_mean_count(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        counts = sample_window_counts("sine", sizes.window_k, 1.0, sizes.samples, stream)
        error = float(np.std(counts, ddof=1)) / math.sqrt(counts.size)
        return report("sine_mean_count", -abs(float(np.mean(counts)) - 2.0), 0.0, error, {"r": 1.0})

    return check


def _sine_generating_function(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        counts = sample_window_counts("sine", sizes.window_k, 1.0, sizes.samples, stream)
        values = math.sqrt(2.0) ** counts
        mean = float(np.mean(values))
        error = float(np.std(values, ddof=1)) / math.sqrt(values.size)
        exact = generating_function(KernelSpec.sine(), 1.0, math.sqrt(2.0))
        return report(
            "sine_generating_function",
            -abs(mean - exact),
            0.0,
            error,
            {"r": 1.0, "t": math.sqrt(2.0), "empirical": mean, "fredholm": exact},
        )

    return check


def _airy_gap(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        counts = sample_window_counts("airy", sizes.window_k, (0.0, math.inf), sizes.samples, stream)
        frequency = float(np.mean(counts == 0))
        exact = gap_probability(KernelSpec.airy(), 0.0, math.inf).value
        error = math.sqrt(max(frequency * (1.0 - frequency), 1e-12) / counts.size)
        return report(
            "airy_gap_frequency",
            -abs(frequency - exact),
            0.0,
            error,
            {"frequency": frequency, "fredholm": exact},
        )

    return check


def _shell_frequencies(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        rows = shell_occupancy_stats("sine", 5, sizes.samples, stream, sizes.window_k)
        results = [
            report(
                "shell_occupancy_frequency",
                -abs(row.frequency - row.probability),
                0.0,
                row.standard_error,
                {"shell": row.shell, "frequency": row.frequency, "probability": row.probability},
            )
            for row in rows
        ]
        return sweep("shell_occupancy_frequency", results)

    return check


def _shell_transport_cost(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        generator = stream.generator()
        window = (shell(20)[0], 0.0)
        worst = 0.0
        for _ in range(sizes.paths):
            try:
                _, cost = shell_transport(sample_sine_window(sizes.window_k, window, generator), 20)
            except CheckFailure:
                return report("shell_transport_cost", -1.0, 0.0, parameters={"error": "cost bound exceeded"})
            worst = max(worst, cost**2)
        return report("shell_transport_cost", SHELL_COST_BOUND - worst, 0.0, parameters={"max_cost_squared": worst})

    return check


def _count_variance(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        samples = sample_windows("sine", sizes.samples, 2.0, stream, sizes.window_k)
        results = []
        for row in count_variance_profile(samples, (0.5, 1.0, 2.0)):
            results.append(
                report(
                    "count_variance",
                    -abs(row.variance - row.predicted_variance),
                    0.0,
                    row.variance_error,
                    row.to_dict(),
                )
            )
            results.append(
                report(
                    "count_sub_poissonian",
                    row.mean - row.variance,
                    0.0,
                    math.hypot(row.mean_error, row.variance_error),
                    row.to_dict(),
                )
            )
        return sweep("count_variance_profile", results)

    return check


def _extension_ladder(sizes: SuiteSizes) -> Check:
    def check(stream: RngStream) -> CheckReport:
        cases = list(itertools.product(sorted(FAMILIES), (1, 2, 3)))

        def ladder(case: Tuple[int, Tuple[str, int]]) -> list:
            index, (family, k) = case
            return lipschitz_ladder(family, k, 3, sizes.pairs, stream.spawn(index).generator())

        rows = [row for rows in parallel_map(ladder, list(enumerate(cases))) for row in rows]
        results = [
            report(
                "extension_ladder",
                row.bound - row.estimate,
                LIPSCHITZ_SLACK,
                parameters={"family": row.family, "k": row.k, "level": row.level, "estimate": row.estimate},
            )
            for row in rows
        ]
        return sweep("extension_ladder", results, {"pairs": sizes.pairs})

    return check


def monte_carlo_checks(sizes: SuiteSizes = SuiteSizes()) -> Tuple[Check, ...]:
    contraction = tuple(_contraction(k, p, sizes) for k in (1, 4, 8) for p in (1.0, 2.0))
    return contraction + (
        _evi_monte_carlo(1, sizes),
        _evi_monte_carlo(4, sizes),
        *(_pathwise(k, sizes) for k in (2, 4, 8)),
        _bakry_emery_coupled,
        _energy_cross_check(sizes),
        _sine_mean_count(sizes),
        _sine_generating_function(sizes),
        _airy_gap(sizes),
        _shell_frequencies(sizes),
        _shell_transport_cost(sizes),
        _count_variance(sizes),
        _extension_ladder(sizes),
    )


# ----------------------------------------------------------------------
# Runner
# ----------------------------------------------------------------------


def _run(checks: Sequence[Check], seed: int, offset: int) -> List[CheckReport]:
    root = RngStream(seed)
    tasks = [(offset + i, check) for i, check in enumerate(checks)]
    results = parallel_map(lambda task: task[1](root.spawn(task[0])), tasks)
    return [publish(r) for r in results]


def run_suite(name: str, seed: int, sizes: SuiteSizes = SuiteSizes()) -> List[CheckReport]:
    """Run a named suite; check i of the Monte Carlo suite uses stream 1000 + i."""
    if name not in SUITES:
        raise ConfigError(f"Unknown suite '{name}' (expected one of {', '.join(SUITES)})")
    logger.info(f"🔍 Running {name} suite with seed {seed}")
    results: List[CheckReport] = []
    if name in (CLOSED_FORM, ALL):
        results += _run(CLOSED_FORM_CHECKS, seed, 0)
    if name in (MONTE_CARLO, ALL):
        results += _run(monte_carlo_checks(sizes), seed, 1000)
    failed = sum(not r.passed for r in results)
    logger.info(f"📊 {name}: {len(results) - failed}/{len(results)} checks passed")
    return results
