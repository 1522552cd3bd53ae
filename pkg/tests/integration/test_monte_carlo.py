"""
Monte Carlo integration tests: simulated ensembles against exact laws.

These draw thousands of samples and are deselected by default; run them
with ``pytest -m slow``.
"""

import math

import numpy as np
import pytest

from dysonlab.ensembles.dpp import KernelSpec, gap_probability, generating_function
from dysonlab.ensembles.dynamics import FULL, HALF, SdeConfig, evolve_paths
from dysonlab.ensembles.models import ModelSpec, energy
from dysonlab.ensembles.sampling import run_mcmc, sample_mu_k_ensemble, sample_window_counts
from dysonlab.flows.functionals import GaussianLaw, ou_evolve
from dysonlab.services.inequalities import EnsembleSpec, check_bakry_emery, check_evi_monte_carlo
from dysonlab.services.suites import MONTE_CARLO, SuiteSizes, run_suite
from dysonlab.utils.helpers import RngStream

pytestmark = pytest.mark.slow


def _standard_error(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) / math.sqrt(x.size)


def _evolve_gaussian(start: GaussianLaw, t: float, speed: str, n: int, seed: int) -> np.ndarray:
    stream = RngStream(seed)
    x0 = start.mean + start.std * stream.spawn(0).generator().standard_normal((n, 1))
    return evolve_paths(ModelSpec.bulk(1), x0, t, SdeConfig(dt=1e-3, speed=speed), stream.spawn(1))[:, 0]


class TestWindows:
    def test_sine_gap_frequency_matches_fredholm(self):
        counts = sample_window_counts("sine", 200, 0.5, 4000, RngStream(21))
        frequency = float(np.mean(counts == 0))
        exact = gap_probability(KernelSpec.sine(), -0.5, 0.5).value
        error = math.sqrt(exact * (1 - exact) / counts.size)
        assert abs(frequency - exact) < 4 * error + 0.01

    def test_sine_generating_function_matches_fredholm(self):
        counts = sample_window_counts("sine", 400, 1.0, 10_000, RngStream(23))
        values = math.sqrt(2.0) ** counts
        exact = generating_function(KernelSpec.sine(), 1.0, math.sqrt(2.0))
        assert abs(values.mean() - exact) < 3 * _standard_error(values) + 0.005

    def test_airy_gap_matches_tracy_widom(self):
        counts = sample_window_counts("airy", 200, (0.0, math.inf), 4000, RngStream(22))
        frequency = float(np.mean(counts == 0))
        error = math.sqrt(frequency * (1 - frequency) / counts.size)
        assert abs(frequency - 0.9694) < 4 * error + 0.02


class TestDynamics:
    def test_single_particle_law_is_the_exact_gaussian(self):
        start = GaussianLaw(2.0, 0.25)
        samples = _evolve_gaussian(start, 0.5, FULL, 4000, 31)
        exact = ou_evolve(start, 0.5)
        assert abs(samples.mean() - exact.mean) < 4 * _standard_error(samples)
        spread = math.sqrt(2.0 / (samples.size - 1)) * exact.variance
        assert abs(samples.var(ddof=1) - exact.variance) < 4 * spread

    def test_half_speed_at_double_time_matches_full_speed(self):
        start = GaussianLaw(-1.0, 2.0)
        half = _evolve_gaussian(start, 1.0, HALF, 4000, 32)
        full = _evolve_gaussian(start, 0.5, FULL, 4000, 33)
        error = math.hypot(_standard_error(half), _standard_error(full))
        assert abs(half.mean() - full.mean()) < 4 * error
        assert half.var(ddof=1) == pytest.approx(full.var(ddof=1), rel=0.1)


class TestSamplingCrossCheck:
    def test_exact_and_mcmc_energies_agree(self):
        model = ModelSpec.bulk(4)
        exact = energy(model, sample_mu_k_ensemble(model, 2000, RngStream(41), "exact"))
        chains = run_mcmc(model, rng=RngStream(42), chains=2000)
        mcmc = energy(model, chains.states)
        error = math.hypot(_standard_error(exact), _standard_error(mcmc))
        assert abs(exact.mean() - mcmc.mean()) < 4 * error


class TestInequalities:
    def test_evi_from_fitted_gaussians(self):
        result = check_evi_monte_carlo(
            ModelSpec.bulk(1), EnsembleSpec(0.0, 2.0), EnsembleSpec(), 0.5, 2000, RngStream(51)
        )
        assert result.label == "gaussian-fit"
        assert result.passed

    @pytest.mark.parametrize("k", [2, 4])
    def test_coupled_bakry_emery(self, k):
        assert check_bakry_emery("tanh", 0.3, 2.0, k=k, n=200, rng=RngStream(60 + k)).passed


class TestSuite:
    def test_monte_carlo_suite_passes(self):
        sizes = SuiteSizes(paths=300, samples=1000, pairs=1000, pathwise_paths=10, pathwise_steps=500, window_k=200)
        results = run_suite(MONTE_CARLO, 2024, sizes)
        failures = [r.name for r in results if not r.passed]
        assert failures == []
        assert "sine_generating_function" in {r.name for r in results}
