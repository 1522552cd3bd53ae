"""
Tests for the quantile JKO scheme.
"""

import math

import numpy as np
import pytest

from dysonlab.core.exceptions import ConfigError, NonFiniteInput, NonMonotone, ValidationError
from dysonlab.flows.functionals import STANDARD, GaussianLaw, gaussian_entropy, ou_evolve
from dysonlab.flows.jko import (
    QuantileFunction,
    entropy_q,
    jko_step,
    jko_trajectory,
    midpoint_grid,
    objective,
    quantile_of_gaussian,
    w2_q,
)


class TestQuantileFunction:
    def test_validation(self):
        with pytest.raises(NonMonotone):
            QuantileFunction([0.0, 0.0, 1.0])
        with pytest.raises(NonFiniteInput):
            QuantileFunction([0.0, math.nan])
        with pytest.raises(ValidationError):
            QuantileFunction([1.0])

    def test_values_are_read_only(self):
        q = QuantileFunction([0.0, 1.0, 3.0])
        with pytest.raises(ValueError):
            q.values[0] = -1.0
        assert len(q) == 3
        assert q.grid.tolist() == pytest.approx([1 / 6, 1 / 2, 5 / 6])

    def test_gaussian_quantiles(self):
        q = quantile_of_gaussian(GaussianLaw(0.7, 4.0), 64)
        assert q.size == 64
        assert q.mean == pytest.approx(0.7, abs=1e-12)
        assert midpoint_grid(4).tolist() == [0.125, 0.375, 0.625, 0.875]

    def test_grid_size_from_configuration(self, testing_config):
        testing_config.set("jko.grid", 32)
        assert quantile_of_gaussian(STANDARD).size == 32
        with pytest.raises(ConfigError):
            quantile_of_gaussian(STANDARD, 8)


class TestQuantileFunctionals:
    def test_standard_normal_has_zero_entropy(self):
        assert entropy_q(quantile_of_gaussian(STANDARD, 256)) == pytest.approx(0.0, abs=1e-10)

    def test_mean_shift_entropy_is_exact(self):
        q = quantile_of_gaussian(GaussianLaw(1.5, 1.0), 256)
        assert entropy_q(q) == pytest.approx(1.125, abs=1e-10)

    @pytest.mark.parametrize("m", [16, 64, 512])
    def test_gaussian_entropy_is_exact_on_any_grid(self, m):
        for g in (GaussianLaw(0.0, 2.25), GaussianLaw(-0.4, 0.3)):
            assert entropy_q(quantile_of_gaussian(g, m)) == pytest.approx(gaussian_entropy(g), abs=1e-10)

    def test_grid_error_is_second_order(self):
        # T(z) = z + z·e^(-z²)/2, a smooth non-Gaussian transport of N(0, 1).
        def transport(z):
            return z + 0.5 * z * np.exp(-(z**2))

        nodes, weights = np.polynomial.hermite_e.hermegauss(120)
        weights = weights / math.sqrt(2.0 * math.pi)
        slope = 1.0 + 0.5 * (1.0 - 2.0 * nodes**2) * np.exp(-(nodes**2))
        bump = transport(nodes) - nodes
        exact = float(np.dot(weights, slope - 1.0 - np.log(slope) + bump**2 / 2.0))

        errors = [
            abs(entropy_q(QuantileFunction(transport(quantile_of_gaussian(STANDARD, m).values))) - exact)
            for m in (128, 256)
        ]
        assert errors[1] < 1e-4
        assert 3.0 < errors[0] / errors[1] < 5.0

    def test_w2_of_a_shift(self):
        q1 = quantile_of_gaussian(STANDARD, 128)
        q2 = quantile_of_gaussian(GaussianLaw(0.3, 1.0), 128)
        assert w2_q(q1, q2) == pytest.approx(0.3, abs=1e-12)
        with pytest.raises(ValidationError):
            w2_q(q1, quantile_of_gaussian(STANDARD, 64))

    def test_objective_requires_positive_step(self):
        q = quantile_of_gaussian(STANDARD, 32)
        assert objective(q, q, 0.1) == pytest.approx(0.0, abs=1e-10)
        with pytest.raises(ConfigError):
            objective(q, q, 0.0)


class TestJkoStep:
    def test_single_step_mean(self):
        previous = quantile_of_gaussian(GaussianLaw(1.0, 1.0), 512)
        q = jko_step(previous, 0.1)
        assert q.mean == pytest.approx(1.0 / 1.1, abs=1e-4)
        # a mean shift of the standard quantiles moves rigidly
        assert np.allclose(q.values - previous.values, 1.0 / 1.1 - 1.0, atol=1e-8)

    def test_equilibrium_is_a_fixed_point(self):
        q = quantile_of_gaussian(STANDARD, 128)
        assert np.allclose(jko_step(q, 0.5).values, q.values, atol=1e-10)

    def test_step_decreases_the_objective(self):
        previous = quantile_of_gaussian(GaussianLaw(-0.5, 3.0), 128)
        q = jko_step(previous, 0.2)
        assert objective(q, previous, 0.2) <= entropy_q(previous)
        assert np.all(np.diff(q.values) > 0)

    def test_invalid_step(self):
        with pytest.raises(ConfigError):
            jko_step(quantile_of_gaussian(STANDARD, 32), -1.0)


class TestJkoTrajectory:
    def test_length_and_monotone_entropy(self):
        trajectory = jko_trajectory(quantile_of_gaussian(GaussianLaw(0.5, 2.25), 128), 0.1, 0.5)
        assert len(trajectory) == 6
        entropies = [entropy_q(q) for q in trajectory]
        assert np.all(np.diff(entropies) <= 1e-12)

    def test_tracks_the_exact_flow(self):
        start = GaussianLaw(0.0, 2.25)
        trajectory = jko_trajectory(quantile_of_gaussian(start, 512), 0.01, 0.5)
        exact = quantile_of_gaussian(ou_evolve(start, 0.5), 512)
        assert w2_q(trajectory[-1], exact) < 0.02

    def test_step_larger_than_horizon(self):
        with pytest.raises(ConfigError):
            jko_trajectory(quantile_of_gaussian(STANDARD, 32), 1.0, 0.5)
