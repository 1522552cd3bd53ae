"""
Tests for the closed-form and coupled inequality checks.
"""

import math

import numpy as np
import pytest

from dysonlab.core.exceptions import ConfigError, EmptySet, SizeMismatch, ValidationError
from dysonlab.ensembles.models import ModelSpec
from dysonlab.flows.functionals import STANDARD, GaussianLaw, ou_evolve
from dysonlab.services.inequalities import (
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
    gaussian_mass,
    hwi_residual,
    ou_expectation,
    pathwise_contraction_violations,
    random_gaussians,
    test_function,
)
from dysonlab.utils.helpers import RngStream


class TestOuExpectation:
    def test_moments(self):
        x, t = np.array([0.0, 1.5]), 0.4
        assert ou_expectation(lambda z: z, x, t) == pytest.approx(x * math.exp(-t))
        second = ou_expectation(lambda z: z**2, x, t)
        assert second == pytest.approx(x**2 * math.exp(-2 * t) + 1 - math.exp(-2 * t))

    def test_zero_time(self):
        assert ou_expectation(np.cos, 0.3, 0.0) == pytest.approx([math.cos(0.3)])


class TestEvi:
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.7])
    def test_equality_with_unit_curvature(self, t):
        sigma = ou_evolve(GaussianLaw(1.0, 1.0), t)
        assert evi_residual(sigma, STANDARD, curvature=1.0) == pytest.approx(0.0, abs=1e-12)

    def test_gaussian_grid_passes(self):
        result = check_evi_gaussian(GaussianLaw(-1.0, 0.3), GaussianLaw(0.5, 2.0), np.linspace(0, 2, 11))
        assert result.passed
        assert result.parameters["K"] == 0.0

    def test_half_speed_violates_at_time_zero(self):
        result = check_evi_half_speed_control()
        assert result.passed
        assert result.label == "negative-control"
        half = result.parameters["half_speed_residual"]
        assert half == pytest.approx(0.75 - 0.5 * (3.0 - math.log(4.0)), abs=1e-12)
        assert half == pytest.approx(-0.0569, abs=1e-4)
        assert result.parameters["full_speed_residual"] > 0

    def test_monte_carlo_needs_enough_paths(self):
        with pytest.raises(ConfigError):
            check_evi_monte_carlo(ModelSpec.bulk(1), EnsembleSpec(), EnsembleSpec(), 0.1, 10, RngStream(1))

    def test_monte_carlo_beyond_one_particle_checks_contraction(self):
        result = check_evi_monte_carlo(
            ModelSpec.bulk(2), EnsembleSpec(0.0, 2.0), EnsembleSpec(), 0.05, 20, RngStream(2)
        )
        assert result.label == "contraction-only"
        assert result.parameters["k"] == 2

    def test_ensemble_spec(self):
        assert EnsembleSpec.from_gaussian(GaussianLaw(1.0, 4.0)) == EnsembleSpec(1.0, 2.0)
        assert EnsembleSpec(1.0, 2.0).gaussian() == GaussianLaw(1.0, 4.0)
        with pytest.raises(ConfigError):
            EnsembleSpec(0.0, 0.0)


class TestContraction:
    def test_single_particle_contracts(self):
        model = ModelSpec.bulk(1)
        a = RngStream(1).generator().normal(0.0, 1.0, 40)
        b = RngStream(2).generator().normal(0.5, 1.5, 40)
        result = check_wasserstein_contraction(model, a, b, (0.05, 0.1), 2.0, RngStream(3))
        assert result.residual >= 0.0
        assert result.passed
        assert result.parameters["pathwise_increase"] == 0.0

    def test_invalid_ensembles(self):
        model = ModelSpec.bulk(1)
        with pytest.raises(SizeMismatch):
            check_wasserstein_contraction(model, np.zeros(3), np.zeros(4), (0.1,))
        with pytest.raises(ConfigError):
            check_wasserstein_contraction(model, np.zeros(3), np.ones(3), ())
        with pytest.raises(ValidationError):
            check_wasserstein_contraction(ModelSpec.bulk(2), np.zeros((3, 3)), np.zeros((3, 3)), (0.1,))

    def test_pathwise_violations(self):
        distances = np.array([[1.0, 2.0], [1.0, 1.5], [1.1, 1.4]])
        assert pathwise_contraction_violations(distances, 0.01) == 1
        assert pathwise_contraction_violations(distances[:2], 0.01) == 0


class TestHarnack:
    @pytest.mark.parametrize("u", HARNACK_FUNCTIONS)
    def test_log_harnack(self, u):
        assert check_log_harnack(u, -1.0, 1.5, 0.5).passed

    def test_dimension_free_harnack(self):
        assert check_dimension_free_harnack("cauchy", 2.0, -0.5, 0.1, 1.5).passed

    def test_constant_function_is_tight(self):
        result = check_log_harnack("constant", 0.0, 0.0, 1.0)
        assert result.residual == pytest.approx(0.0, abs=1e-12)

    def test_invalid_arguments(self):
        with pytest.raises(ValidationError):
            check_log_harnack("sine", 0.0, 1.0, 0.5)
        with pytest.raises(ValidationError):
            check_log_harnack("gaussian_bump", 0.0, 1.0, 0.0)
        with pytest.raises(ValidationError):
            check_dimension_free_harnack("gaussian_bump", 0.0, 1.0, 0.5, 1.0)
        with pytest.raises(ConfigError):
            test_function("bump")


class TestBakryEmery:
    @pytest.mark.parametrize("u", ["sine", "tanh", "gaussian_bump", "linear"])
    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_quadrature_passes(self, u, p):
        assert check_bakry_emery(u, 0.3, p).passed

    def test_linear_function_residual(self):
        result = check_bakry_emery("linear", 0.5, 2.0, points=[0.0])
        assert result.residual == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)

    def test_invalid_arguments(self):
        with pytest.raises(ValidationError):
            check_bakry_emery("sine", 0.1, 0.5)
        with pytest.raises(ValidationError):
            check_bakry_emery("sine", -0.1, 2.0)
        with pytest.raises(ConfigError):
            check_bakry_emery("sine", 0.1, 2.0, k=5)


class TestGaussianInequalities:
    def test_hwi_equality_for_mean_shifts(self):
        assert hwi_residual(GaussianLaw(0.8, 1.0), STANDARD, 1.0) == pytest.approx(0.0, abs=1e-12)
        assert hwi_residual(GaussianLaw(0.8, 1.0), STANDARD, 0.0) == pytest.approx(0.32)

    def test_hwi_random_pairs(self, rng):
        laws = random_gaussians(rng, 40)
        assert len(laws) == 40
        assert all(check_hwi_gaussian(a, b).passed for a, b in zip(laws[::2], laws[1::2]))

    def test_brunn_minkowski(self):
        assert check_brunn_minkowski((-1.0, 0.0), (2.0, 3.0), 0.5).passed
        assert check_brunn_minkowski((0.0, 1.0), (0.0, 1.0), 0.3).residual == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(ValidationError):
            check_brunn_minkowski((0.0, 1.0), (1.0, 2.0), 1.5)

    def test_gaussian_mass(self):
        assert gaussian_mass((0.0, math.inf)) == pytest.approx(0.5)
        assert 0.0 < gaussian_mass((10.0, 11.0)) < 1e-20
        with pytest.raises(EmptySet):
            gaussian_mass((1.0, 1.0))

    def test_energy_and_slope_identities(self):
        assert check_energy_identity(GaussianLaw(1.0, 3.0)).passed
        assert check_energy_identity(GaussianLaw(-0.5, 0.4), speed="half").passed
        assert check_metric_slope(GaussianLaw(0.5, 2.0)).passed
