"""
Tests for the adaptive Dyson SDE integrator.
"""

import math

import numpy as np
import pytest

from dysonlab.core.exceptions import Collision, ConfigError, SubstepExhausted, ValidationError
from dysonlab.ensembles.dynamics import (
    FULL,
    HALF,
    CoupledTrace,
    SdeConfig,
    drift,
    evolve,
    evolve_coupled,
    evolve_coupled_batch,
    evolve_ensemble,
    evolve_paths,
    step,
)
from dysonlab.ensembles.models import ModelSpec, confinement_gradient, interaction_gradient, is_ordered
from dysonlab.space.configspace import EmpiricalLaw, WeylPoint
from dysonlab.utils.helpers import RngStream


class TestSdeConfig:
    @pytest.mark.parametrize(
        "overrides",
        [{"dt": 0.0}, {"t_end": -1.0}, {"speed": "double"}, {"max_substeps": 0}, {"gap_factor": 0.0}],
    )
    def test_validation(self, overrides):
        with pytest.raises(ConfigError):
            SdeConfig(**overrides)

    def test_from_config(self, testing_config):
        testing_config.set("dynamics.dt", 0.01)
        testing_config.set("dynamics.speed", HALF)
        cfg = SdeConfig.from_config(max_substeps=5, literal_drift=None)
        assert cfg.dt == 0.01
        assert cfg.speed == HALF
        assert cfg.max_substeps == 5
        assert cfg.literal_drift is False

    def test_speed_conventions(self):
        assert SdeConfig(speed=FULL).noise_scale == pytest.approx(math.sqrt(2.0))
        assert SdeConfig(speed=FULL).drift_factor == 1.0
        assert SdeConfig(speed=HALF).noise_scale == 1.0
        assert SdeConfig(speed=HALF).drift_factor == 0.5

    def test_literal_drift_doubles_the_confinement(self):
        model = ModelSpec.edge(3)
        x = model.spread_state()
        expected = -(interaction_gradient(x) + 2.0 * confinement_gradient(model, x))
        assert drift(model, x, SdeConfig(literal_drift=True)) == pytest.approx(expected)

    def test_coupled_trace_lengths(self):
        with pytest.raises(ValidationError):
            CoupledTrace(np.zeros(2), np.zeros(3))


class TestStep:
    def test_deterministic_ornstein_uhlenbeck_step(self):
        model = ModelSpec.bulk(1)
        assert step(model, [2.0], 0.01, [0.0], SdeConfig()).coords[0] == pytest.approx(2.0 * 0.99)
        assert step(model, [2.0], 0.01, [0.0], SdeConfig(speed=HALF)).coords[0] == pytest.approx(2.0 * 0.995)

    def test_noise_enters_with_the_speed_scale(self):
        model = ModelSpec.bulk(1)
        moved = step(model, [0.0], 0.01, [0.1], SdeConfig()).coords[0]
        assert moved == pytest.approx(math.sqrt(2.0) * 0.1)

    def test_crossing_step_is_refined(self):
        model = ModelSpec.bulk(2)
        w = step(model, [0.3, 0.0], 1e-3, [-0.15, 0.15], SdeConfig(), rng=RngStream(1))
        assert is_ordered(w.coords)

    def test_refinement_budget(self):
        model = ModelSpec.bulk(2)
        with pytest.raises(SubstepExhausted):
            step(model, [0.1, 0.0], 1e-3, [0.0, 0.0], SdeConfig(max_substeps=3))
        w = step(model, [0.1, 0.0], 1e-3, [0.0, 0.0], SdeConfig(max_substeps=40))
        assert w.coords[0] > 0.1 and w.coords[1] < 0.0

    def test_invalid_inputs(self):
        model = ModelSpec.bulk(2)
        with pytest.raises(Collision):
            step(model, [0.0, 0.0], 1e-3, [0.0, 0.0])
        with pytest.raises(ValidationError):
            step(model, [1.0, 0.0], 1e-3, [0.0])
        with pytest.raises(ConfigError):
            step(model, [1.0, 0.0], 0.0, [0.0, 0.0])


class TestEvolve:
    def test_zero_time_is_the_identity(self):
        model = ModelSpec.bulk(3)
        w0 = WeylPoint([1.0, 0.0, -1.0])
        assert evolve(model, w0, 0.0, SdeConfig(), RngStream(1)) == w0

    def test_reproducible(self):
        model = ModelSpec.bulk(4)
        w0 = model.spread_state()
        first = evolve(model, w0, 0.2, SdeConfig(dt=1e-3), RngStream(5))
        second = evolve(model, w0, 0.2, SdeConfig(dt=1e-3), RngStream(5))
        assert first == second
        assert first != evolve(model, w0, 0.2, SdeConfig(dt=1e-3), RngStream(6))

    def test_ordering_is_preserved(self):
        model = ModelSpec.bulk(8)
        x0 = np.repeat(model.spread_state()[None, :], 20, axis=0)
        terminal = evolve_paths(model, x0, 1.0, SdeConfig(dt=1e-3), RngStream(7))
        assert terminal.shape == (20, 8)
        assert np.all(is_ordered(terminal))

    def test_singleton_ensemble_reduces_to_evolve(self):
        model = ModelSpec.edge(3)
        w0 = model.spread_state()
        law = EmpiricalLaw([w0])
        evolved = evolve_ensemble(model, law, 0.1, SdeConfig(), RngStream(2))
        single = evolve(model, w0, 0.1, SdeConfig(), RngStream(2))
        assert evolved[0].points[::-1] == pytest.approx(single.coords)

    def test_input_validation(self):
        model = ModelSpec.bulk(3)
        with pytest.raises(ValidationError):
            evolve_paths(model, np.zeros((2, 4)), 0.1)
        with pytest.raises(Collision):
            evolve_paths(model, np.array([[0.0, 1.0, 2.0]]), 0.1)
        with pytest.raises(ValidationError):
            evolve_paths(model, np.repeat(model.spread_state()[None], 2, axis=0), 0.1, on_substep=lambda t, s: None)
        with pytest.raises(ConfigError):
            evolve(model, model.spread_state(), -1.0)


class TestCoupled:
    def test_identical_starts_stay_together(self):
        model = ModelSpec.bulk(3)
        w0 = model.spread_state()
        trace = evolve_coupled(model, w0, w0, 0.1, SdeConfig(), RngStream(3))
        assert np.all(trace.distances == 0.0)
        assert trace.times[0] == 0.0
        assert trace.times[-1] == pytest.approx(0.1)

    def test_single_particle_contracts_exponentially(self):
        model = ModelSpec.bulk(1)
        cfg = SdeConfig(dt=1e-3)
        trace = evolve_coupled(model, [1.0], [0.0], 1.0, cfg, RngStream(4))
        assert trace.distances[-1] == pytest.approx((1.0 - 1e-3) ** 1000, rel=1e-10)
        assert trace.distances[-1] == pytest.approx(math.exp(-1.0), rel=1e-3)

    @pytest.mark.parametrize("k", [2, 4, 8])
    def test_distance_is_nonincreasing(self, k):
        model = ModelSpec.bulk(k)
        cfg = SdeConfig(dt=1e-3)
        w0 = model.spread_state()
        v0 = w0 + 0.3 * np.linspace(1.0, 0.0, k)
        trace = evolve_coupled(model, w0, v0, 0.5, cfg, RngStream(k))
        steps = np.diff(trace.times)
        assert np.all(np.diff(trace.distances) <= 1e-6 * steps)

    def test_batch_shapes(self):
        model = ModelSpec.bulk(3)
        x0 = np.repeat(model.spread_state()[None], 4, axis=0)
        y0 = x0 + 0.1
        batch = evolve_coupled_batch(model, x0, y0, 0.05, SdeConfig(dt=1e-2), RngStream(1))
        assert batch.times.shape == (6,)
        assert batch.distances.shape == (6, 4)
        assert batch.terminal.shape == (4, 2, 3)
        assert batch.distances[0] == pytest.approx(np.full(4, 0.1 * math.sqrt(3)))
        with pytest.raises(ValidationError):
            evolve_coupled_batch(model, x0, y0[:2], 0.1)
