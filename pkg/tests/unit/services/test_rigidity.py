"""
Tests for shell occupancy, shell transport and count variance.
"""

import math

import numpy as np
import pytest

from dysonlab.core.exceptions import CheckFailure, ConfigError
from dysonlab.ensembles.dpp import GapProbability
from dysonlab.services import rigidity
from dysonlab.services.rigidity import (
    count_variance_profile,
    sample_windows,
    shell,
    shell_occupancy_stats,
    shell_target,
    shell_transport,
)
from dysonlab.space.configspace import Configuration


class TestShells:
    def test_geometry(self):
        assert shell(1) == (-2.0, -1.0)
        assert shell(4) == (-4.25, -4.0)
        assert shell_target(2) == -2.25
        with pytest.raises(ConfigError):
            shell(0)

    def test_transport_moves_one_point_per_shell(self):
        image, cost = shell_transport(Configuration([-1.5, -1.2, -2.2, 0.5]))
        assert cost == pytest.approx(0.05)
        assert image.points.tolist() == pytest.approx([-2.25, -1.5, -1.2, 0.5])

    def test_worst_case_cost_stays_below_the_bound(self):
        left_edges = [shell(j)[0] for j in range(1, 51)]
        _, cost = shell_transport(Configuration(left_edges))
        assert cost**2 <= math.pi**2 / 6
        assert cost**2 == pytest.approx(sum(0.25 / j**2 for j in range(1, 51)))

    def test_planar_configurations_rejected(self):
        with pytest.raises(ConfigError):
            shell_transport(Configuration(np.zeros((2, 2))))


class TestOccupancy:
    def test_sine_shells_respect_the_bound(self):
        rows = shell_occupancy_stats("sine", 6)
        assert [row.shell for row in rows] == list(range(1, 7))
        for row in rows:
            assert row.bound == pytest.approx(1.0 - math.exp(-1.0 / row.shell), rel=1e-9)
            assert row.probability >= row.bound
            assert row.frequency is None
        assert np.all(np.diff([row.partial_sum for row in rows]) > 0)

    def test_decreasing_partial_sum_is_a_failure(self, monkeypatch):
        exact = rigidity.gap_probability

        def overshooting(spec, left, right, nodes=None):
            # a gap probability above one gives the third shell negative mass
            if right == -3.0:
                return GapProbability(1.0 + 1e-6, 1.0)
            return exact(spec, left, right, nodes)

        monkeypatch.setattr(rigidity, "gap_probability", overshooting)
        with pytest.raises(CheckFailure, match="partial sum decreases"):
            shell_occupancy_stats("sine", 4)

    def test_invalid_requests(self):
        with pytest.raises(ConfigError):
            shell_occupancy_stats("sine", 0)
        with pytest.raises(ConfigError):
            shell_occupancy_stats("bessel", 3)


class TestCountVariance:
    def test_profile_of_fixed_samples(self):
        samples = [Configuration([0.1]), Configuration([0.1, 0.3])]
        (row,) = count_variance_profile(samples, [0.5])
        assert row.mean == 1.5
        assert row.variance == 0.5
        assert row.predicted_mean == pytest.approx(1.0, abs=1e-10)
        assert row.sub_poissonian
        assert row.to_dict()["sub_poissonian"] is True

    def test_invalid_profiles(self):
        with pytest.raises(ConfigError):
            count_variance_profile([Configuration([0.0])], [1.0])
        with pytest.raises(ConfigError):
            count_variance_profile([Configuration(), Configuration()], [-1.0])

    def test_sample_windows(self, stream):
        samples = sample_windows("sine", 3, 1.0, stream, window_k=50)
        assert len(samples) == 3
        for gamma in samples:
            assert np.all((gamma.points >= -1.0) & (gamma.points < 1.0))
