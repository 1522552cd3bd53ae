"""
Tests for random streams, run statistics and result-file helpers.
"""

import json

import numpy as np
import pytest

from dysonlab.__version__ import __version__
from dysonlab.core.exceptions import ConfigError
from dysonlab.utils.helpers import (
    RngStream,
    RunStats,
    as_generator,
    as_stream,
    format_duration,
    get_run_stats,
    input_format,
    metadata_line,
    parallel_map,
    read_configurations,
    worker_count,
    write_csv,
    write_json,
)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(5, 2).generator().normal(size=4)
        b = RngStream(5, 2).generator().normal(size=4)
        assert np.array_equal(a, b)

    def test_different_indices_differ(self):
        a = RngStream(5, 0).generator().normal(size=4)
        b = RngStream(5, 1).generator().normal(size=4)
        assert not np.array_equal(a, b)

    def test_spawn_is_deterministic_and_distinct(self):
        parent = RngStream(9)
        first = parent.spawn(3)
        assert first == RngStream(9, 3, (0,))
        assert first.spawn(0) != parent.spawn(0)
        assert np.array_equal(first.generator().random(3), parent.spawn(3).generator().random(3))

    def test_negative_index_rejected(self):
        with pytest.raises(ConfigError):
            RngStream(1, -1)

    def test_coercions(self, rng):
        assert as_generator(rng) is rng
        assert isinstance(as_generator(3), np.random.Generator)
        assert as_stream(4) == RngStream(4)
        stream = RngStream(4, 1)
        assert as_stream(stream) is stream
        assert isinstance(as_stream(rng), RngStream)


class TestParallelMap:
    def test_preserves_order(self):
        assert parallel_map(lambda v: v * v, range(10), workers=4) == [v * v for v in range(10)]

    def test_inline_for_single_worker(self):
        assert parallel_map(str, [1, 2], workers=1) == ["1", "2"]

    def test_worker_count_respects_cap(self, testing_config):
        testing_config.set("threads", 1)
        assert worker_count() == 1


class TestRunStats:
    def test_counts_checks_and_artifacts(self):
        stats = RunStats()
        stats.record_check("a", True)
        stats.record_check("b", False)
        stats.record_operation("solve")
        stats.record_artifact("out.csv")
        snapshot = stats.get_stats()
        assert snapshot["checks_run"] == 2
        assert snapshot["checks_passed"] == 1
        assert snapshot["checks_failed"] == 1
        assert snapshot["operations"]["solve"] == 1
        assert snapshot["artifacts"] == ["out.csv"]
        stats.reset()
        assert stats.get_stats()["checks_run"] == 0

    @pytest.mark.parametrize(
        "seconds, text", [(1.5, "1.50s"), (75, "1m 15s"), (3725, "1h 2m 5s")]
    )
    def test_format_duration(self, seconds, text):
        assert format_duration(seconds) == text


class TestResultFiles:
    def test_csv_has_header_rows_and_metadata(self, tmp_path):
        path = write_csv(tmp_path / "out.csv", ("a", "b"), [(0.1, 2), (True, np.float64(1.0))], seed=7)
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b"
        assert lines[1] == "0.1,2"
        assert lines[2] == "true,1.0"
        assert lines[-1] == metadata_line(7)
        assert f"version={__version__}" in lines[-1]
        assert str(path) in get_run_stats().get_stats()["artifacts"]

    def test_csv_empty_configuration_row(self, tmp_path):
        path = write_csv(tmp_path / "out.csv", ("points",), [[]], seed=None)
        lines = path.read_text().splitlines()
        assert lines[1] == '""'
        assert lines[-1].endswith("seed=none, version=" + __version__)

    def test_json_is_sorted_and_handles_numpy(self, tmp_path):
        path = write_json(tmp_path / "out.json", {"b": np.arange(3), "a": np.float64(0.5)})
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 0.5, "b": [0, 1, 2]}

    def test_identical_inputs_give_identical_bytes(self, tmp_path):
        rows = [(0.1, 0.2), (0.3, 0.4)]
        first = write_csv(tmp_path / "one.csv", ("x1", "x2"), rows, seed=3).read_bytes()
        second = write_csv(tmp_path / "two.csv", ("x1", "x2"), rows, seed=3).read_bytes()
        assert first == second


class TestReadConfigurations:
    def test_json_single_configuration(self, tmp_path):
        path = tmp_path / "one.json"
        path.write_text("[0.5, -1]")
        assert read_configurations(path) == [[0.5, -1.0]]

    def test_json_law(self, tmp_path):
        path = tmp_path / "law.json"
        path.write_text("[[0, 1], [], [2.5]]")
        assert read_configurations(path) == [[0.0, 1.0], [], [2.5]]

    def test_csv_skips_header_and_comments(self, tmp_path):
        path = tmp_path / "law.csv"
        path.write_text("x1,x2\n0.1,0.2\n0.3\n# seed=1, version=x\n")
        assert read_configurations(path) == [[0.1, 0.2], [0.3]]

    def test_csv_round_trip_of_written_table(self, tmp_path):
        path = write_csv(tmp_path / "law.csv", ("x1", "x2"), [(0.1, 0.7), (1 / 3, 2.0)], seed=1)
        assert read_configurations(path) == [[0.1, 0.7], [1 / 3, 2.0]]

    @pytest.mark.parametrize("content, name", [("{", "bad.json"), ('{"a": 1}', "obj.json"), ("1", "x.txt")])
    def test_malformed_inputs(self, tmp_path, content, name):
        path = tmp_path / name
        path.write_text(content)
        with pytest.raises(ConfigError):
            read_configurations(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_configurations(tmp_path / "absent.json")

    def test_non_numeric_csv_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1\n0.5\nabc\n")
        with pytest.raises(ConfigError):
            read_configurations(path)

    def test_input_format(self):
        assert input_format("a/B.JSON") == "json"
        assert input_format("law.csv") == "csv"
