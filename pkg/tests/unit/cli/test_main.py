"""
Tests for the dyson-lab command line.
"""

import json
import logging
import math
from pathlib import Path

import pytest

from dysonlab.__version__ import __version__
from dysonlab.cli.commands import COMMANDS
from dysonlab.cli.main import build_parser, run
from dysonlab.core.exceptions import ConfigError
from dysonlab.ensembles.dpp import KernelSpec, gap_probability


@pytest.fixture(autouse=True)
def restore_logging():
    """run() reconfigures the root logger; put the test harness handlers back."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def _summary(capsys) -> dict:
    lines = capsys.readouterr().out.strip().splitlines()
    return json.loads(lines[-1])


def _write(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


class TestParser:
    def test_every_command_has_a_subparser(self):
        help_text = build_parser().format_help()
        for name in COMMANDS:
            assert name in help_text
        assert "DYSON_LAB_ENV" in help_text

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_command(self, capsys, workdir):
        assert run(["teleport"]) == 2
        summary = _summary(capsys)
        assert summary["status"] == "config_error"
        assert summary["exit_code"] == 2

    def test_no_command(self, capsys, workdir):
        assert run([]) == 2
        assert "No command" in _summary(capsys)["error"]


class TestExperimentSchema:
    def test_missing_seed_for_a_stochastic_command(self, capsys, workdir):
        assert run(["sample", "--model", "bulk", "--k", "3"]) == 2
        summary = _summary(capsys)
        assert summary["command"] == "sample"
        assert "seed" in summary["error"]
        assert not (workdir / "sample.csv").exists()

    def test_build_rejects_bad_documents(self):
        spec = COMMANDS["jko"]
        with pytest.raises(ConfigError):
            spec.build({"command": "jko", "colour": "red"})
        with pytest.raises(ConfigError):
            spec.build({"command": "fredholm"})
        with pytest.raises(ConfigError):
            spec.build({"parameters": {"tau": "small"}})
        with pytest.raises(ConfigError):
            spec.build({"parameters": {"teleport": 1}})
        with pytest.raises(ConfigError):
            spec.build({}, {"format": "xml"})
        with pytest.raises(ConfigError):
            COMMANDS["sample"].build({"seed": -1})

    def test_flags_override_the_file(self):
        experiment = COMMANDS["jko"].build({"parameters": {"tau": 0.25}, "format": "json"}, {"tau": 0.5})
        assert experiment["tau"] == 0.5
        assert experiment.output_path == Path("jko.json")


class TestSample:
    def test_csv_with_metadata_line(self, capsys, workdir):
        assert run(["sample", "--model", "bulk", "--k", "3", "--n", "2", "--seed", "5"]) == 0
        lines = (workdir / "sample.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "x1,x2,x3"
        assert len(lines) == 4
        assert lines[-1] == f"# seed=5, version={__version__}"
        summary = _summary(capsys)
        assert summary["status"] == "ok"
        assert summary["seed"] == 5
        assert summary["samples"] == 2
        assert summary["artifacts"] == ["sample.csv"]

    def test_reruns_are_byte_identical(self, workdir):
        argv = ["sample", "--model", "edge", "--k", "4", "--n", "3", "--seed", "9", "--method", "exact"]
        assert run(argv + ["--out", "first.csv"]) == 0
        assert run(argv + ["--output", "second.csv"]) == 0
        assert (workdir / "first.csv").read_bytes() == (workdir / "second.csv").read_bytes()

    def test_low_mcmc_acceptance_fails_the_run(self, capsys, workdir):
        argv = ["sample", "--method", "mcmc", "--k", "6", "--n", "4", "--steps", "20", "--step-size", "50", "--seed", "3"]
        assert run(argv) == 1
        summary = _summary(capsys)
        assert summary["status"] == "check_failure"
        assert summary["checks_failed"] == 1
        assert (workdir / "sample.csv").exists()

    def test_window_samples_as_json(self, workdir):
        argv = ["sample", "--model", "sine", "--k", "100", "--n", "2", "--window", "1", "--seed", "2", "--format", "json"]
        assert run(argv) == 0
        members = json.loads((workdir / "sample.json").read_text(encoding="utf-8"))
        assert len(members) == 2
        assert all(-1.0 <= x <= 1.0 for gamma in members for x in gamma)


class TestGeometry:
    def test_distance_matrix(self, workdir):
        _write(workdir / "a.json", [0.0, 1.0])
        _write(workdir / "b.json", [[0.5, 1.0], [0.0, 1.0, 2.0]])
        assert run(["dist", "--format", "json", "a.json", "b.json"]) == 0
        payload = json.loads((workdir / "dist.json").read_text(encoding="utf-8"))
        assert payload["distances"] == [[0.5, "inf"]]
        assert payload["ground"] == "full"

    def test_mismatched_input_formats(self, capsys, workdir):
        _write(workdir / "a.json", [0.0])
        (workdir / "b.csv").write_text("0.0\n", encoding="utf-8")
        assert run(["dist", "a.json", "b.csv"]) == 2
        assert "different formats" in _summary(capsys)["error"]

    def test_partial_ground_needs_a_radius(self, workdir):
        _write(workdir / "a.json", [0.0])
        assert run(["dist", "--ground", "partial", "a.json", "a.json"]) == 2

    def test_missing_input(self, workdir):
        assert run(["dist", "nowhere.json", "nowhere.json"]) == 2

    def test_wasserstein_with_plan(self, capsys, workdir):
        _write(workdir / "a.json", [[0.0], [1.0]])
        _write(workdir / "b.json", [[1.0], [0.0]])
        assert run(["wasserstein", "--p", "2", "--ground", "full", "--plan", "a.json", "b.json"]) == 0
        payload = json.loads((workdir / "wasserstein.json").read_text(encoding="utf-8"))
        assert payload["distance"] == 0.0
        assert payload["assignment"] == [1, 0]
        assert _summary(capsys)["distance"] == 0.0

    def test_extension_ladder(self, workdir):
        argv = ["extension", "--family", "winding", "--k", "1", "--lmax", "1", "--pairs", "200", "--seed", "3"]
        assert run(argv) == 0
        lines = (workdir / "extension.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "family,k,level,points,estimate,bound,pass"
        assert len(lines) == 5
        assert all(line.endswith(",true") for line in lines[1:-1])


class TestEnsembles:
    def test_evolve_from_the_spread_state(self, workdir):
        argv = ["evolve", "--model", "bulk", "--k", "3", "--paths", "2", "--t", "0.01", "--start", "spread", "--seed", "4"]
        assert run(argv) == 0
        lines = (workdir / "evolve.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "x1,x2,x3"
        assert len(lines) == 4

    def test_coupled_evolution(self, capsys, workdir):
        argv = ["evolve", "--k", "2", "--paths", "3", "--t", "0.02", "--coupled", "--seed", "4", "--format", "json"]
        assert run(argv) == 0
        assert _summary(capsys)["violations"] == 0

    def test_half_speed_flag(self, workdir):
        argv = ["evolve", "--k", "2", "--paths", "1", "--t", "0.01", "--start", "spread", "--half-speed", "--seed", "4"]
        assert run(argv) == 0
        assert run(["evolve", "--k", "2", "--n", "1", "--seed", "4"]) == 2

    def test_fredholm(self, capsys, workdir):
        assert run(["fredholm", "--kernel", "sine", "--radius", "1", "--nodes", "60"]) == 0
        payload = json.loads((workdir / "fredholm.json").read_text(encoding="utf-8"))
        assert set(payload) == {"value", "trace", "bound", "nodes"}
        assert payload["nodes"] == 60
        assert payload["trace"] == pytest.approx(2.0, abs=1e-10)
        assert payload["bound"] == pytest.approx(math.exp((math.sqrt(2.0) - 1.0) * payload["trace"]))
        assert 0.0 < payload["value"] <= payload["bound"]
        assert _summary(capsys)["checks_passed"] == 2

    def test_fredholm_at_t_zero_is_the_gap_probability(self, workdir):
        assert run(["fredholm", "--radius", "1", "--t", "0", "--out", "gap.csv", "--format", "csv"]) == 0
        lines = (workdir / "gap.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "value,trace,bound,nodes"
        value, _, bound, _ = (float(x) for x in lines[1].split(","))
        assert value == pytest.approx(gap_probability(KernelSpec.sine(), -1.0, 1.0).value, rel=1e-10)
        assert value <= bound

    def test_fredholm_rejects_a_negative_radius(self, workdir):
        assert run(["fredholm", "--radius", "-1"]) == 2


class TestFlowsAndVerification:
    def test_jko_csv(self, workdir):
        assert run(["jko", "--tau", "0.1", "--horizon", "0.3", "--grid", "64", "--start-mean", "1", "--start-var", "2", "--format", "csv"]) == 0
        lines = (workdir / "jko.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("step,t,mean,variance,entropy")
        assert len(lines) == 6
        assert lines[-1] == f"# seed=none, version={__version__}"

    def test_jko_step_beyond_horizon(self, workdir):
        assert run(["jko", "--tau", "2.0", "--horizon", "1.0"]) == 2

    def test_experiment_file_with_override(self, workdir):
        document = {"command": "jko", "format": "json", "parameters": {"tau": 0.25, "horizon": 0.5, "grid": 32}}
        path = _write(workdir / "experiment.json", document)
        assert run(["--config", str(path)]) == 0
        assert len(json.loads((workdir / "jko.json").read_text(encoding="utf-8"))) == 3
        assert run(["--config", str(path), "jko", "--tau", "0.5", "--output", "coarse.json"]) == 0
        assert len(json.loads((workdir / "coarse.json").read_text(encoding="utf-8"))) == 2

    def test_experiment_file_for_another_command(self, workdir):
        path = _write(workdir / "experiment.json", {"command": "fredholm"})
        assert run(["--config", str(path), "jko"]) == 2

    def test_rigidity_table(self, workdir):
        assert run(["rigidity", "--shells", "5", "--seed", "1"]) == 0
        payload = json.loads((workdir / "rigidity.json").read_text(encoding="utf-8"))
        assert [row["shell"] for row in payload["shells"]] == [1, 2, 3, 4, 5]

    def test_verify_closed_form(self, capsys, workdir):
        assert run(["verify", "--suite", "closed-form", "--seed", "7"]) == 0
        payload = json.loads((workdir / "verify.json").read_text(encoding="utf-8"))
        assert payload["suite"] == "closed-form"
        assert all(check["pass"] for check in payload["checks"])
        summary = _summary(capsys)
        assert summary["checks_failed"] == 0
        assert summary["checks_run"] == len(payload["checks"])
