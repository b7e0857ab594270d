"""
Tests for the command line: run / replay / list and the exit codes.
"""
import json

import pandas as pd
import pytest
import yaml

import main
from constants import EXIT_OK, EXIT_CONTRACT_VIOLATION, EXIT_USAGE, ENV_THREADS
from exceptions import ConfigError
from experiments import EXPERIMENTS, Experiment, ExperimentResult


@pytest.fixture
def config_path(tmp_path):
    config = {
        "settings": {"output_dir": str(tmp_path / "out"), "results_file": "results.csv"},
        "calibration": {"A": 40.0, "C": 18.7, "P": [8.0, 4.0]},
        "experiments": {
            "equator": {"seed": 37, "k": 5},
            "crofton": {"seed": 7, "shape": "circle", "n_samples": 5_000},
            "levi": {"k": 16},
        },
    }
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(config))
    return path


def _results_csv(tmp_path):
    return tmp_path / "out" / "results.csv"


class TestOverrides:

    def test_values_parse_as_yaml(self):
        overrides = main.parse_overrides(["--n-samples", "1000", "--shape=ellipse", "--eps", "[0.1, 0.2]"])
        assert overrides == {"n_samples": 1000, "shape": "ellipse", "eps": [0.1, 0.2]}

    def test_missing_value(self):
        with pytest.raises(ConfigError, match="no value"):
            main.parse_overrides(["--seed"])

    def test_positional_rejected(self):
        with pytest.raises(ConfigError):
            main.parse_overrides(["circle"])

    def test_override_beats_config(self, config_path):
        config = main.load_config(config_path)
        params, seed = main.build_params(config, "equator", {"k": 7, "seed": 3})
        assert params == {"k": 7}
        assert seed == 3

    def test_calibration_injected(self, config_path):
        config = main.load_config(config_path)
        params, _ = main.build_params(config, "schedule", {"seed": 1})
        assert params["calibration"] == {"A": 40.0, "C": 18.7, "P": [8.0, 4.0]}


class TestRun:

    def test_equator_report(self, config_path, tmp_path, capsys):
        assert main.main(["run", "equator", "--config", str(config_path)]) == EXIT_OK
        reports = list((tmp_path / "out").glob("equator_seed37_*.json"))
        assert len(reports) == 1
        payload = json.loads(reports[0].read_text())
        assert payload["deg_E"] == 2 and payload["deg_F"] == 3 and payload["degree_gap"] == 1
        df = pd.read_csv(_results_csv(tmp_path))
        assert list(df["experiment"]) == ["equator"]
        assert "equator k=5" in capsys.readouterr().out

    def test_flag_override(self, config_path, tmp_path):
        assert main.main(["run", "equator", "--config", str(config_path), "--k", "[1, 2]"]) == EXIT_OK
        assert len(pd.read_csv(_results_csv(tmp_path))) == 2

    def test_output_dir_flag(self, config_path, tmp_path):
        target = tmp_path / "elsewhere"
        assert main.main(["run", "equator", "--config", str(config_path), "--output-dir", str(target)]) == EXIT_OK
        assert (target / "results.csv").exists()

    def test_unknown_experiment(self, config_path, capsys):
        assert main.main(["run", "nope", "--config", str(config_path)]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "crofton" in err and "globalize" in err

    def test_missing_seed(self, config_path, capsys):
        assert main.main(["run", "levi", "--config", str(config_path)]) == EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main.main(["run", "equator", "--config", str(tmp_path / "absent.yaml")]) == EXIT_USAGE

    def test_bad_parameter(self, config_path):
        assert main.main(["run", "equator", "--config", str(config_path), "--k", "zero"]) == EXIT_USAGE

    def test_contract_violation(self, config_path, monkeypatch, capsys):
        def failing(params, seed):
            result = ExperimentResult(rows=[{"params": {"row": "x"}, "estimate": 1.0}])
            result.violate("estimate outside its interval")
            return result

        monkeypatch.setitem(EXPERIMENTS, "failing", Experiment("failing", failing, "always violates"))
        assert main.main(["run", "failing", "--config", str(config_path), "--seed", "1"]) == EXIT_CONTRACT_VIOLATION
        assert "estimate outside its interval" in capsys.readouterr().err


class TestReplay:

    def test_fresh_row_replays(self, config_path, tmp_path, capsys):
        assert main.main(["run", "crofton", "--config", str(config_path)]) == EXIT_OK
        csv_path = str(_results_csv(tmp_path))
        outcome = main.replay(csv_path, 0)
        assert outcome.equal and outcome.same_seed
        assert main.main(["replay", csv_path, "1"]) == EXIT_OK
        assert "replay identical" in capsys.readouterr().out

    def test_across_thread_counts(self, config_path, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, "1")
        assert main.main(["run", "crofton", "--config", str(config_path)]) == EXIT_OK
        monkeypatch.setenv(ENV_THREADS, "4")
        assert main.replay(str(_results_csv(tmp_path)), 0).equal

    def test_altered_seed_is_a_different_run(self, config_path, tmp_path, capsys):
        assert main.main(["run", "crofton", "--config", str(config_path)]) == EXIT_OK
        code = main.main(["replay", str(_results_csv(tmp_path)), "0", "--seed", "8"])
        assert code == EXIT_OK
        assert "different run" in capsys.readouterr().out

    def test_bad_index(self, config_path, tmp_path):
        assert main.main(["run", "equator", "--config", str(config_path)]) == EXIT_OK
        assert main.main(["replay", str(_results_csv(tmp_path)), "5"]) == EXIT_USAGE


def test_list_prints_registry(capsys):
    assert main.main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("crofton", "vitushkin", "packing", "goodvalue", "concentration", "schedule", "globalize",
                 "levi", "equator", "calibrate"):
        assert name in out


def test_no_command():
    assert main.main([]) == EXIT_USAGE
