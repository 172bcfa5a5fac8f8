import json
import subprocess
import sys

import pytest

from polnet.cli import main


@pytest.fixture()
def config_path(tmp_path):
    doc = {
        "schema_version": 1,
        "name": "cli-smoke",
        "network": {"builder": "nearest_neighbor", "n": 21},
        "profiles": {"delta": 0.4, "a_brown": 5.0, "a_green": 2.75,
                     "epsilon": 0.1, "omega": 1.0},
        "economy": {"rho": 0.03, "gamma": 0.5},
        "cost": {"variant": "quadratic", "lam": 1.0},
        "run": {"p0": 1.0, "horizon": 50.0, "step": 0.01,
                "outputs": ["nodes", "steady"]},
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def run_main(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidate:
    def test_ok(self, capsys, config_path):
        code, out, _ = run_main(capsys, "validate", str(config_path))
        assert code == 0
        assert json.loads(out)["ok"] is True

    def test_bad_config_names_constraint(self, capsys, config_path, tmp_path):
        doc = json.loads(config_path.read_text())
        doc["profiles"]["delta"] = 0.0
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, _, err = run_main(capsys, "validate", str(bad))
        assert code == 1
        payload = json.loads(err)
        assert payload["error"] == "ConfigError"
        assert "natural decay must be strictly positive" in payload["message"]

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_main(capsys, "validate", str(tmp_path / "nope.json"))
        assert code == 1
        assert json.loads(err)["error"] == "FileNotFoundError"


class TestRun:
    def test_writes_tables(self, capsys, config_path, tmp_path):
        out_dir = tmp_path / "out"
        code, out, _ = run_main(capsys, "run", str(config_path),
                                "--out", str(out_dir))
        assert code == 0
        outputs = json.loads(out)["outputs"]
        assert (out_dir / "cli-smoke_nodes.csv").exists()
        assert (out_dir / "cli-smoke_steady.csv").exists()
        assert (out_dir / "cli-smoke_meta.json").exists()
        assert len(outputs) == 3

    def test_json_format(self, capsys, config_path, tmp_path):
        code, _, _ = run_main(capsys, "run", str(config_path),
                              "--out", str(tmp_path), "--format", "json")
        assert code == 0
        doc = json.loads((tmp_path / "cli-smoke_nodes.json").read_text())
        assert len(doc["rows"]) == 21

    def test_polnet_out_env_default(self, capsys, config_path, tmp_path,
                                    monkeypatch):
        monkeypatch.setenv("POLNET_OUT", str(tmp_path / "envout"))
        code, _, _ = run_main(capsys, "run", str(config_path))
        assert code == 0
        assert (tmp_path / "envout" / "cli-smoke_nodes.csv").exists()


class TestFigure:
    def test_writes_contract_files(self, capsys, tmp_path):
        code, _, _ = run_main(capsys, "figure", "1", "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "fig1_nodes.csv").exists()
        assert (tmp_path / "fig1_meta.json").exists()

    def test_bad_number_is_usage_error(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["figure", "9", "--out", str(tmp_path)])
        assert exc.value.code == 2


class TestCompareAndSteady:
    def test_compare_renewable(self, capsys, config_path, tmp_path):
        code, out, _ = run_main(capsys, "compare-renewable", str(config_path),
                                "--out", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["center_node"] == 11
        assert payload["center_dI_pct"] < 0
        assert (tmp_path / "cli-smoke_compare.csv").exists()

    def test_steady_state(self, capsys, config_path, tmp_path):
        code, out, _ = run_main(capsys, "steady-state", str(config_path),
                                "--out", str(tmp_path))
        assert code == 0
        assert json.loads(out)["residual"] <= 1e-10
        lines = (tmp_path / "cli-smoke_steady.csv").read_text().splitlines()
        assert lines[0] == "node,P_inf,residual"


class TestOracle:
    def test_report_and_determinism(self, capsys, config_path, tmp_path):
        args = ["oracle", str(config_path), "--samples", "5", "--seed", "7",
                "--out", str(tmp_path)]
        code, out1, _ = run_main(capsys, *args)
        assert code == 0
        report = json.loads(out1)
        assert report["ok"] is True
        assert report["max_F_gap"] <= 1e-6
        assert report["max_control_distance"] <= 1e-3
        code, out2, _ = run_main(capsys, *args)
        assert out1 == out2

    def test_seed_changes_draws(self, capsys, config_path):
        _, out1, _ = run_main(capsys, "oracle", str(config_path),
                              "--samples", "3", "--seed", "1", "--out", "-")
        _, out2, _ = run_main(capsys, "oracle", str(config_path),
                              "--samples", "3", "--seed", "2", "--out", "-")
        assert json.loads(out1)["seed"] != json.loads(out2)["seed"]


class TestUsageErrors:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 2

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["figure", "1", "--bogus"])
        assert exc.value.code == 2

    def test_console_entry_point(self, config_path, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "polnet.cli", "validate", str(config_path)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["ok"] is True
