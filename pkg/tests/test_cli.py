import json
import subprocess
import sys

import numpy as np
import pytest

from nhmqc import cli
from nhmqc.errors import ConfigError


class TestParseGrid:
    def test_inclusive_endpoints(self):
        assert cli.parse_grid("0:1:0.5") == (0.0, 0.5, 1.0)

    def test_endpoint_within_half_step(self):
        grid = cli.parse_grid("0.1:2.0:0.1")
        assert len(grid) == 20
        assert grid[0] == 0.1
        assert abs(grid[-1] - 2.0) < 1e-12

    def test_bad_syntax(self):
        with pytest.raises(ConfigError):
            cli.parse_grid("0..1")

    def test_bad_step(self):
        with pytest.raises(ConfigError):
            cli.parse_grid("0:1:-0.5")


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestTwoLevelCommand:
    def test_csv_schema_and_ep_flag(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["two-level", "--j", "1.0", "--gamma-grid", "0.5:1.5:0.25",
                       "--reference", "sy", "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "two_level.csv")
        assert header == ["gamma", "F", "I_-1", "I_0", "I_1", "ep_flag"]
        assert len(rows) == 5
        by_gamma = {float(r[0]): r for r in rows}
        assert by_gamma[1.0][-1] == "1"     # flagged exactly at the EP
        assert by_gamma[1.0][1] == ""       # F omitted there
        assert by_gamma[0.5][-1] == "0"
        f = float(by_gamma[0.5][1])
        assert abs(f - np.sqrt(1.25 / 1.5)) < 1e-9

    def test_manifest_references_outputs(self, tmp_path):
        out = tmp_path / "run"
        cli.main(["two-level", "--gamma-grid", "0.2:0.4:0.1", "--outdir", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "done"
        assert manifest["subcommand"] == "two-level"
        names = {o["path"] for o in manifest["outputs"]}
        assert names == {"two_level.csv"}
        assert all(len(o["sha256"]) == 64 for o in manifest["outputs"])
        assert manifest["wall_seconds"] >= 0
        assert manifest["config"]["gamma_grid"] == "0.2:0.4:0.1"

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["two-level", "--gamma-grid", "0.2:0.8:0.2"]
        cli.main(args + ["--outdir", str(a)])
        cli.main(args + ["--outdir", str(b)])
        assert (a / "two_level.csv").read_bytes() == (b / "two_level.csv").read_bytes()


class TestConfigFile:
    def test_file_values_used_and_flags_override(self, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("j: 2.0\ngamma_grid: '0.2:0.6:0.2'\nreference: sz\n")
        out = tmp_path / "run"
        rc = cli.main(["two-level", "--config", str(cfg), "--reference", "sy",
                       "--outdir", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["j"] == 2.0              # from file
        assert manifest["config"]["reference"] == "sy"     # flag wins

    def test_unknown_key_is_config_error(self, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("jjj: 2.0\n")
        rc = cli.main(["two-level", "--config", str(cfg),
                       "--outdir", str(tmp_path / "x")])
        assert rc == cli.EXIT_CONFIG

    def test_missing_file_is_config_error(self, tmp_path):
        rc = cli.main(["two-level", "--config", str(tmp_path / "nope.yaml"),
                       "--outdir", str(tmp_path / "x")])
        assert rc == cli.EXIT_CONFIG


class TestIsingCommands:
    def test_sweep_emits_table_and_peak(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["ising-sweep", "--l", "4", "--j", "0.4", "--j2", "0",
                       "--gamma", "1.0", "--hz-grid", "0.05:0.45:0.05",
                       "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "ising_sweep.csv")
        assert header[:2] == ["hz", "F"]
        assert "I_0" in header and "I_-4" in header and "I_4" in header
        assert header[-3:] == ["re_energy", "im_energy", "ep_flag"]
        cp_header, cp_rows = read_csv(out / "critical_point.csv")
        assert cp_header == ["hz_c", "peak_F", "method", "grid_step"]
        hz_c = float(cp_rows[0][0])
        assert 0.05 < hz_c < 0.45

    def test_scaling_table(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["ising-scaling", "--l-values", "4,5",
                       "--j", "0.4", "--j2", "0", "--gamma", "1.0",
                       "--hz-grid", "0.05:0.45:0.05", "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "scaling.csv")
        assert header == ["L", "inverse_L", "hz_c", "peak_F", "method"]
        assert [r[0] for r in rows] == ["4", "5"]


class TestHNCommands:
    def test_obc_no_intensity_columns(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["hn-obc", "--n", "8", "--ratio-grid", "0.5:2.0:0.5",
                       "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "hn_obc.csv")
        assert header == ["ratio", "F", "re_energy", "im_energy", "ep_flag"]
        by_ratio = {float(r[0]): float(r[1]) for r in rows}
        assert by_ratio[1.0] <= 1e-10

    def test_phase_diagram_long_format(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["hn-phase", "--n", "20", "--dl-grid", "0.5:1.0:0.5",
                       "--dr-grid", "0.5:1.0:0.5", "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "hn_phase.csv")
        assert header == ["delta_l_ratio", "delta_r_ratio", "F", "ep_flag"]
        assert len(rows) == 4
        diag = [r for r in rows if r[0] == r[1]]
        assert all(float(r[2]) <= 1e-9 for r in diag)

    def test_disorder_stats(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["hn-disorder", "--n", "30", "--w-grid", "0:1:0.5",
                       "--realizations", "5", "--seed", "3", "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "hn_disorder.csv")
        assert header == ["W", "mean_F", "std_F", "realizations", "excluded",
                          "master_seed"]
        assert rows[0][0] == "0.0"
        assert float(rows[0][2]) == 0.0   # W = 0: identical realizations


class TestProtocolCommand:
    def test_round_trip_outputs(self, tmp_path):
        out = tmp_path / "run"
        rc = cli.main(["protocol", "--l", "4", "--hz", "0.1", "--outdir", str(out)])
        assert rc == 0
        header, rows = read_csv(out / "protocol_mqi.csv")
        assert header == ["m", "I_retrieved", "I_direct", "abs_err"]
        assert len(rows) == 9   # m = -4..4
        assert max(float(r[3]) for r in rows) <= 1e-10
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["summary"]["parseval_residual"] <= 1e-10


class TestValidateCommand:
    def test_green_suite_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "run"
        rc = cli.main(["validate", "--draws", "5", "--outdir", str(out)])
        assert rc == 0
        text = (out / "validation_report.txt").read_text()
        assert "overall: PASS" in text
        assert "PASS" in capsys.readouterr().out


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "nhmqc.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == "0.1.0"

    def test_workers_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.WORKERS_ENV, "2")
        out = tmp_path / "run"
        rc = cli.main(["two-level", "--gamma-grid", "0.2:0.4:0.1",
                       "--outdir", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["workers"] == 2


class TestExitCodes:
    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        from nhmqc import experiments
        from nhmqc.errors import EnsembleFailureError

        def boom(*args, **kwargs):
            raise EnsembleFailureError("all realizations failed at W = 1.0")

        monkeypatch.setattr(experiments, "disorder_ensemble", boom)
        rc = cli.main(["hn-disorder", "--n", "10", "--w-grid", "1:2:1",
                       "--realizations", "2", "--outdir", str(tmp_path / "x")])
        assert rc == cli.EXIT_NUMERIC

    def test_validation_failure_exit_code(self, tmp_path, monkeypatch):
        from nhmqc import oracles

        failing = oracles.ValidationReport(checks=(
            oracles.CheckResult(name="synthetic", passed=False,
                                worst=1.0, tolerance=0.0),
        ))
        monkeypatch.setattr(oracles, "run_validation_suite",
                            lambda **kw: failing)
        rc = cli.main(["validate", "--outdir", str(tmp_path / "x")])
        assert rc == cli.EXIT_VALIDATION
