import json
import subprocess
import sys

import numpy as np
import pytest

from traplab.cli import execute_config, parse_config_file
from traplab.errors import ConfigError
from traplab.reporting import report_bytes


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "traplab.cli", *args],
        capture_output=True, text=True, timeout=300,
    )


class TestConfigParsing:
    def test_flat_key_value_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            "# comment line\n"
            "command = classify\n"
            "scenario = minkowski_torus_quotient\n"
            "surface = Sigma\n"
            "n = 3  # trailing comment\n"
            'expect = "extremal"\n'
        )
        cfg = parse_config_file(str(cfg_file))
        assert cfg["command"] == "classify"
        assert cfg["n"] == 3
        assert cfg["expect"] == "extremal"

    def test_malformed_line_rejected(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("this is not a key value pair\n")
        with pytest.raises(ConfigError):
            parse_config_file(str(bad))

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_file("/nonexistent/path.cfg")


class TestExecuteConfig:
    def test_classify_torus(self):
        report = execute_config(
            {"command": "classify", "scenario": "minkowski_torus_quotient",
             "surface": "Sigma", "expect": "extremal"}
        )
        assert report["passed"]
        assert report["signature"] == "(-,+,...,+)"

    def test_perturb_values(self):
        report = execute_config(
            {"command": "perturb", "scenario": "minkowski_torus_quotient",
             "surface": "Sigma", "n": 2, "samples_per_axis": 4}
        )
        assert report["passed"]
        names = {c["name"] for c in report["checks"]}
        assert "gnHH-value" in names and "class-after-rescale" in names

    def test_perturb_curved_background(self):
        # the extremal cylinder equator also flips to strictly trapped
        report = execute_config(
            {"command": "perturb", "scenario": "einstein_cylinder", "surface": "equator",
             "n": 3, "equator_samples": 8}
        )
        assert report["passed"]
        assert all(r["gn_H_H"] < 0 for r in report["payload"]["records"])

    def test_curvature_timelike_pass(self):
        report = execute_config({"command": "curvature", "case": "timelike", "n": 1})
        assert report["passed"]
        assert report["checks"][0]["measured"] == pytest.approx(-np.exp(2.0), rel=1e-9)

    def test_curvature_null_spacelike_reports_known_mismatch(self):
        report = execute_config({"command": "curvature", "case": "null-spacelike", "n": 4})
        assert not report["passed"]
        check = report["checks"][0]
        assert check["measured"] == pytest.approx(-2.0, rel=1e-9)
        assert check["expected"] == pytest.approx(-1.0, rel=1e-9)

    def test_energy_check_chain(self):
        report = execute_config(
            {"command": "energy-check", "scenario": "einstein_cylinder", "seed": 5, "count": 16}
        )
        assert report["passed"]
        assert report["payload"]["ricci_weak"]["verdict"] == "satisfied_on_samples"
        assert report["payload"]["ricci_strict"]["verdict"] == "violated"

    def test_constraints_schwarzschild(self):
        report = execute_config(
            {"command": "constraints", "scenario": "schwarzschild_slice_isotropic",
             "points": 25, "seed": 4}
        )
        assert report["passed"]

    def test_spectrum_and_deform(self):
        spec = execute_config(
            {"command": "spectrum", "scenario": "einstein_cylinder", "resolution": 32}
        )
        assert spec["passed"]
        assert spec["payload"]["lambda1"]["re"] == pytest.approx(-1.0, abs=1e-10)
        deform = execute_config({"command": "deform", "resolution": 32})
        assert deform["passed"]

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            execute_config({"command": "frobnicate"})

    def test_replay_byte_identical(self):
        cfg = {"command": "linear", "seed": 11}
        a = execute_config(dict(cfg))
        b = execute_config(dict(cfg))
        assert report_bytes(a, drop_wall_time=True) == report_bytes(b, drop_wall_time=True)
        assert report_bytes(a) != b""

    def test_runtime_records_count_as_wall_time(self):
        # runtime-budget checks carry measured seconds; stripping wall time
        # must null them while keeping the pass flags
        report = execute_config({"command": "linear", "seed": 11})
        stripped = json.loads(report_bytes(report, drop_wall_time=True))
        runtime = [c for c in stripped["checks"] if c["name"].endswith("-runtime")]
        assert runtime and all(c["measured"] is None and c["passed"] for c in runtime)


class TestCommandLine:
    def test_classify_exit_zero(self):
        proc = run_cli("classify", "--scenario", "minkowski_torus_quotient",
                       "--surface", "Sigma")
        assert proc.returncode == 0
        assert "extremal" in proc.stdout

    def test_curvature_cli_reference_mismatch_exit_one(self):
        proc = run_cli("curvature", "--case", "null-spacelike", "--n", "1")
        assert proc.returncode == 1

    def test_unknown_scenario_exit_three(self):
        proc = run_cli("classify", "--scenario", "kerr", "--surface", "Sigma")
        assert proc.returncode == 3

    def test_bad_tolerance_exit_two(self):
        proc = run_cli("curvature", "--case", "timelike", "--n", "1", "--tol", "curvature=x")
        assert proc.returncode == 2

    def test_report_and_csv_outputs(self, tmp_path):
        out = tmp_path / "report.json"
        proc = run_cli("spectrum", "--scenario", "einstein_cylinder",
                       "--resolution", "32", "--out", str(out))
        assert proc.returncode == 0
        doc = json.loads(out.read_text())
        assert doc["command"] == "spectrum"
        assert doc["passed"] is True

        csv_out = tmp_path / "eigen.csv"
        proc = run_cli("spectrum", "--scenario", "einstein_cylinder", "--resolution", "32",
                       "--out", str(csv_out), "--format", "csv")
        assert proc.returncode == 0
        lines = csv_out.read_text().strip().splitlines()
        assert lines[0] == "coord1,value"
        assert len(lines) == 33
        spectrum_lines = (tmp_path / "eigen.csv.spectrum.csv").read_text().splitlines()
        assert spectrum_lines[0] == "re,im"
        assert len(spectrum_lines) == 33
        assert float(spectrum_lines[1].split(",")[0]) == pytest.approx(-1.0, abs=1e-10)

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("command = curvature\ncase = timelike\nn = 1\n")
        proc = run_cli("curvature", "--config", str(cfg), "--n", "2")
        assert proc.returncode == 0
        assert "1.359" in proc.stdout  # e^{2/2}/2 at n = 2, overriding n = 1

    def test_replay_byte_identical_reports(self, tmp_path):
        # same config including the output path, run twice
        out = tmp_path / "report.json"
        docs = []
        for _ in range(2):
            proc = run_cli("energy-check", "--scenario", "minkowski_torus_quotient",
                           "--seed", "9", "--out", str(out))
            assert proc.returncode == 0
            docs.append(json.loads(out.read_text()))
        for doc in docs:
            doc.pop("wall_time_s")
        assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)

    def test_verify_single_suite(self):
        proc = run_cli("verify", "linear-lemmas")
        assert proc.returncode == 0
        assert "checks passed" in proc.stdout

    def test_verify_unknown_suite_exit_two(self):
        proc = run_cli("verify", "no-such-suite")
        assert proc.returncode == 2

    def test_verify_single_case_form(self):
        proc = run_cli("verify", "curvature-perturbation", "--case", "timelike", "--n", "1")
        assert proc.returncode == 0
        assert "-7.389056" in proc.stdout

    def test_tolerance_override_changes_outcome(self):
        # an absurdly tight curvature tolerance turns rounding into failure
        proc = run_cli("curvature", "--case", "timelike", "--n", "3", "--tol",
                       "curvature=1e-18")
        assert proc.returncode == 1

    def test_classify_expect_mismatch_exit_one(self):
        proc = run_cli("classify", "--scenario", "minkowski_torus_quotient",
                       "--surface", "Sigma", "--expect", "trapped")
        assert proc.returncode == 1

    def test_deform_with_q_offset(self):
        proc = run_cli("deform", "--resolution", "32", "--q-offset", "2.0")
        assert proc.returncode == 0
        assert "displacement -" in proc.stdout
