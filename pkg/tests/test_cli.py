"""CLI surface: schemas, exit codes, determinism of outputs."""

import json
import subprocess
import sys

import numpy as np
import pytest

SMALL_CFG = {
    "k0": {"re": 2.0, "im": 0.05},
    "a": 1.0,
    "eta": {"re": 1.0, "im": -1.0},
    "theta_in_deg": 60.0,
    "numerics": {"N": 16, "tail_tol": 1e-6},
    "grids": {"n_theta": 9, "k_grid_factor": 2.0, "n_k": 5},
    "out_dir": "out",
}


def run_cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "stripscat.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture()
def cfg_file(tmp_path):
    p = tmp_path / "cfg.json"
    cfg = dict(SMALL_CFG)
    cfg["out_dir"] = str(tmp_path / "out")
    p.write_text(json.dumps(cfg))
    return p


class TestSolve:
    def test_outputs_and_schema(self, tmp_path, cfg_file):
        r = run_cli("solve", "--config", str(cfg_file), cwd=tmp_path)
        assert r.returncode == 0, r.stderr
        out = tmp_path / "out"
        header = (out / "directivity.csv").read_text().splitlines()[0]
        assert header == "theta_deg,S_re,S_im,Sa_re,Sa_im,Ss_re,Ss_im"
        header = (out / "densities.csv").read_text().splitlines()[0]
        assert header == "x,mu_re,mu_im,sigma_re,sigma_im"
        diags = json.loads((out / "diagnostics.json").read_text())
        assert set(diags) == {"antisymmetric", "symmetric", "config"}

    def test_eta_zero_kills_ss_columns(self, tmp_path):
        cfg = dict(SMALL_CFG)
        cfg["eta"] = {"re": 0.0, "im": 0.0}
        cfg["out_dir"] = str(tmp_path / "out")
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        r = run_cli("solve", "--config", str(p), cwd=tmp_path)
        assert r.returncode == 0, r.stderr
        rows = (tmp_path / "out" / "directivity.csv").read_text().splitlines()[1:]
        ss = np.array([[float(v) for v in row.split(",")[5:7]] for row in rows])
        assert np.max(np.abs(ss)) == 0

    def test_deterministic_rerun(self, tmp_path, cfg_file):
        r1 = run_cli("solve", "--config", str(cfg_file), cwd=tmp_path)
        first = (tmp_path / "out" / "directivity.csv").read_bytes()
        r2 = run_cli("solve", "--config", str(cfg_file), cwd=tmp_path)
        second = (tmp_path / "out" / "directivity.csv").read_bytes()
        assert r1.returncode == r2.returncode == 0
        assert first == second

    def test_config_parse_error_exit_2(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        r = run_cli("solve", "--config", str(p), cwd=tmp_path)
        assert r.returncode == 2

    def test_gain_violating_eta_rejected(self, tmp_path):
        cfg = dict(SMALL_CFG)
        cfg["eta"] = {"re": 1.0, "im": 0.5}   # Im eta > 0: gain, rejected
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        r = run_cli("solve", "--config", str(p), cwd=tmp_path)
        assert r.returncode == 2
        assert "eta" in r.stderr.lower() or "dissipation" in r.stderr.lower()


class TestSpectra:
    def test_schema_and_residual_column(self, tmp_path, cfg_file):
        r = run_cli("spectra", "--config", str(cfg_file), cwd=tmp_path)
        assert r.returncode == 0, r.stderr
        lines = (tmp_path / "out" / "spectra.csv").read_text().splitlines()
        cols = lines[0].split(",")
        assert cols[:2] == ["k_re", "k_im"]
        assert "res_u" in cols and "res_v" in cols
        res_u = [float(row.split(",")[cols.index("res_u")]) for row in lines[1:]]
        assert max(res_u) < 1e-3  # N=16 quick config

    def test_requires_absorbing_k0(self, tmp_path):
        cfg = dict(SMALL_CFG)
        cfg["k0"] = {"re": 2.0, "im": 0.0}
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        r = run_cli("spectra", "--config", str(p), cwd=tmp_path)
        assert r.returncode == 2


class TestSweep:
    def test_eta_sweep_toggles_deformation_flag(self, tmp_path, cfg_file):
        r = run_cli("sweep", "--config", str(cfg_file), "--param", "eta_re",
                    "--values", "1.0,-1.0", cwd=tmp_path)
        assert r.returncode == 0, r.stderr
        lines = (tmp_path / "out" / "sweep_summary.csv").read_text().splitlines()
        cols = lines[0].split(",")
        idx = cols.index("deformation_needed")
        flags = [row.split(",")[idx] for row in lines[1:]]
        assert flags == ["0", "1"]

    def test_bad_param_exit_2(self, tmp_path, cfg_file):
        r = run_cli("sweep", "--config", str(cfg_file), "--param", "bogus",
                    "--values", "1.0", cwd=tmp_path)
        assert r.returncode == 2

    def test_single_value_matches_solve(self, tmp_path, cfg_file):
        run_cli("solve", "--config", str(cfg_file), cwd=tmp_path)
        solo = (tmp_path / "out" / "directivity.csv").read_bytes()
        run_cli("sweep", "--config", str(cfg_file), "--param", "theta_in",
                "--values", "60.0", cwd=tmp_path)
        swept = (tmp_path / "out" / "directivity_000.csv").read_bytes()
        assert solo == swept


class TestConfigRoundtrip:
    def test_lossless_serialization(self):
        from stripscat.verify import RunConfig
        rc = RunConfig.from_dict(SMALL_CFG)
        assert RunConfig.from_dict(rc.to_dict()) == rc
