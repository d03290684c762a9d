"""CLI wiring: exit codes, file outputs, manifest, spec loading."""

import json
import subprocess
import sys

import numpy as np
import pytest

from levykb.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else {}


class TestCommands:
    def test_validate_pass(self, capsys):
        code, report = run_cli(["validate", "--spec", "cauchy"], capsys)
        assert code == 0 and report["verdict"] == "PASS"

    def test_validate_finite_activity_fails(self, capsys, tmp_path):
        doc = {
            "kind": "tabulated", "drift_a": 0.0, "symmetric": True,
            "params": {
                "u": list(np.geomspace(0.1, 10, 64)),
                "m": list(np.exp(-np.geomspace(0.1, 10, 64))),
                "inner_exponent": -0.5, "tail_exponent": 3.0,
            },
        }
        path = tmp_path / "finite.json"
        path.write_text(json.dumps(doc))
        code, report = run_cli(["validate", "--spec", str(path)], capsys)
        assert code == 1 and report["error"] == "FiniteActivity"

    def test_exponents_writes_csv_and_manifest(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, report = run_cli(
            ["exponents", "--spec", "stable:alpha=1.5", "--out", str(out)],
            capsys)
        assert code == 0
        assert report["beta_hat"] == pytest.approx(2 / 1.5, rel=1e-9)
        assert (out / "exponents.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "exponents"
        assert manifest["constants"]["beta_hat"] == pytest.approx(2 / 1.5, rel=1e-9)

    def test_scales(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, report = run_cli(
            ["scales", "--spec", "cauchy", "--t-grid", "1e-3:1:7",
             "--out", str(out)], capsys)
        assert code == 0 and report["verdict"] == "PASS"
        data = np.loadtxt(out / "scales.csv", delimiter=",", skiprows=1)
        assert np.allclose(data[:, 1] * data[:, 0], 1.0, rtol=1e-9)

    def test_density_with_convcheck(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, report = run_cli(
            ["density", "--spec", "cauchy", "--t-grid", "0.1:0.5:2",
             "--x-points", "501", "--out", str(out)], capsys)
        assert code == 0
        assert report["convolution_check"]["rel_dev"] <= 1e-5
        assert any(p.name.startswith("density_t") for p in out.iterdir())

    def test_mc_command(self, capsys):
        code, report = run_cli(
            ["mc", "--spec", "cauchy", "--t-grid", "1e-2:0.1:2",
             "--mc-n", "20000", "--seed", "12"], capsys)
        assert code == 0 and report["pass"]

    def test_bounds_with_tail(self, capsys, tmp_path):
        out = tmp_path / "run"
        code, report = run_cli(
            ["bounds", "--spec", "cauchy", "--t-grid", "0.05:0.5:2",
             "--tail-density", '{"kind":"power","alpha":1.0,"coef":1.0}',
             "--out", str(out)], capsys)
        assert code == 0 and report["verdict"] == "PASS"
        ids = {c["estimate_id"] for c in report["certificates"]}
        assert {"on_diag", "compound_upper", "compound_lower",
                "deriv_upper_k1", "deriv_upper_k2", "bell_density"} <= ids
        assert (out / "cert_compound_upper.json").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert "compound_upper" in manifest["constants"]

    def test_example_exa1(self, capsys):
        code, report = run_cli(["example", "exa1", "--alpha", "1.0"], capsys)
        assert code == 0
        assert report["band_ratio"] < 10

    def test_example_exa2a(self, capsys):
        code, report = run_cli(["example", "exa2a", "--gamma", "1.0",
                                "--upsilon", "1.0"], capsys)
        assert code == 0
        assert report["c_min"] > 0
        diag = report["bell_integral_diagnostic"]["values"]
        # the bell-inexactness sum grows as t decreases (alpha <= 1)
        assert diag[0] > 2 * diag[-1]

    def test_example_exa2b(self, capsys):
        code, report = run_cli(["example", "exa2b", "--gamma", "1.5",
                                "--upsilon", "1.0"], capsys)
        assert code == 0
        assert report["off_atom_note"] == "reported without verdict"
        assert len(report["off_atom_margins"]) > 0

    def test_bad_preset_is_error(self, capsys):
        code = main(["validate", "--spec", "not-a-preset"])
        assert code == 1

    def test_console_script_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "levykb.cli", "validate", "--spec", "cauchy"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "PASS" in proc.stderr or "PASS" in proc.stdout
