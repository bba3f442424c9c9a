import csv
import io
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from focusing.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from focusing.conditions import osd_wavelength_for_span


def run(argv, tmp_path, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (out.read_bytes() if out.exists() else b"")


def test_analyze_osd_preset(tmp_path):
    code, data = run(["analyze", "--preset", "fig5d", "--mu", str(np.pi / 4)], tmp_path)
    assert code == EXIT_OK
    rep = json.loads(data)["reports"][0]
    assert rep["state"] == "SuperIdeal"
    assert rep["kappa"] == pytest.approx(1.0, abs=1e-9)
    for key in ("gram", "crosstalk_magnitudes", "hermitian_angles", "gramian", "hadamard_bound",
                "singular_values", "pinv_norm"):
        assert key in rep


def test_analyze_duplicate_point_singular(tmp_path):
    geo = tmp_path / "g.json"
    geo.write_text(json.dumps({
        "variant": "arbitrary",
        "sources": [[1, 0.5, 0], [1, -0.5, 0]],
        "points": [[0, 0.09, 0], [0, 0.09, 0]],
    }))
    code, data = run(["analyze", "--geometry", str(geo), "--freq", "1000"], tmp_path)
    assert code == EXIT_OK
    rep = json.loads(data)["reports"][0]
    assert rep["state"] == "Singular"
    assert rep["kappa"] is None
    assert any("SingularGram" in w for w in rep["warnings"])


def test_sweep_kappa_minima_at_design_roots(tmp_path):
    a = 0.09
    geo = tmp_path / "g.json"
    geo.write_text(json.dumps({"variant": "two_channel_symmetric", "a": a, "gamma_deg": 30}))
    code, data = run(["sweep", "--geometry", str(geo), "--sweep", "0.2", "12", "5801", "--sweep-mu",
                      "--workers", "4"], tmp_path)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(data.decode())))
    mu = np.array([float(r["mu"]) for r in rows])
    kappa = np.array([float(r["kappa"]) for r in rows])
    minima = mu[1:-1][(kappa[1:-1] < kappa[:-2]) & (kappa[1:-1] < kappa[2:])]
    # roots: sin 30 deg = (2n - 1) wavelength / 8a  ->  mu = (2n - 1) pi / (4 sin 30 deg)
    roots = [2 * np.pi * a / osd_wavelength_for_span(np.radians(60), a, n) for n in range(1, 10)]
    roots = [r for r in roots if 0.2 < r < 12]
    assert len(minima) == len(roots)
    np.testing.assert_allclose(minima, roots, atol=0.005)
    assert np.all(np.diff(mu) > 0)


def test_sweep_rejects_reversed_range(tmp_path):
    code, _ = run(["sweep", "--preset", "fig5d", "--sweep", "1000", "100", "5"], tmp_path)
    assert code == EXIT_CONFIG


def test_design_osd_1khz(tmp_path):
    code, data = run(["design", "osd", "--f", "1000", "--a", "0.09", "--verify"], tmp_path)
    assert code == EXIT_OK
    out = json.loads(data)
    assert out["span_deg"] == pytest.approx(57.0, rel=0.03)
    assert out["verification"]["state"] == "SuperIdeal"


def test_design_osd_infeasible(tmp_path):
    code, data = run(["design", "osd", "--mu", "0.41", "--a", "0.09"], tmp_path)
    assert code == EXIT_CHECK
    assert json.loads(data)["violated"]


def test_design_ula_offsets(tmp_path):
    code, data = run(["design", "ula", "--L", "20", "--dx", "0.012", "--f", "4899", "--offsets", "-2,0,2",
                      "--verify"], tmp_path)
    assert code == EXIT_OK
    out = json.loads(data)
    np.testing.assert_allclose(out["angles_deg"], [-35.69, 0.0, 35.69], atol=0.01)
    assert out["verification"]["passed"]


def test_design_ula_grating(tmp_path):
    code, data = run(["design", "ula", "--L", "20", "--dx", "0.012", "--f", "4899", "--offsets", "0,20"], tmp_path)
    assert code == EXIT_CHECK
    assert "grating" in json.loads(data)["violated"]


def test_design_upda_two_channel(tmp_path):
    code, data = run(["design", "upda", "--L", "2", "--span", "180", "--a", "0.09", "--verify"], tmp_path)
    assert code == EXIT_OK
    out = json.loads(data)
    assert out["wavelength"] == pytest.approx(0.72)
    assert out["wavelength_low"] == pytest.approx(0.72)


def test_design_asym_and_symmetric_ula(tmp_path):
    code, data = run(["design", "asym", "--rotation", "70", "--verify"], tmp_path)
    assert code == EXIT_OK and json.loads(data)["mu"] == pytest.approx(4.593, abs=1e-3)
    code, data = run(["design", "ula-symmetric", "--L", "20", "--dx", "0.012", "--f", "1484", "--verify"], tmp_path)
    assert code == EXIT_OK and json.loads(data)["M_max"] == 3


def test_field_csv_deterministic(tmp_path):
    args = ["field", "plane", "--preset", "fig7a", "--resolution", "41"]
    _, a = run(args, tmp_path, "a.csv")
    _, b = run([*args, "--workers", "3"], tmp_path, "b.csv")
    assert a == b and a.startswith(b"x,y,z,gain_linear,gain_db\n")
    assert len(a.splitlines()) == 41 * 41 + 1


def test_field_json(tmp_path):
    code, data = run(["field", "arc", "--preset", "fig11", "--format", "json", "--radius", "3"], tmp_path)
    assert code == EXIT_OK
    doc = json.loads(data)
    assert doc["kind"] == "arc" and len(doc["gain_linear"]) == 361


def test_field_bad_focus(tmp_path):
    code, _ = run(["field", "arc", "--preset", "fig5d", "--focus", "5"], tmp_path)
    assert code == EXIT_CONFIG


def test_analyze_same_config_same_bytes(tmp_path):
    args = ["analyze", "--preset", "fig10b", "--sweep", "1000", "8000", "9"]
    _, a = run(args, tmp_path, "a.json")
    _, b = run([*args, "--workers", "4"], tmp_path, "b.json")
    assert a == b


class TestConfigErrors:
    def test_json_syntax_line_column(self, tmp_path, capsys):
        geo = tmp_path / "g.json"
        geo.write_text('{"variant": "upda",\n  "L": 3,,\n}')
        assert main(["analyze", "--geometry", str(geo), "--freq", "100"]) == EXIT_CONFIG
        assert "g.json:2:" in capsys.readouterr().err

    def test_schema_field_diagnostic(self, tmp_path, capsys):
        geo = tmp_path / "g.json"
        geo.write_text(json.dumps({"variant": "upda", "L": 0, "span_deg": 60, "a": 0.09}))
        assert main(["analyze", "--geometry", str(geo), "--freq", "100"]) == EXIT_CONFIG
        assert "field 'L'" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["analyze", "--geometry", str(tmp_path / "nope.json"), "--freq", "1"]) == EXIT_CONFIG

    def test_negative_frequency(self):
        assert main(["analyze", "--preset", "fig5d", "--freq", "-5"]) == EXIT_CONFIG

    def test_bad_tolerance(self):
        assert main(["analyze", "--preset", "fig5d", "--ideal-tol", "0"]) == EXIT_CONFIG

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == EXIT_CONFIG

    def test_both_sources(self, tmp_path):
        assert main(["analyze", "--preset", "fig5d", "--geometry", "x.json"]) == EXIT_CONFIG


class TestVerify:
    def test_default_passes(self, tmp_path):
        code, data = run(["verify"], tmp_path)
        assert code == EXIT_OK
        assert data.count(b"PASS") == 9

    def test_perturbation_fails_super_ideal(self, tmp_path):
        code, data = run(["verify", "--quick", "--perturb", "1e-3"], tmp_path)
        assert code == EXIT_CHECK
        assert b"FAIL  osd_super_ideal" in data

    def test_quick_under_ten_seconds(self, tmp_path):
        t0 = time.perf_counter()
        code, _ = run(["verify", "--quick"], tmp_path)
        assert code == EXIT_OK
        assert time.perf_counter() - t0 < 10

    def test_same_seed_same_bytes(self, tmp_path):
        _, a = run(["verify", "--quick", "--seed", "7"], tmp_path, "a")
        _, b = run(["verify", "--quick", "--seed", "7"], tmp_path, "b")
        assert a == b


def test_console_script_stdout():
    proc = subprocess.run([sys.executable, "-m", "focusing.cli", "design", "osd", "--mu", str(np.pi / 4)],
                          capture_output=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["span_deg"] == pytest.approx(180.0)
