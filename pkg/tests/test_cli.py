import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ermakov.cli import main
from ermakov.io import read_table

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


ISO = """
[system]
catalog = "isotropic-oscillator"
[initial]
x = 1.0
y = 0.3
px = 0.2
py = 0.9
[run]
t_end = 5.0
[integrator]
abs_tol = 1e-12
rel_tol = 1e-12
record_every = 0.1
"""


def test_isotropic_run_conserves(tmp_path, capsys):
    cfg = _write(tmp_path, ISO)
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 0
    cols, _ = read_table(tmp_path / "cfg_integrate.csv")
    assert list(cols) == ["t", "x", "y", "px", "py", "H", "I"]
    assert np.ptp(cols["H"]) < 1e-10 and np.ptp(cols["I"]) < 1e-10
    np.testing.assert_allclose(cols["t"], np.linspace(0, 5, 51), atol=1e-12)
    report = json.loads((tmp_path / "cfg_drift.json").read_text())
    assert report["passed"] and report["conserved_checked"] == ["H", "I"]
    assert "wrote" in capsys.readouterr().out


def test_rerun_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, ISO)
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", str(cfg), "--out", str(d), "--format", "json"]) == 0
    for name in ("cfg_integrate.json", "cfg_drift.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_compare_calogero(tmp_path):
    assert main(["compare", str(CONFIGS / "calogero.toml"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "calogero_compare_report.json").read_text())
    errs = report["sup_norm_errors"]
    assert set(errs) == {"direct_vs_quadrature", "direct_vs_closed_q", "direct_vs_closed_s",
                         "quadrature_vs_closed_q", "quadrature_vs_closed_s"}
    assert max(errs.values()) < 1e-6 and report["passed"]


def test_compare_noncentral(tmp_path):
    assert main(["run", str(CONFIGS / "noncentral.toml"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "noncentral_compare_report.json").read_text())
    assert max(report["sup_norm_errors"].values()) < 1e-6


def test_quadrature_and_closed_form_pipelines(tmp_path):
    cfg = CONFIGS / "calogero.toml"
    text = cfg.read_text().replace('pipeline = "compare"', 'pipeline = "quadrature"')
    assert main(["run", str(_write(tmp_path, text, "q.toml")), "--out", str(tmp_path)]) == 0
    cols, _ = read_table(tmp_path / "q_quadrature.csv")
    assert {"tau", "q", "s"} <= set(cols)
    text = cfg.read_text().replace('pipeline = "compare"', 'pipeline = "closed-form"')
    assert main(["run", str(_write(tmp_path, text, "c.toml")), "--out", str(tmp_path)]) == 0
    cols, meta = read_table(tmp_path / "c_closed_form.csv")
    assert list(cols) == ["t", "q", "s"] and len(cols["t"]) == 201


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, ISO.replace('catalog = "isotropic-oscillator"', 'catalog = "nope"'))
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 2
    assert "system.catalog" in capsys.readouterr().err


def test_bad_flag_exit_2(tmp_path, capsys):
    assert main(["run", str(_write(tmp_path, ISO)), "--t-end", "-1"]) == 2
    assert "--t-end" in capsys.readouterr().err


def test_time_dependent_quadrature_exit_3(tmp_path, capsys):
    text = (CONFIGS / "cervero_lejarreta.toml").read_text().replace('pipeline = "integrate"',
                                                                     'pipeline = "quadrature"')
    assert main(["run", str(_write(tmp_path, text)), "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "quadrature" in err and "initial state" in err


def test_singularity_exit_3(tmp_path, capsys):
    text = """
[system]
A = 1
B = 0
C = 1
Lambda = "-4/q"
F_integral = "0"
[initial]
x = 1.0
y = 0.5
px = -1.0
py = -0.5
[run]
t_end = 10.0
"""
    assert main(["run", str(_write(tmp_path, text)), "--out", str(tmp_path)]) == 3
    assert "SingularityApproachError" in capsys.readouterr().err


def test_drift_violation_exit_4(tmp_path, capsys):
    cfg = _write(tmp_path, ISO + "[tolerances]\ndrift = 1e-15\n")
    code = main(["run", str(cfg), "--out", str(tmp_path), "--tol-abs", "1e-4", "--tol-rel", "1e-4"])
    assert code == 4
    assert (tmp_path / "cfg_integrate.csv").exists()
    report = json.loads((tmp_path / "cfg_drift.json").read_text())
    assert not report["passed"]


def test_compare_violation_exit_4(tmp_path):
    text = (CONFIGS / "calogero.toml").read_text().replace("compare = 1e-6", "compare = 1e-14")
    assert main(["compare", str(_write(tmp_path, text)), "--out", str(tmp_path)]) == 4


def test_check_constraint(tmp_path, capsys):
    assert main(["check-constraint", str(CONFIGS / "goedert_constraint.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "goedert_constraint_constraint.json").read_text())
    assert report["max_residual"] < 1e-8 and report["skipped"] == 0
    assert "max |constraint residual|" in capsys.readouterr().out


def test_check_constraint_seed_is_reproducible(tmp_path):
    cfg = CONFIGS / "goedert_constraint.json"
    out = []
    for d in ("a", "b"):
        assert main(["check-constraint", str(cfg), "--out", str(tmp_path / d), "--seed", "7"]) == 0
        out.append((tmp_path / d / "goedert_constraint_constraint.json").read_bytes())
    assert out[0] == out[1]
    assert json.loads(out[0])["seed"] == 7


def test_catalog_lists_systems(capsys):
    assert main(["catalog"]) == 0
    text = capsys.readouterr().out
    for name in ("calogero", "noncentral", "cervero-lejarreta", "goedert", "isotropic-oscillator"):
        assert name in text


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ermakov", "catalog"], capture_output=True, text=True)
    assert proc.returncode == 0 and "calogero" in proc.stdout
