import hashlib
import json
import math

import numpy as np
import pytest

from slowline.cli import main

TWO_PI = 2.0 * math.pi

CELL = {"c0_f": 353.2e-15, "cg_f": 5.05e-15, "l0_h": 3.151e-9}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def spec_dict(test_spec):
    return test_spec.to_dict()


def test_band_command(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {"cell": CELL, "n_points": 101})
    out = tmp_path / "out"
    assert main(["band", "--config", cfg, "--out", str(out)]) == 0
    data = np.loadtxt(out / "dispersion.csv", delimiter=",", skiprows=1)
    assert data.shape == (101, 2)
    f_ghz = data[:, 1] / TWO_PI / 1e9
    assert 4.5 < f_ghz.min() < f_ghz.max() < 4.9


def test_s21_command(tmp_path, spec_dict):
    cfg = _write(tmp_path, "cfg.json", {"spec": spec_dict, "n_points": 64})
    out = tmp_path / "out"
    assert main(["s21", "--config", cfg, "--out", str(out)]) == 0
    header = (out / "s21.csv").read_text().splitlines()[0]
    assert header == "omega_rad_s,s21_re,s21_im,s11_re,s11_im"


def test_taper_opt_command(tmp_path, untapered_26):
    cfg = _write(tmp_path, "cfg.json",
                 {"base": untapered_26.to_dict(), "n_modified": 2})
    out = tmp_path / "out"
    assert main(["taper-opt", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "taper_report.json").read_text())
    assert report["ripple_db"] < 0.5
    conv = (out / "convergence.csv").read_text().splitlines()
    assert conv[0] == "iter,ripple_db"
    assert len(conv) > 2


def test_dressed_command(tmp_path):
    cfg = _write(tmp_path, "cfg.json",
                 {"cell": CELL,
                  "emitter": {"omega_ge_hz": 4.745e9, "g_uc_hz": 3e7}})
    out = tmp_path / "out"
    assert main(["dressed", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "dressed.json").read_text())
    assert set(payload) == {"e_bound_hz", "e_radiative_hz_re",
                            "e_radiative_hz_im", "qubit_weight",
                            "lambda_cells", "splitting_hz"}
    assert payload["e_radiative_hz_im"] < 0
    assert 0 < payload["qubit_weight"] < 1


def test_dynamics_command_and_sweep(tmp_path, qubit_spec_nobend, q1, midband):
    base = {"spec": qubit_spec_nobend.to_dict(), "qubit": q1.to_dict(),
            "protocol": {"omega_interact_hz": midband / TWO_PI,
                         "t_max_s": 2e-9, "dt_output_s": 1e-10}}
    cfg = _write(tmp_path, "cfg.json", base)
    out = tmp_path / "out"
    assert main(["dynamics", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "trace.csv").read_text().splitlines()[0] == "t_s,p_e"

    sweep = dict(base)
    sweep["sweep_omega_interact_hz"] = [midband / TWO_PI + k * 1e6
                                        for k in range(5)]
    cfg2 = _write(tmp_path, "cfg2.json", sweep)
    out2 = tmp_path / "out2"
    assert main(["dynamics", "--config", cfg2, "--out", str(out2),
                 "--sweep"]) == 0
    files = sorted(p.name for p in out2.glob("trace_*.csv"))
    assert len(files) == 5
    index = (out2 / "index.csv").read_text().splitlines()
    assert index[0] == "omega_interact_hz,file"
    assert len(index) == 6


def test_disorder_extinction_determinism(tmp_path, tapered_26):
    cfg = _write(tmp_path, "cfg.json",
                 {"spec": tapered_26.to_dict(), "sigma_over_j": [0.0, 0.1],
                  "n_realizations": 5})
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["disorder", "extinction", "--config", cfg,
                     "--out", str(out), "--seed", "7"]) == 0
        outs.append(_digest(out / "extinction.csv"))
    assert outs[0] == outs[1]
    out = tmp_path / "c"
    assert main(["disorder", "extinction", "--config", cfg,
                 "--out", str(out), "--seed", "8"]) == 0
    assert _digest(out / "extinction.csv") != outs[0]


def test_disorder_calibrate(tmp_path, tapered_26):
    from slowline.bands import tight_binding
    j_hz = tight_binding(tapered_26.interior)["j_tb"] / TWO_PI
    cfg = _write(tmp_path, "cfg.json",
                 {"spec": tapered_26.to_dict(),
                  "measured_delta_fsr_hz": 2.5e6,
                  "sigma_grid_hz": [0.02 * j_hz, 0.1 * j_hz, 0.2 * j_hz],
                  "n_realizations": 20})
    out = tmp_path / "out"
    assert main(["disorder", "calibrate", "--config", cfg,
                 "--out", str(out), "--seed", "1"]) == 0
    table = (out / "calibration_table.csv").read_text().splitlines()
    assert table[0] == "sigma_rad_s,mean_delta_fsr_rad_s"
    payload = json.loads((out / "calibration.json").read_text())
    assert payload["sigma_estimate_hz"] > 0


def test_manifest_references_all_outputs(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {"cell": CELL})
    out = tmp_path / "out"
    assert main(["band", "--config", cfg, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    produced = sorted(p.name for p in out.iterdir() if p.name != "manifest.json")
    assert manifest["outputs"] == produced
    assert manifest["command"] == "band"
    assert len(manifest["input_digests"]) == 1
    assert next(iter(manifest["input_digests"].values())) == _digest(tmp_path / "cfg.json")
    assert manifest["version"]
    assert manifest["started_utc"] <= manifest["finished_utc"]


def test_unknown_key_rejected_with_path(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json",
                 {"cell": {"c0_f": 1e-13, "cg_F": 5e-15, "l0_h": 3e-9}})
    out = tmp_path / "out"
    assert main(["band", "--config", cfg, "--out", str(out)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["type"] == "validation"
    assert "cg_F" in err["error"]
    assert "cell" in err["error"]


def test_missing_config_file(tmp_path, capsys):
    assert main(["band", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "out")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["type"] == "validation"


def test_unknown_top_level_key(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", {"cell": CELL, "extra": 1})
    assert main(["band", "--config", cfg,
                 "--out", str(tmp_path / "out")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "extra" in err["error"]
