import csv
import io
import json
import os
import subprocess
import sys

import pytest

from yamabe_clusters.cli import main


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines()]


def test_verify_integrals_passes(capsys):
    code, out, _ = run(["verify", "integrals"], capsys)
    recs = records(out)
    assert code == 0
    assert recs and all(r["status"] == "PASS" for r in recs)
    assert all(r["anchor"] and r["check"] for r in recs)


def test_verify_nondegeneracy_n4(capsys):
    code, out, _ = run(["verify-nondegeneracy", "--n", "4", "--D", "2"], capsys)
    assert code == 0
    mult = [r for r in records(out) if r["check"].startswith("Robin multiplicity")]
    assert mult[0]["value"] == 4.0 and mult[0]["status"] == "PASS"


def test_negative_control_fails(capsys):
    code, out, _ = run(["verify", "bubble", "--perturb-exponent"], capsys)
    assert code == 1
    assert any(r["status"] == "FAIL" for r in records(out))
    code, _, _ = run(["verify", "bubble"], capsys)
    assert code == 0


def test_nonnegative_K_exit_2(capsys):
    code, out, err = run(["constants", "--K", "0.5"], capsys)
    assert code == 2 and "K<0" in err and out == ""


def test_subcritical_exit_2(capsys):
    code, _, err = run(["verify", "bubble", "--D", "0.9"], capsys)
    assert code == 2 and "precondition" in err


def test_missing_config_exit_2(capsys, tmp_path):
    code, _, err = run(["constants", "--config", str(tmp_path / "absent.ini")], capsys)
    assert code == 2 and "not found" in err


def test_unknown_config_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[problem]\nn = 4\ncolour = blue\n")
    code, _, err = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2 and "colour" in err
    cfg.write_text("[extras]\nn = 4\n")
    code, _, err = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2 and "extras" in err


def test_bad_usage_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2


def test_config_file_with_matrices(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[problem]\nn = 4\nK = -1\nD = 2\n[form]\nQ = 1,0,0; 0,1,0; 0,0,1\n"
                   "h = 0,0.5,0; 0.5,0,0; 0,0,0\n[cluster]\nk = 2\n[run]\nformat = json\n")
    code, out, _ = run(["optimize", "--config", str(cfg)], capsys)
    rec = records(out)[0]
    assert code == 0 and rec["k"] == 2 and rec["status"] == "PASS"
    assert rec["t_star_rel_diff"] <= 1e-6


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[problem]\nn = 4\nD = 2\n")
    code, out, _ = run(["spectrum", "--config", str(cfg), "--n", "5"], capsys)
    assert code == 0
    rows = records(out)
    assert rows[-1]["dimension"] == 5


def test_optimize_k1(capsys):
    code, out, _ = run(["optimize", "--n", "4", "--k", "1"], capsys)
    rec = records(out)[0]
    assert code == 0 and all(abs(v) < 1e-12 for v in rec["tau"][0])


def test_spectrum_csv(capsys):
    code, out, _ = run(["spectrum", "--n", "4", "--D", "1.25", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert rows[0].keys() >= {"i", "mu", "dimension"}
    assert rows[-1]["dimension"] == "4"


def test_constants_csv_n4(capsys):
    code, out, _ = run(["constants", "--n", "4", "--K", "-1", "--H", "1", "--format", "csv"], capsys)
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert row["d_eq_h"] == "PASS" and row["E_check"] == "PASS" and row["c_check"] == "PASS"
    assert row["f"] == ""


def test_export_field(capsys, tmp_path):
    out_path = tmp_path / "field.csv"
    code, _, _ = run(["export-field", "--n", "4", "--k", "2", "--points", "5", "--out", str(out_path)], capsys)
    rows = list(csv.reader(out_path.open()))
    assert code == 0
    assert rows[0] == ["n", "eps", "k", "grid"]
    assert rows[2] == ["x1", "xn", "value"]
    assert len(rows) == 3 + 5 * 3
    assert all(float(r[2]) > 0 for r in rows[3:])


def test_thread_cap_validated(capsys, monkeypatch):
    monkeypatch.setenv("YCL_THREADS", "zero")
    code, _, err = run(["verify", "integrals"], capsys)
    assert code == 2 and "YCL_THREADS" in err


def test_energy_suite_reports_curvature_identity(capsys):
    code, out, _ = run(["verify", "energy"], capsys)
    recs = records(out)
    scalar = [r for r in recs if r["check"].startswith("scalar-curvature")]
    assert scalar and all(r["status"] == "PASS" for r in scalar)
    # exit status reflects every check, including the curvature-term identity
    assert code == (0 if all(r["status"] == "PASS" for r in recs) else 1)


def test_module_entry_point_byte_identical(tmp_path):
    env = dict(os.environ, YCL_THREADS="1")
    args = [sys.executable, "-m", "yamabe_clusters", "optimize", "--n", "4", "--k", "3"]
    a = subprocess.run(args, capture_output=True, env=env, check=True).stdout
    b = subprocess.run(args, capture_output=True, env=env, check=True).stdout
    assert a == b and a
