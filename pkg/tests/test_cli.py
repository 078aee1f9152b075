import csv
import json

import pytest

from diracshadow.cli import main


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_algebra_check_json(capsys):
    assert main(["algebra-check", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["failed"] == []
    assert set(report["max_residuals"]) == set(report["verdicts"])
    assert max(report["max_residuals"].values()) <= 1e-12


def test_algebra_check_fault_names_invariant(capsys):
    assert main(["algebra-check", "--inject-fault", "orthonormality"]) == 1
    assert "orthonormality" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: sweep\ndimension: 1\nprofile: {name: aligned_pair}\n"
                   "epsilons: [0.1, 0.2, 0.05, 0.025]\ntest_function: {name: bump, center: 1, radius: 1}\n")
    assert main(["sweep", "--spec", str(bad)]) == 2
    assert "epsilon_not_decreasing" in capsys.readouterr().err
    assert main(["sweep", "--spec", "no_such_experiment"]) == 2
    assert main(["sweep"]) == 2


def test_kind_and_dimension_mismatch_exit_2(capsys):
    assert main(["limit-compare", "--spec", "sweep_1d_aligned"]) == 2
    assert main(["evolve-3d", "--spec", "evolve_1d"]) == 2
    assert "does not match" in capsys.readouterr().err


def test_threads_validated():
    assert main(["sweep", "--spec", "sweep_1d_aligned", "--threads", "0"]) == 2


def test_aligned_sweep_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["sweep", "--spec", "sweep_1d_aligned", "--out", str(out)]) == 0
    rows = _rows(out / "sweep_1d_aligned.csv")
    assert len(rows) == 4
    assert [float(r["epsilon"]) for r in rows] == [0.2, 0.1, 0.05, 0.025]
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["verdicts"].values()) == {"converged"}
    assert len(manifest["spec_hash"]) == 64
    for name in manifest["outputs"]:
        assert (out / name).is_file(), name
    assert any(name.endswith(".png") for name in manifest["outputs"])


def test_csv_is_deterministic_and_full_precision(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["sweep", "--spec", "sweep_1d_aligned", "--out", str(d), "--no-plots"]) == 0
    text = (a / "sweep_1d_aligned.csv").read_bytes()
    assert text == (b / "sweep_1d_aligned.csv").read_bytes()
    summary = json.loads((a / "sweep_1d_aligned_summary.json").read_text())
    rows = _rows(a / "sweep_1d_aligned.csv")
    # the CSV carries repr floats, so values parse back to the exact doubles
    for r in rows:
        v = float(r["pairing"])
        assert repr(v) == r["pairing"]
    case = summary["cases"][0]
    assert float(rows[-1]["abs_error"]) == pytest.approx(case["rel_errors"][-1] * abs(case["limit"]), rel=1e-14)


def test_evolve_defaults(tmp_path):
    assert main(["evolve-1d", "--out", str(tmp_path), "--no-plots"]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "evolve"
    assert all(v in ("pass", "converged") for v in manifest["verdicts"].values())


def test_list_specs(capsys):
    assert main(["list-specs"]) == 0
    names = capsys.readouterr().out.split()
    assert "sweep_1d_aligned" in names and "extfield_log_coulomb" in names
