import csv
import io
import json
import subprocess
import sys

import pytest

from equicorr.cli import main

MODEL = ["--m", "80", "--beta", "0.3", "--sigma0-sq", "1", "--tau-sq", "225"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(path, **params):
    base = {"m": 80, "beta": 0.3, "sigma0_sq": 1, "tau_sq": 15}
    path.write_text(json.dumps([{"params": {**base, **params}, "methods": ["T1", "algorithm"], "reps": 4}]))
    return path


class TestThreshold:
    def test_determined(self, capsys):
        code, out, _ = run(capsys, "threshold", "--method", "determined", *MODEL)
        assert code == 0
        assert float(out) == pytest.approx(2.7248, abs=1e-3)

    def test_algorithm_on_given_data(self, capsys):
        code, out, _ = run(capsys, "threshold", "--method", "algorithm", *MODEL, "--y", "1,2,-10,11")
        assert code == 0 and float(out) == 6.0

    def test_power_mean_needs_exponent(self, capsys):
        code, _, err = run(capsys, "threshold", "--method", "power_mean", *MODEL)
        assert code != 0 and "--beta-exp" in err

    def test_drawn_sample_is_seeded(self, capsys):
        first = run(capsys, "threshold", "--method", "T1", *MODEL, "--seed", "4")
        second = run(capsys, "threshold", "--method", "T1", *MODEL, "--seed", "4")
        assert first == second and first[0] == 0

    def test_dense_regime_reports_error(self, capsys):
        code, _, err = run(capsys, "threshold", "--method", "determined", "--m", "80", "--beta", "0.01",
                           "--sigma0-sq", "1", "--tau-sq", "1")
        assert code == 1 and err.startswith("equicorr: error:")


class TestRisk:
    def test_zero_cut(self, capsys):
        code, out, _ = run(capsys, "risk", "--m", "80", "--beta", "0.7", "--sigma0-sq", "1", "--tau-sq", "15", "--c", "0")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1
        # every null is a false positive: m (1 - 80**-0.7)
        assert float(rows[0]["risk"]) == pytest.approx(76.2767, abs=1e-4)
        assert float(rows[0]["expected_fn"]) == 0.0

    def test_curve(self, capsys):
        code, out, _ = run(capsys, "risk", *MODEL, "--curve", "5", "--c-max", "8")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert [float(r["C"]) for r in rows] == [0, 2, 4, 6, 8]

    def test_default_is_determined_cut(self, capsys):
        _, out, _ = run(capsys, "risk", *MODEL)
        (row,) = csv.DictReader(io.StringIO(out))
        assert float(row["C"]) == pytest.approx(2.72474, abs=1e-5)

    def test_c_and_curve_exclusive(self, capsys):
        code, _, _ = run(capsys, "risk", *MODEL, "--c", "1", "--curve", "3")
        assert code == 2


class TestRun:
    def test_end_to_end(self, capsys, tmp_path):
        out = tmp_path / "out.csv"
        code, _, _ = run(capsys, "run", "--config", str(write_config(tmp_path / "c.json")), "--out", str(out), "--seed", "9")
        assert code == 0
        rows = list(csv.DictReader(out.open(encoding="utf-8")))
        assert [r["method"] for r in rows] == ["T1", "algorithm", "ideal"]

    def test_reps_override_and_seed_env(self, capsys, tmp_path, monkeypatch):
        config = write_config(tmp_path / "c.json")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        monkeypatch.setenv("EQUICORR_SEED", "31")
        assert run(capsys, "run", "--config", str(config), "--out", str(a), "--reps", "7")[0] == 0
        assert run(capsys, "run", "--config", str(config), "--out", str(b), "--reps", "7", "--seed", "31")[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_rho_names_range(self, capsys, tmp_path):
        config = write_config(tmp_path / "c.json", rho=-0.2)
        code, _, err = run(capsys, "run", "--config", str(config), "--out", str(tmp_path / "o.csv"))
        assert code != 0
        assert "rho" in err and "-1/(m-1)" in err

    def test_unreadable_config(self, capsys, tmp_path):
        code, _, err = run(capsys, "run", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o.csv"))
        assert code != 0 and "none.json" in err

    def test_unknown_flag(self, capsys, tmp_path):
        code, _, err = run(capsys, "run", "--config", "x.json", "--out", "y.csv", "--bogus")
        assert code != 0 and "--bogus" in err


def test_reproduce_tables_small(capsys, tmp_path):
    code, out, _ = run(capsys, "reproduce-tables", "--out", str(tmp_path), "--reps", "2", "--grid-points", "50")
    assert code == 0
    assert [line.rsplit("/", 1)[-1] for line in out.split()] == ["total_error.csv", "tables.csv", "discrepancy.csv"]
    wide = list(csv.DictReader((tmp_path / "tables.csv").open(encoding="utf-8")))
    assert len(wide) == 64


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "equicorr", "threshold", "--method", "determined", *MODEL],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "2.72474"
