import csv
import json

import pytest

from desitter_lab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_clifford_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "--suite", "clifford", "--seed", "7")
    code2, out2, _ = run(capsys, "verify", "--suite", "clifford", "--seed", "7")
    assert code1 == code2 == 0 and out1 == out2
    reports = [json.loads(line) for line in out1.splitlines()]
    assert reports and all(r["status"] == "pass" for r in reports)
    assert all(r["runtime_ms"] is None for r in reports)
    assert {"suite", "name", "anchor", "residual", "tolerance", "status", "runtime_ms"} <= set(reports[0])


def test_verify_algebra_reports(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "algebra")
    reports = [json.loads(line) for line in out.splitlines()]
    commutators = [r for r in reports if r["name"].startswith("commutator[")]
    assert len(commutators) == 45
    assert code == 0
    assert {r["status"] for r in commutators} == {"pass", "warn"}


def test_strict_mode_turns_warnings_into_failures(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "algebra", "--strict-literal")
    assert code == 1
    assert any(json.loads(line)["status"] == "fail" for line in out.splitlines())


def test_verify_komar_mass_report(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "komar", "--m", "1", "--radius", "10", "--stokes-n", "8")
    assert code == 0
    rep = {json.loads(line)["name"]: json.loads(line) for line in out.splitlines()}
    assert rep["komar-mass"]["residual"] <= 1e-6


def test_tolerance_override_from_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# tighter than achievable\ntolerance.associativity = 0\nseed = 3\n")
    code, out, _ = run(capsys, "verify", "--suite", "clifford", "--config", str(cfg))
    rep = {json.loads(line)["name"]: json.loads(line) for line in out.splitlines()}
    assert rep["associativity"]["tolerance"] == 0.0
    assert code == (1 if rep["associativity"]["residual"] > 0 else 0)


def test_tolerance_override_hyphenated_name(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tolerance.killing-residuals = 1e-3\nstokes-n = 8\n")
    code, out, _ = run(capsys, "verify", "--suite", "geometry", "--config", str(cfg))
    rep = {json.loads(line)["name"]: json.loads(line) for line in out.splitlines()}
    assert code == 0 and rep["killing-residuals"]["tolerance"] == 1e-3


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("ell = 2.5\nm = 3\n")
    args = cli.build_parser().parse_args(["komar-mass", "--config", str(cfg), "--m", "4"])
    resolved = cli.resolve(args)
    assert resolved["ell"] == 2.5 and resolved["m"] == 4.0 and resolved["radius"] == 10.0


@pytest.mark.parametrize("text", ["bogus = 1\n", "ell = abc\n", "ell = -1\n", "strict_literal = maybe\n"])
def test_bad_config_exit_2(tmp_path, capsys, text):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text)
    code, _, err = run(capsys, "verify", "--suite", "clifford", "--config", str(cfg))
    assert code == 2 and err.startswith("error:")


def test_missing_config_and_unknown_suite(capsys):
    assert run(capsys, "verify", "--config", "/nonexistent.cfg")[0] == 2
    assert run(capsys, "verify", "--suite", "nope")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_threads_do_not_change_output(capsys, monkeypatch):
    _, serial, _ = run(capsys, "verify", "--suite", "clifford")
    monkeypatch.setenv("DESITTER_LAB_THREADS", "3")
    _, threaded, _ = run(capsys, "verify", "--suite", "clifford")
    assert serial == threaded


def test_komar_mass_command(capsys):
    code, out, _ = run(capsys, "komar-mass", "--metric", "schwarzschild", "--m", "1", "--radius", "10", "--grid", "64")
    rec = json.loads(out)
    assert code == 0 and abs(rec["energy"] - 1.0) < 1e-6
    assert rec["orientation"] == "outward-future" and rec["refinement_error"] < 1e-7


def test_komar_mass_inside_horizon(capsys):
    assert run(capsys, "komar-mass", "--m", "1", "--radius", "1.5")[0] == 2


def test_det_map(tmp_path, capsys):
    path = tmp_path / "det.csv"
    assert run(capsys, "det-map", "--out", str(path))[0] == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 121 * 121
    row = next(r for r in rows if float(r["t"]) == 2.0 and float(r["x1"]) == 0.0)
    assert abs(float(row["det"])) < 1e-12
    assert max(abs(float(r["det"]) - float(r["closed_form_derived"])) for r in rows) < 1e-12


def test_det_map_other_ell(tmp_path, capsys):
    path = tmp_path / "det.csv"
    assert run(capsys, "det-map", "--ell", "2", "--n", "5", "--out", str(path))[0] == 0
    rows = list(csv.DictReader(path.open()))
    assert rows[0]["closed_form"] == "nan"


@pytest.mark.parametrize("argv", [["--t-min", "1", "--t-max", "1"], ["--x-min", "2", "--x-max", "-2"], ["--n", "1"]])
def test_det_map_empty_bounds(capsys, argv):
    assert run(capsys, "det-map", *argv)[0] == 2


def test_geodesic_and_constrained(tmp_path, capsys):
    code, out, _ = run(capsys, "geodesic", "--x0", "0,0.5,0,0", "--s-max", "1", "--h", "0.01",
                       "--compare-constrained", "--out-dir", str(tmp_path))
    assert code == 0
    geo, con = (json.loads(line) for line in out.splitlines())
    assert geo["norm_drift"] < 1e-8 and max(geo["charge_drift"]) < 1e-8
    assert con["final_separation"] > 1e-3
    assert (tmp_path / "geodesic.csv").exists() and (tmp_path / "separation.csv").exists()


def test_geodesic_benchmark_summary(tmp_path, capsys):
    code, out, _ = run(capsys, "geodesic", "--out-dir", str(tmp_path), "--log-every", "100")
    rec = json.loads(out)
    assert code == 0 and rec["norm_drift"] < 1e-8 and max(rec["charge_drift"]) < 1e-8


def test_minkowski_geodesic(tmp_path, capsys):
    code, out, _ = run(capsys, "geodesic", "--chart", "minkowski", "--x0", "0,1,2,3", "--out-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["norm_drift"] < 1e-12


def test_domain_exit_is_a_warning(tmp_path, capsys):
    code, out, _ = run(capsys, "geodesic", "--chart", "schwarzschild", "--x0", "0,3,1.5707963,0", "--u0", "2,-0.3,0,0",
                       "--s-max", "20", "--h", "0.01", "--out-dir", str(tmp_path))
    rec = json.loads(out)
    assert code == 0 and rec["status"] == "warn" and len(rec["exit_point"]) == 4


@pytest.mark.parametrize("argv", [["--u0", "0,1,0,0"], ["--x0", "1,2"], ["--h", "0"], ["--chart", "kerr"],
                                  ["--x0", "2,0,0,0"]])
def test_bad_trajectory_input(tmp_path, capsys, argv):
    assert run(capsys, "geodesic", "--out-dir", str(tmp_path), *argv)[0] == 2


def test_constrained_needs_desitter(tmp_path, capsys):
    assert run(capsys, "constrained", "--chart", "minkowski", "--out-dir", str(tmp_path))[0] == 2


def test_algebra_report(capsys):
    code, out, _ = run(capsys, "algebra-report")
    rep = json.loads(out)
    assert code == 0 and len(rep["commutators"]) == 45
    assert rep["mismatches"] == 12 and rep["jacobi_defects_computed"] == 0
    assert rep["casimirs"]["vector"]["I1_central"] and rep["casimirs"]["adjoint"]["I2_nonzero"]
    assert rep["contraction"]["ratio_law"]
