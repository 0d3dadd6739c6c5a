import json
import subprocess
import sys

import numpy as np
import pytest

from vndarboux.cli import main, parse_complex
from vndarboux.dynamics import spin1_matrices
from vndarboux.linalg import load_matrix, matrix_to_json
from vndarboux.seeds import example3x3


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


# -- complex grammar ---------------------------------------------------------------

@pytest.mark.parametrize(
    "text,value",
    [("i", 1j), ("-i", -1j), ("+i", 1j), ("2", 2), ("-2.5i", -2.5j), ("0.5+i", 0.5 + 1j),
     ("1e-3-2i", 1e-3 - 2j), ("3 + 4i", 3 + 4j), ("1.5j", 1.5j), (".5-.25i", 0.5 - 0.25j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "1+", "i2", "1 2i", "abc", "nan", "inf+i", "1e999i", "2i3"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValueError):
        parse_complex(text)


# -- simulate ----------------------------------------------------------------------

@pytest.fixture
def fixture_files(tmp_path):
    assert main(["-q", "reproduce", "--target", "fixture", "--out", str(tmp_path / "fx")]) == 0
    return tmp_path / "fx.A.json", tmp_path / "fx.rho0.json"


def test_simulate_matches_closed_form(fixture_files, tmp_path):
    a_path, rho_path = fixture_files
    out = tmp_path / "sim.csv"
    rc = main(["-q", "simulate", "--n", "1", "--a", str(a_path), "--rho0", str(rho_path),
               "--t0", "0", "--t1", "10", "--dt", "1e-3", "--store-every", "100", "--out", str(out)])
    assert rc == 0
    header, data = read_csv(out)
    assert header == ["t", "Jx", "Jy", "Jz", "tr_rho1", "tr_rho2", "tr_rho3"]
    ex = example3x3()
    jz = spin1_matrices()[2]
    closed = [np.trace(jz @ ex.rho_xy(t)).real for t in data[:, 0]]
    assert np.max(np.abs(data[:, 3] - closed)) < 1e-6
    assert np.max(np.abs(data[:, 5] - 5 / 9)) < 1e-12


def test_simulate_is_deterministic(fixture_files, tmp_path):
    a_path, rho_path = fixture_files
    outs = []
    for name in ("a.csv", "b.csv"):
        outs.append(tmp_path / name)
        assert main(["-q", "simulate", "--a", str(a_path), "--rho0", str(rho_path), "--t1", "0.5",
                     "--mode", "full", "--out", str(outs[-1])]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_simulate_commuting_state_is_constant(tmp_path):
    a = tmp_path / "a.json"
    r = tmp_path / "r.json"
    a.write_text(json.dumps(matrix_to_json(np.diag([1.0, 2.0, -1.0]))))
    r.write_text(json.dumps(matrix_to_json(np.diag([0.2, 0.3, 0.5]))))
    out = tmp_path / "s.csv"
    assert main(["-q", "simulate", "--a", str(a), "--rho0", str(r), "--t1", "1", "--dt", "0.01",
                 "--mode", "full", "--out", str(out)]) == 0
    _, data = read_csv(out)
    assert np.all(np.ptp(data[:, 1:], axis=0) == 0)


def test_simulate_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2, "entries": [[[1, 0]')
    rc = main(["simulate", "--a", str(bad), "--rho0", str(bad), "--out", str(tmp_path / "x.csv")])
    assert rc != 0
    assert "invalid JSON" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_simulate_density_gate(tmp_path, capsys):
    a = tmp_path / "a.json"
    a.write_text(json.dumps(matrix_to_json(np.eye(2))))
    r = tmp_path / "r.json"
    r.write_text(json.dumps(matrix_to_json(np.diag([2.0, -1.0]))))
    assert main(["simulate", "--a", str(a), "--rho0", str(r), "--out", str(tmp_path / "x.csv")]) == 1
    assert "negative eigenvalue" in capsys.readouterr().err
    assert main(["-q", "simulate", "--gate", "hermitian", "--a", str(a), "--rho0", str(r), "--t1", "0.1",
                 "--out", str(tmp_path / "x.csv")]) == 0


@pytest.mark.parametrize("grid", [["--dt", "0"], ["--t0", "1", "--t1", "0"], ["--dt", "nan"]])
def test_simulate_bad_grid(grid, tmp_path):
    assert main(["-q", "simulate", "--example", "3x3", *grid, "--out", str(tmp_path / "x.csv")]) == 2


def test_bad_mu_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["darboux", "--mu", "1+", "--out", str(tmp_path / "x")])
    assert info.value.code == 2


# -- darboux -----------------------------------------------------------------------

def test_darboux_3x3_spectrum(tmp_path):
    out = tmp_path / "d"
    assert main(["-q", "darboux", "--example", "3x3", "--mu", "i", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "d.json").read_text())
    assert np.allclose(rep["spectrum"]["initial"], [0, 1 / 3, 2 / 3], atol=1e-12)
    assert rep["equation_residual"] < 1e-6
    assert rep["normalisation"]["Y"] == pytest.approx(np.sqrt(2) / 3)
    assert rep["similarity_rate_max"] > 0
    assert all(rep["gates"].values())
    header, data = read_csv(tmp_path / "d.csv")
    assert header[:3] == ["t", "re_00", "im_00"] and data.shape == (201, 19)


def test_darboux_real_mu_warns_trivial(tmp_path, capsys):
    out = tmp_path / "d"
    assert main(["darboux", "--mu", "2", "--t0", "-1", "--t1", "1", "--out", str(out)]) == 0
    assert "trivial transformation" in capsys.readouterr().err
    rep = json.loads((tmp_path / "d.json").read_text())
    assert rep["meta"]["trivial"] and rep["normalisation"] is None
    _, data = read_csv(tmp_path / "d.csv")
    ex = example3x3()
    m = data[0, 1::2] + 1j * data[0, 2::2]
    assert np.allclose(m.reshape(3, 3), ex.seed.solution(-1.0), atol=1e-15)


def test_darboux_8x8(tmp_path):
    assert main(["-q", "darboux", "--example", "8x8", "--out", str(tmp_path / "d")]) == 0
    rep = json.loads((tmp_path / "d.json").read_text())
    assert np.allclose(rep["spectrum"]["initial"], [0, 0, .125, .125, .125, .125, .25, .25], atol=1e-12)


def _bundle(tmp_path, phi):
    ex = example3x3()
    path = tmp_path / "bundle.json"
    path.write_text(json.dumps({"h": matrix_to_json(ex.h), "xi0": matrix_to_json(ex.xi0), "a": 1.0,
                                "phi0": [[float(x.real), float(x.imag)] for x in phi]}))
    return path


def test_darboux_refuses_delta_eigenvector(tmp_path, capsys):
    path = _bundle(tmp_path, example3x3().phi1)
    rc = main(["darboux", "--bundle", str(path), "--out", str(tmp_path / "d")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "delta_eigenvector" in err and "time-independent" in err
    assert not (tmp_path / "d.csv").exists()


def test_darboux_bundle(tmp_path):
    path = _bundle(tmp_path, example3x3().phi0)
    assert main(["-q", "darboux", "--bundle", str(path), "--out", str(tmp_path / "d")]) == 0


def test_darboux_generic_mu_refused(tmp_path, capsys):
    assert main(["darboux", "--mu", "0.5+2i", "--out", str(tmp_path / "d")]) == 2
    assert "lax_eigenpair" in capsys.readouterr().err


# -- reproduce ---------------------------------------------------------------------

def test_reproduce_fig1_fig2(tmp_path):
    amps = {}
    for target in ("fig1", "fig2"):
        out = tmp_path / f"{target}.csv"
        assert main(["-q", "reproduce", "--target", target, "--out", str(out)]) == 0
        header, data = read_csv(out)
        assert header == ["t", "Jx", "Jy"]
        amps[target] = json.loads((tmp_path / f"{target}.csv.json").read_text())
    assert amps["fig1"]["envelope_trend"] == -1 and amps["fig2"]["envelope_trend"] == 1
    ratio = amps["fig1"]["amplitude"] / amps["fig2"]["amplitude"]
    assert 1e21 <= ratio <= 1e23


def test_reproduce_fig3(tmp_path):
    out = tmp_path / "f3.csv"
    assert main(["-q", "reproduce", "--target", "fig3", "--out", str(out)]) == 0
    header, _ = read_csv(out)
    assert header == ["t", "Jz", "Jz_plus_fit", "Jz_minus_fit"]
    summary = json.loads((tmp_path / "f3.csv.json").read_text())
    assert summary["separation"] > 10


def test_reproduce_matrix_3x3(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["-q", "reproduce", "--target", "matrix", "--times", "0,1", "--out", str(out)]) == 0
    _, data = read_csv(out)
    m = (data[1, 1::2] + 1j * data[1, 2::2]).reshape(3, 3)
    assert np.allclose(m, example3x3().rho_xy(1.0), atol=1e-15)


def test_reproduce_8x8_matrix_report(tmp_path):
    out = tmp_path / "m8.csv"
    assert main(["-q", "reproduce", "--example", "8x8", "--target", "matrix", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "m8.csv.json").read_text())
    assert rep["entries_within_1e-12"] == [64, 64, 64, 64] and rep["passed"]


def test_reproduce_8x8_fixture_round_trip(tmp_path):
    assert main(["-q", "reproduce", "--example", "8x8", "--target", "fixture", "--out", str(tmp_path / "f")]) == 0
    rho0 = load_matrix(tmp_path / "f.rho0.json")
    assert np.trace(rho0).real == pytest.approx(1.0)


def test_reproduce_unknown_target(tmp_path):
    with pytest.raises(SystemExit):
        main(["reproduce", "--target", "fig9", "--out", str(tmp_path / "x")])
    assert main(["-q", "reproduce", "--example", "8x8", "--target", "fig1", "--out", str(tmp_path / "x")]) == 2


# -- verify and w-report -------------------------------------------------------------

def test_verify_theorem1(tmp_path):
    out = tmp_path / "v.json"
    assert main(["-q", "verify", "--suite", "theorem1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"]


def test_verify_fault_injection(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "theorem1", "--inject-fault", "corrupt-P", "--out", str(out)]) == 1
    doc = json.loads(out.read_text())
    assert not doc["passed"]
    assert "first failing step: LP1a" in capsys.readouterr().err


def test_verify_examples_json_to_stdout(capsys):
    assert main(["-q", "verify", "--suite", "examples"]) == 0
    doc = json.loads(capsys.readouterr().out)
    names = [c["name"] for c in doc["suites"][0]["checks"]]
    assert sum(n.startswith("8x8:64_entries") for n in names) == 4


def test_w_report(tmp_path):
    out = tmp_path / "w.json"
    assert main(["-q", "w-report", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["a"] == pytest.approx(3.0, rel=1e-6)
    assert rep["k1_fit"]["pass"]


def test_w_report_from_csv(tmp_path):
    traj = tmp_path / "m.csv"
    times = ",".join(f"{t:.2f}" for t in np.linspace(-8, 8, 801))
    assert main(["-q", "reproduce", "--target", "matrix", f"--times={times}", "--out", str(traj)]) == 0
    assert main(["-q", "reproduce", "--target", "fixture", "--out", str(tmp_path / "fx")]) == 0
    out = tmp_path / "w.json"
    assert main(["-q", "w-report", "--traj", str(traj), "--a", str(tmp_path / "fx.A.json"), "--out", str(out)]) == 0
    assert main(["-q", "w-report", "--traj", str(traj), "--out", str(out)]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vndarboux", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "vndarboux" in proc.stdout
