import json
import subprocess
import sys

import numpy as np
import pytest

from tomokit import FockSuperposition, TomographyFrame, cm_tomogram, make_state
from tomokit.cli import CliError, main, parse_clusters, parse_grid
from tomokit.separable import SeparableDecomposition


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name in ("ent", "sep", "W"):
        p = tmp_path / f"{name}.json"
        p.write_text(make_state(name).dumps())
        paths[name] = p
    one = FockSuperposition.basis((1,))
    vac = FockSuperposition.basis((0,))
    d = SeparableDecomposition((0.5, 0.5), ((vac, one), (one, vac)))
    paths["mix"] = tmp_path / "mix.json"
    paths["mix"].write_text(json.dumps(d.to_json_dict()))
    paths["one"] = tmp_path / "one.json"
    paths["one"].write_text(one.dumps())
    return paths


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    lines = text.split("\n")
    assert lines[-1] == ""
    header = lines[0].split(",")
    return header, np.array([[float(v) for v in ln.split(",")] for ln in lines[1:-1]])


def test_parse_grid():
    g = parse_grid("-5:5:101")
    assert (g.lo, g.hi, g.count) == (-5.0, 5.0, 101)
    assert g.values()[50] == 0.0
    for bad in ("1:0:5", "0:1:1", "0:1:100001", "0:1", "a:1:3", "0:1:2.5"):
        with pytest.raises(CliError):
            parse_grid(bad)


def test_parse_clusters():
    assert parse_clusters("1,2|3") == ((0, 1), (2,))
    with pytest.raises(CliError):
        parse_clusters("0|1")
    with pytest.raises(CliError):
        parse_clusters("1;2")


def test_eval_cm_example(capsys, files):
    code, out, _ = _run(capsys, "eval-cm", "--state", files["ent"], "--mu", "1,1", "--nu", "0,0", "--grid", "-5:5:101")
    assert code == 0
    header, data = _csv(out)
    assert header == ["X", "w"]
    assert data.shape == (101, 2)
    row = data[np.argmin(np.abs(data[:, 0] - 1.0))]
    assert row[1] == pytest.approx(0.241971, abs=1e-6)


def test_csv_uses_17_significant_digits(capsys, files):
    _, out, _ = _run(capsys, "eval-cm", "--state", files["ent"], "--mu", "1,1", "--nu", "0,0", "--grid", "0:1:2")
    expected = cm_tomogram(make_state("ent"), 1.0, TomographyFrame((1.0, 1.0), (0.0, 0.0)))
    assert out.split("\n")[2] == "1," + format(expected, ".17g")
    assert "\r" not in out


def test_evolve_harmonic_is_stationary(capsys, files):
    args = ["--state", files["ent"], "--mu", "1,1", "--nu", "0,0", "--grid", "-5:5:101"]
    _, base, _ = _run(capsys, "eval-cm", *args)
    code, evolved, _ = _run(capsys, "evolve", "--kind", "harmonic", "--t", "1.3", *args)
    assert code == 0
    assert np.max(np.abs(_csv(base)[1] - _csv(evolved)[1])) < 1e-10


def test_evolve_inverted_and_literal_differ(capsys, files):
    args = ["--state", files["ent"], "--mu", "1,0.5", "--nu", "0.2,-0.3", "--grid", "-5:5:11", "--kind", "inverted", "--t", "0.7"]
    _, a, _ = _run(capsys, "evolve", *args)
    _, b, _ = _run(capsys, "evolve", *args, "--literal")
    assert a != b


def test_evolve_targets(capsys, files):
    code, out, _ = _run(capsys, "evolve", "--state", files["W"], "--mu", "1,1,1", "--nu", "0,0,0", "--kind",
                        "harmonic", "--t", "0.5", "--target", "cluster", "--clusters", "1,2|3", "--grid", "-2:2:5")
    assert code == 0 and out.startswith("X,X3,w\n")
    code, out, _ = _run(capsys, "evolve", "--state", files["ent"], "--mu", "1,1", "--nu", "0,0", "--kind",
                        "harmonic", "--t", "0.5", "--target", "symplectic", "--grid", "-2:2:5", "--format", "json")
    doc = json.loads(out)
    assert doc["kind"] == "symplectic" and doc["meta"]["evolution"] == "harmonic"


def test_eval_symplectic(capsys, files):
    code, out, _ = _run(capsys, "eval-symplectic", "--state", files["ent"], "--mu", "1,1", "--nu", "0,0",
                        "--grid", "-1:1:3", "--grid", "0:1:2")
    assert code == 0
    header, data = _csv(out)
    assert header == ["X1", "X2", "w"] and data.shape == (6, 3)
    assert data[-1, 2] == pytest.approx(4 / np.pi * np.exp(-2), rel=1e-14)
    code, _, err = _run(capsys, "eval-symplectic", "--state", files["ent"], "--mu", "1,1", "--nu", "0,0",
                        "--grid", "-1:1:3", "--grid", "0:1:2", "--grid", "0:1:2")
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_decomposition_input(capsys, files):
    code, out, _ = _run(capsys, "eval-symplectic", "--decomposition", files["mix"], "--mu", "1,1", "--nu", "0,0",
                        "--grid", "-1:1:3")
    assert code == 0
    data = _csv(out)[1]
    assert data[4, 2] == 0.0  # origin
    code, out, _ = _run(capsys, "eval-cm", "--decomposition", files["mix"], "--mu", "1,1", "--nu", "0,0", "--grid", "-1:1:3")
    assert code == 0
    assert _csv(out)[1][1, 1] == pytest.approx(1 / np.sqrt(8 * np.pi), rel=1e-12)


def test_eval_cluster(capsys, files):
    code, out, _ = _run(capsys, "eval-cluster", "--state", files["W"], "--mu", "1,1,1", "--nu", "0,0,0",
                        "--clusters", "1,2|3", "--grid", "-1:1:3", "--grid", "-1:1:3")
    assert code == 0
    header, data = _csv(out)
    assert header == ["X", "X3", "w"]
    row = data[(data[:, 0] == 1.0) & (data[:, 1] == 0.0)][0]
    assert row[2] == pytest.approx(0.0910116, abs=1e-7)


def test_marginal_and_json(capsys, files):
    code, out, _ = _run(capsys, "marginal", "--state", files["ent"], "--mode", "1", "--mu", "1", "--nu", "0",
                        "--grid", "-1:1:3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "marginal" and doc["values"][1] == pytest.approx(0.282095, abs=1e-6)
    code, _, err = _run(capsys, "marginal", "--state", files["ent"], "--mode", "3", "--mu", "1", "--nu", "0",
                        "--grid", "-1:1:3")
    assert code == 2


def test_sample_table_round_trip(capsys, files, tmp_path):
    samples = tmp_path / "samples.csv"
    code, _, _ = _run(capsys, "marginal", "--state", files["one"], "--mode", "1", "--mu-grid", "-6:6:41",
                      "--nu-grid", "-6:6:41", "--grid", "-40:40:801", "--out", samples)
    assert code == 0
    assert samples.read_text().startswith("mu,nu,X,w\n")
    code, out, _ = _run(capsys, "reconstruct", "--samples", samples, "--cutoff", "3")
    doc = json.loads(out)
    assert code == 0
    assert doc["re"][1][1] == pytest.approx(1.0, abs=1e-3)
    assert abs(doc["trace"] - 1.0) < 1e-3


def test_reconstruct_from_state(capsys, files, tmp_path):
    out_path = tmp_path / "rho.json"
    code, _, _ = _run(capsys, "reconstruct", "--state", files["ent"], "--mode", "2", "--cutoff", "3", "--psd",
                      "--out", out_path)
    assert code == 0
    doc = json.loads(out_path.read_text())
    np.testing.assert_allclose(np.diag(doc["re"])[:2], [0.5, 0.5], atol=1e-3)
    assert doc["psd"] is True


def test_verify_subset(capsys, tmp_path):
    report = tmp_path / "report.json"
    code, _, err = _run(capsys, "verify", "--seed", "7", "--criteria", "2,9", "--out", report)
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["passed"] and [s["criterion"] for s in doc["suites"]] == [2, 9]
    assert "PASS" in err


def test_verify_failure_exit_code(capsys, monkeypatch):
    from tomokit import verification

    failing = verification.SuiteResult(9, "forced", False, 1.0, 0.0, 0.0)
    monkeypatch.setitem(verification.SUITES, 9, lambda rng: failing)
    code, out, _ = _run(capsys, "verify", "--criteria", "9")
    assert code == 4
    assert json.loads(out)["passed"] is False


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["eval-cm"],
        ["eval-cm", "--state", "nope.json", "--mu", "1", "--nu", "0", "--grid", "0:1:3"],
        ["verify", "--criteria", "99"],
        ["verify", "--criteria", "x"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 2


def test_invalid_state_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"modes": 1, "terms": [{"re": 0.5, "im": 0, "occ": [0]}]}')
    code, _, err = _run(capsys, "eval-cm", "--state", bad, "--mu", "1", "--nu", "0", "--grid", "0:1:3")
    assert code == 2
    assert json.loads(err)["error"] == "InvalidStateError"


def test_degenerate_frame_exits_2(capsys, files):
    code, _, err = _run(capsys, "eval-cm", "--state", files["ent"], "--mu", "0,0", "--nu", "0,0", "--grid", "0:1:3")
    assert code == 2
    assert json.loads(err)["error"] == "DegenerateFrameError"


def test_nonconvergence_exits_3(capsys, files, tmp_path):
    high = tmp_path / "high.json"
    high.write_text(FockSuperposition.basis((6,)).dumps())
    code, _, err = _run(capsys, "reconstruct", "--state", high, "--cutoff", "1")
    assert code == 3
    assert json.loads(err)["error"] == "non_convergence"


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "tomokit", "eval-cm", "--state", str(files["sep"]), "--mu", "1,1", "--nu", "0,0",
         "--grid", "-1:1:3"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.startswith("X,w\n")
    assert float(proc.stdout.split("\n")[2].split(",")[1]) == pytest.approx(1 / np.sqrt(8 * np.pi), rel=1e-15)
