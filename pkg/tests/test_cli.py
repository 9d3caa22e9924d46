import json
import subprocess
import sys

import numpy as np
import pytest

from tubemeasure.cli import main
from tubemeasure.geom import PointCloud, write_points
from tubemeasure.oracles import sample_polygon, sample_segment


@pytest.fixture
def singleton(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("0.25 0.75\n")
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_boundary_singleton(singleton, capsys):
    code, out, _ = run(["boundary", "--input", singleton, "--r", "0.4", "--n", "500"], capsys)
    assert code == 0
    data = json.loads(out)
    assert [a["w"] for a in data["atoms"]] == [1.0]
    assert data["metadata"]["N"] == 500 and "run" in data


def test_boundary_eps_rule(tmp_path, capsys):
    # ten far-apart points: the covering number at any small scale is 10
    path = tmp_path / "ten.txt"
    write_points(PointCloud(np.c_[np.arange(10.0), np.zeros(10)]), path)
    code, out, _ = run(["boundary", "--input", str(path), "--r", "0.1", "--eps", "0.1",
                        "--confidence", "0.99", "--no-meta"], capsys)
    assert code == 0
    meta = json.loads(out)["metadata"]
    assert meta["covering_number"] == 10 and meta["N"] == 11211


def test_boundary_segment_endpoints(tmp_path, capsys):
    path = tmp_path / "seg.txt"
    write_points(sample_segment((0, 0), (1, 0), 200), path)
    code, out, _ = run(["boundary", "--input", str(path), "--r", "0.2", "--n", "200000",
                        "--seed", "3", "--no-meta"], capsys)
    assert code == 0
    data = json.loads(out)
    vol = data["metadata"]["offset_volume"]
    ends = [data["atoms"][0]["w"] * vol, data["atoms"][-1]["w"] * vol]
    # half disk plus a half-spacing strip
    expected = np.pi * 0.04 / 2 + 0.4 * 0.5 / 199
    assert ends == pytest.approx([expected] * 2, rel=0.05)


def test_input_errors(tmp_path, singleton, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3\n")
    code, _, err = run(["boundary", "--input", str(bad), "--r", "0.1", "--n", "10"], capsys)
    assert code == 2 and "line 2" in err
    code, _, _ = run(["boundary", "--input", str(tmp_path / "missing"), "--r", "0.1", "--n", "10"], capsys)
    assert code == 2
    code, _, err = run(["boundary", "--input", singleton, "--r", "0.1", "--n", "10", "--eps", "0.1"],
                       capsys)
    assert code == 3
    code, _, err = run(["boundary", "--input", singleton, "--r", "-1", "--n", "10"], capsys)
    assert code == 3 and "--r" in err
    code, _, err = run(["boundary", "--input", singleton, "--bogus"], capsys)
    assert code == 3


def test_curvature_commands(tmp_path, singleton, capsys):
    code, out, _ = run(["curvature", "--input", singleton, "--radii", "0.05,0.1,0.2",
                        "--n-per-radius", "1000", "--no-meta"], capsys)
    assert code == 0
    phi0 = json.loads(out)["profiles"][0]["atoms"][0]["w"]
    assert phi0 == pytest.approx(1.0, abs=1e-9)
    code, _, err = run(["curvature", "--input", singleton, "--radii", "0.1,0.1,0.2",
                        "--n-per-radius", "10"], capsys)
    assert code == 3 and "--radii" in err
    code, _, _ = run(["curvature", "--input", singleton, "--radii", "1,1.0000001,1.0000002",
                      "--n-per-radius", "10"], capsys)
    assert code == 4


@pytest.mark.slow
def test_curvature_square(tmp_path, capsys):
    path = tmp_path / "square.txt"
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    write_points(sample_polygon(sq, 0.01, 0.04), path)
    code, out, _ = run(["curvature", "--input", str(path), "--radii", "0.05,0.1,0.2",
                        "--n-per-radius", "300000", "--seed", "7", "--no-meta"], capsys)
    assert code == 0
    atoms = json.loads(out)["profiles"][0]["atoms"]
    for corner in sq:
        near = sum(a["w"] for a in atoms if np.hypot(a["x"][0] - corner[0], a["x"][1] - corner[1]) <= 0.05)
        assert near == pytest.approx(0.25, abs=0.08)


def test_stability_and_knife(tmp_path, capsys):
    path = tmp_path / "cloud.txt"
    write_points(PointCloud(np.random.default_rng(0).random((30, 2))), path)
    code, out, _ = run(["stability", "--input", str(path), "--r", "0.3", "--eps", "0.02,0.01",
                        "--n", "5000"], capsys)
    assert code == 0 and out.splitlines()[0] == "eps,dist,ratio,stderr,bound"
    code, _, err = run(["stability", "--input", str(path), "--r", "0.3", "--eps", "0.5",
                        "--n", "100"], capsys)
    assert code == 3 and "min(diam, r, r^2/diam)" in err
    report = tmp_path / "knife.json"
    code, out, _ = run(["knife", "--n", "20000", "--json", str(report), "--no-meta"], capsys)
    assert code == 0 and len(out.splitlines()) == 5
    assert 0.4 <= json.loads(report.read_text())["fitted_slope"] <= 0.6


def test_check_suites(capsys):
    code, out, _ = run(["check", "--suite", "convexity", "--trials", "300"], capsys)
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(["check", "--suite", "area", "--trials", "3", "--samples", "2000"], capsys)
    assert code == 0


def test_check_failure_exit_code(tmp_path, monkeypatch, capsys):
    import tubemeasure.cli as cli
    from tubemeasure.experiments import BoundCheck

    path = tmp_path / "pair.txt"
    path.write_text("0 0\n5 0\n")
    code, out, _ = run(["check", "--suite", "area", "--input", str(path), "--r", "1",
                        "--trials", "2", "--samples", "1000"], capsys)
    assert code == 0 and json.loads(out)["failures"] == 0
    monkeypatch.setattr(cli, "boundary_area_check", lambda *a, **k: BoundCheck(2.0, 1.0, 0.0, False))
    code, out, _ = run(["check", "--suite", "area", "--input", str(path), "--r", "1",
                        "--trials", "2"], capsys)
    assert code == 5 and json.loads(out)["failures"] == 2


def test_seed_from_environment(singleton, monkeypatch, capsys):
    monkeypatch.setenv("TUBEMEASURE_SEED", "42")
    code, out, _ = run(["boundary", "--input", singleton, "--r", "0.4", "--n", "10", "--no-meta"], capsys)
    assert json.loads(out)["metadata"]["seed"] == 42
    monkeypatch.setenv("TUBEMEASURE_SEED", "x")
    assert main(["boundary", "--input", singleton, "--r", "0.4", "--n", "10"]) == 3


def test_module_entry_point(singleton):
    res = subprocess.run([sys.executable, "-m", "tubemeasure", "boundary", "--input", singleton,
                          "--r", "0.4", "--n", "10", "--no-meta"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["metadata"]["N"] == 10
