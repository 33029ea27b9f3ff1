import json
import math

import numpy as np
import pytest

from depbound.cli import main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def pareto_file(tmp_path):
    return _write(tmp_path / "m.json", {"marginals": [{"family": "pareto", "params": {"scale": 1, "theta": 2 + i}} for i in range(3)]})


@pytest.fixture
def crew_file(tmp_path, crew):
    path = tmp_path / "crew.csv"
    np.savetxt(path, crew, delimiter=",", fmt="%g")
    return str(path)


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_happy_path(capsys, pareto_file):
    code, out, _ = run(capsys, "bound", "--model", pareto_file, "--level", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "depbound/1"
    assert len(doc["beta"]) == 4 and math.isfinite(doc["value"])


def test_malformed_model(capsys, tmp_path):
    bad = _write(tmp_path / "bad.json", [{"family": "pareto", "params": {"scle": 1, "theta": 3}}])
    code, _, err = run(capsys, "bound", "--model", bad, "--level", "0")
    assert code == 2
    assert "scle" in json.loads(err)["message"]


def test_broken_json(capsys, tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    code, _, _ = run(capsys, "bound", "--model", str(path))
    assert code == 2


def test_missing_model(capsys):
    code, _, _ = run(capsys, "bound")
    assert code == 2


def test_ra_matrix(capsys, crew_file, tmp_path):
    out_path = tmp_path / "ra.csv"
    code, out, _ = run(capsys, "ra", "--matrix", crew_file, "--objective", "minmax", "--matrix-out", str(out_path))
    assert code == 0
    assert json.loads(out)["interval"]["upper"] == 159.0
    assert out_path.read_text().startswith("col1,col2,col3")


def test_schedule(capsys, crew_file):
    code, out, _ = run(capsys, "schedule", "--matrix", crew_file)
    doc = json.loads(out)
    assert code == 0 and doc["makespan"] == 159.0 and doc["lower_bound"] <= 159.0


def test_ks(capsys):
    code, out, _ = run(capsys, "ks", "--K", "5", "--M", "100", "--gamma", "0.05")
    assert code == 0
    assert json.loads(out)["critical_value"] == pytest.approx(1.0645, abs=5e-3)


def test_jm(capsys, tmp_path):
    path = _write(tmp_path / "u.json", [{"family": "uniform", "params": {"a": 0, "b": 1}, "repeat": 2}])
    code, out, _ = run(capsys, "jm", "--model", path)
    assert code == 0 and json.loads(out)["verdict"] == "JM"


def test_structure_samples(capsys, pareto_file, tmp_path):
    samples = tmp_path / "s.csv"
    code, out, _ = run(capsys, "structure", "--model", pareto_file, "--kind", "beta", "--samples", "50", "--samples-out", str(samples))
    assert code == 0
    lines = samples.read_text().splitlines()
    assert lines[0].startswith("X_1,X_2,X_3") and len(lines) == 51


def test_dual_and_rvar(capsys, tmp_path):
    path = _write(tmp_path / "u.json", [{"family": "uniform", "params": {"a": 0, "b": 1}, "repeat": 2}])
    code, out, _ = run(capsys, "rvar-bound", "--model", path, "--level", "0", "--window", "0.5")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.5)
    code, out, _ = run(capsys, "dual", "--model", path, "--level", "0.5")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.5, abs=1e-6)


def test_curves_rvar_tracks_ra(capsys, tmp_path):
    path = _write(tmp_path / "p.json", [{"family": "pareto", "params": {"scale": 1, "theta": 0.5}, "repeat": 3}])
    out_path = tmp_path / "c.csv"
    code, _, _ = run(capsys, "curves", "--model", path, "--mode", "rvar", "--total", "0.9", "--grid", "0.1:0.8:3", "--N", "2000", "--out", str(out_path))
    assert code == 0
    rows = np.genfromtxt(out_path, delimiter=",", names=True)
    assert rows.size == 3
    np.testing.assert_allclose(rows["convolution"], rows["ra_upper"], rtol=0.02)


def test_out_file(capsys, pareto_file, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "bound", "--model", pareto_file, "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "bound"
