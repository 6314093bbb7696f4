import csv
import json
from pathlib import Path

import numpy as np
import pytest

from freeconv.cli import CSV_HEADER, FIT_HEADER, main, num, to_json

SPECS = Path(__file__).resolve().parents[1] / "specs"


def spec(name):
    return str(SPECS / f"{name}.json")


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def test_convolve_bernoulli(tmp_path):
    assert main(["convolve", "--mu", spec("bernoulli"), "--nu", spec("bernoulli")]) == 0
    text = (tmp_path / "density.csv").read_text()
    assert text.splitlines()[0] == CSV_HEADER
    rows = read_csv(tmp_path / "density.csv")
    assert len(rows) == 512
    i = min(range(len(rows)), key=lambda j: abs(float(rows[j]["x"]) - 2.0))
    x = float(rows[i]["x"])
    assert float(rows[i]["f"]) == pytest.approx(1 / (2 * np.pi * np.sqrt(x * (4 - x))), rel=1e-6)
    rep = json.loads((tmp_path / "density.atoms.json").read_text())
    assert [(a["x"], a["mass"]) for a in rep["atoms"]] == [(0.0, 0.5)]


def test_convolve_identity(tmp_path):
    out = tmp_path / "id.csv"
    code = main(["convolve", "--mu", spec("uniform"), "--nu", spec("delta1"), "--grid-n", "64",
                 "--out", str(out)])
    assert code == 0
    fs = np.array([float(r["f"]) for r in read_csv(out)])
    assert np.max(np.abs(fs - 0.5)) <= 1e-9
    assert json.loads((tmp_path / "id.atoms.json").read_text())["atoms"] == []


def test_convolve_explicit_grid_and_edges(tmp_path):
    code = main(["convolve", "--mu", spec("jacobi_a"), "--nu", spec("jacobi_b"), "--grid-lo", "1",
                 "--grid-hi", "3", "--grid-n", "5", "--edges-out", "e.json"])
    assert code == 0
    xs = [float(r["x"]) for r in read_csv(tmp_path / "density.csv")]
    assert xs == [1.0, 1.5, 2.0, 2.5, 3.0]
    rep = json.loads((tmp_path / "e.json").read_text())
    assert rep["available"] and rep["E_minus"] < 1 < 3 < rep["E_plus"]


def test_convolve_malformed_spec_writes_nothing(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"atoms": [{"x": -1.0, "w": 1.0}]}))
    assert main(["convolve", "--mu", str(bad), "--nu", spec("uniform")]) == 1
    assert "error" in capsys.readouterr().err
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bad.json"]


def test_convolve_deterministic(tmp_path):
    args = ["convolve", "--mu", spec("jacobi_a"), "--nu", spec("marchenko_pastur"), "--grid-n", "40"]
    assert main(args + ["--out", "a.csv"]) == 0
    assert main(args + ["--out", "b.csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_transform_json(capsys):
    assert main(["transform", "--mu", spec("uniform"), "--z", "2+0.5j"]) == 0
    rep = json.loads(capsys.readouterr().out)
    z = 2 + 0.5j
    m = np.log((3 - z) / (1 - z)) / 2
    assert complex(rep["m"]["re"], rep["m"]["im"]) == pytest.approx(m, rel=1e-12)
    assert rep["eta"] is not None


def test_transform_bad_point(capsys):
    assert main(["transform", "--mu", spec("uniform"), "--z", "two"]) == 1


def test_edges_json_and_fit(tmp_path):
    code = main(["edges", "--mu", spec("jacobi_a"), "--nu", spec("jacobi_a"), "--edges-out", "e.json"])
    assert code == 0
    rep = json.loads((tmp_path / "e.json").read_text())
    assert max(rep["residuals"]) <= 1e-8
    assert rep["E_minus"] == pytest.approx(1.0784032511950128, abs=1e-9)
    assert (tmp_path / "edges_fit.csv").read_text().splitlines()[0] == FIT_HEADER
    rows = read_csv(tmp_path / "edges_fit.csv")
    assert {r["edge"] for r in rows} == {"minus", "plus"}
    for r in rows:
        if float(r["d"]) < 1e-5 * (rep["E_plus"] - rep["E_minus"]):
            assert float(r["f"]) / float(r["f_model"]) == pytest.approx(1.0, abs=0.05)


def test_edges_json_only(tmp_path, capsys):
    assert main(["edges", "--mu", spec("jacobi_a"), "--nu", spec("jacobi_b"), "--json-only"]) == 0
    assert "E_plus" in json.loads(capsys.readouterr().out)
    assert not (tmp_path / "edges_fit.csv").exists()


def test_edges_rejects_atoms(tmp_path, capsys):
    assert main(["edges", "--mu", spec("bernoulli"), "--nu", spec("jacobi_a")]) == 1
    assert "Assumption" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_validate_filter(tmp_path, capsys):
    assert main(["validate", "--filter", "identity", "--out", "v.tsv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split("\t") == ["criterion", "name", "result", "detail"]
    assert len(lines) == 2 and lines[1].split("\t")[2] == "PASS"
    assert (tmp_path / "v.tsv").exists()


def test_validate_perturbation_is_caught(capsys):
    assert main(["validate", "--filter", "identity", "--perturb", "1e-3"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_validate_unknown_filter():
    assert main(["validate", "--filter", "nope"]) == 1


def test_number_format():
    assert num(0.1) == "0.10000000000000001"
    assert float(num(np.pi)) == np.pi
    assert to_json({"a": [float("nan"), 1.5]}) == '{\n  "a": [\n    null,\n    1.5\n  ]\n}'
