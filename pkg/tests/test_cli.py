import json
import random

import pytest

from symcurve import io
from symcurve.cli import main
from symcurve.diagrams import ReducedDiagram
from symcurve.frames import random_curve, random_symplectic

ROW2 = '{"rows":[{"length":2,"multiplicity":1}]}'


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_prolongation_of_regular_diagram(capsys):
    code, out, _ = run(["prolongation", "--diagram", '{"rows":[{"length":1,"multiplicity":3}]}'], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["dim_u"] == 3
    assert rep["dim_u_unparametrized"] == 6
    assert rep["schema"] == io.SCHEMA
    assert "convention_audit" in rep and "backend" in rep


def test_normalization_space_report(capsys):
    code, out, _ = run(["normalization-space", "--diagram", ROW2], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["audit_ok"]
    assert sum(rep["dims_by_degree"].values()) == 2


def test_flat_then_normalize(tmp_path, capsys):
    flat = str(tmp_path / "flat.json")
    assert main(["flat", "--diagram", ROW2, "--out", flat]) == 0
    code, out, _ = run(["normalize", "--curve", flat], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["curvature_maps"] == {}
    assert [s["residual_gauge_dim"] for s in rep["gauge_trace"]] == [4, 2, 1, 0]


def test_equivalent_sp_transform(tmp_path, capsys):
    gen = random_curve(ReducedDiagram([(2, 1)]), seed=3).curve
    A = random_symplectic(gen.m, random.Random(2))
    a = write(tmp_path, "a.json", gen.to_json())
    b = write(tmp_path, "b.json", gen.transformed(A).to_json())
    code, out, _ = run(["equivalent", a, b], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "equivalent"


def test_inequivalent_exit_status(tmp_path, capsys):
    red = ReducedDiagram([(2, 1)])
    a = write(tmp_path, "a.json", random_curve(red, seed=1).curve.to_json())
    b = write(tmp_path, "b.json", random_curve(red, seed=2).curve.to_json())
    code, out, _ = run(["equivalent", a, b], capsys)
    assert code == 2
    assert json.loads(out)["verdict"] == "inequivalent"


def test_analyze_and_symbol(tmp_path, capsys):
    c = write(tmp_path, "c.json", random_curve(ReducedDiagram([(2, 1), (1, 1)]), seed=4).curve.to_json())
    code, out, _ = run(["analyze", "--curve", c], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["young_columns"] == [2, 1]
    assert rep["equiregular_is_probabilistic"]
    code, out, _ = run(["symbol", "--curve", c, "--format", "text"], capsys)
    assert code == 0
    assert "commutation_defect" in out


def test_invariants_and_random_curve(tmp_path, capsys):
    path = str(tmp_path / "r.json")
    assert main(["random-curve", "--diagram", ROW2, "--seed", "5", "--out", path]) == 0
    code, out, _ = run(["invariants", "--curve", path], capsys)
    assert code == 0
    assert json.loads(out)["fingerprint"]["kind"] == "complete"


def test_reconstruct_modes(tmp_path, capsys):
    s = write(tmp_path, "s.json", {"coefficients": [[["0", "0"], ["1", "0"]]]})
    code, out, _ = run(["reconstruct", "--structure", s], capsys)
    assert code == 0
    frame = json.loads(out)["frame"]
    assert frame["coefficients"][1] == [["0", "0"], ["1", "0"]]
    code, out, _ = run(["reconstruct", "--structure", s, "--mode", "sampled", "--steps", "4"], capsys)
    assert code == 0
    assert len(json.loads(out)["times"]) == 5


def test_frenet_command(tmp_path, capsys):
    circle = {"space": "euclidean", "jet_order": 8,
              "components": [["0", "1", "0", "-1/6", "0", "1/120", "0", "-1/5040"],
                             ["0", "0", "1/2", "0", "-1/24", "0", "1/720"]]}
    code, out, _ = run(["frenet", "--curve", write(tmp_path, "e.json", circle)], capsys)
    assert code == 0
    # unit circle up to the truncation order
    k = json.loads(out)["curvatures"][0][0]
    assert abs(float(k) - 1) < 1e-10


def test_audit_small(capsys):
    code, out, _ = run(["audit", "--max-boxes", "3"], capsys)
    assert code == 0
    assert json.loads(out)["ok"]


def test_output_is_byte_deterministic(tmp_path, capsys):
    c = write(tmp_path, "c.json", random_curve(ReducedDiagram([(1, 1)]), seed=9).curve.to_json())
    _, first, _ = run(["normalize", "--curve", c], capsys)
    _, second, _ = run(["normalize", "--curve", c], capsys)
    assert first == second


def test_usage_error(capsys):
    code, _, _ = run(["prolongation"], capsys)
    assert code == 64
    code, _, _ = run(["no-such-command"], capsys)
    assert code == 64


def test_missing_file(capsys):
    code, _, err = run(["analyze", "--curve", "/nonexistent/curve.json"], capsys)
    assert code == 66
    assert "cannot read" in err


def test_analysis_error_status(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", {"m": 2, "frame_columns": [[["1"], ["0"], ["0"], ["0"]],
                                                                  [["0"], ["0"], ["1"], ["0"]]]})
    code, _, err = run(["analyze", "--curve", bad], capsys)
    assert code == 1
    assert "NotLagrangian" in err


@pytest.mark.parametrize("fmt", ["json", "text"])
def test_formats(fmt, capsys):
    code, out, _ = run(["prolongation", "--diagram", ROW2, "--format", fmt], capsys)
    assert code == 0
    assert "dim_u" in out
