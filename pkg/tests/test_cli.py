import json
import math

import numpy as np
import pytest

from lamlab.cli import fmt, main

ORTHO_E1E2 = {"slip": {"v1": [1.0, 0.0], "v2": [0.0, 1.0]}, "lambda": 0.5}


@pytest.fixture()
def e1e2_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(ORTHO_E1E2))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_fmt():
    assert fmt(None) == ""
    assert fmt(math.inf) == "inf"
    assert fmt(1.0) == "1"
    assert fmt(1 / 3) == "0.33333333333333331"


def test_classify_bc_origin(capsys):
    code, out = run(capsys, ["classify", "--bc", "0,0"])
    assert code == 0
    data = json.loads(out)
    assert data["region"] == "SO2"
    assert data["whom"] == 0.0


def test_classify_matrix_with_config(capsys, e1e2_config):
    code, out = run(capsys, ["--config", e1e2_config, "classify",
                             "--matrix", "2,0,0,0.5"])
    assert code == 0
    data = json.loads(out)
    assert data["region"] == "N2only"
    assert data["whom"] == pytest.approx(3.0)


def test_classify_off_manifold_exit_code(capsys):
    code, out = run(capsys, ["classify", "--matrix", "1,0,0,2"])
    assert code == 3
    assert json.loads(out)["region"] == "OffManifold"


def test_classify_usage_errors(capsys):
    assert main(["classify"]) == 2
    assert main(["classify", "--matrix", "1,2,3"]) == 2
    assert main(["classify", "--matrix", "1,0,0,1", "--bc", "0,0"]) == 2


def test_laminate_roundtrip(capsys):
    code, out = run(capsys, ["laminate", "--bc", "0.8,0.3"])
    assert code == 0
    data = json.loads(out)
    f_plus = np.array(data["f_plus"])
    f_minus = np.array(data["f_minus"])
    mu = data["mu"]
    assert data["residuals"]["convex_combination"] <= 1e-10
    assert np.linalg.matrix_rank(f_plus - f_minus, tol=1e-8) <= 1
    assert 0.0 <= mu <= 1.0


def test_general_bounds_json(capsys):
    # theta = 0.3 pi, a compressed single-slip cell has two-sided bounds
    code, out = run(capsys, ["--theta", str(0.3 * math.pi), "classify",
                             "--bc", "0.4,0.0"])
    assert code == 0
    data = json.loads(out)
    if "bounds" in data:
        assert data["bounds"]["lower"] <= data["bounds"]["upper"]


def test_regionmap_csv(tmp_path, capsys):
    out = tmp_path / "rm.csv"
    assert main(["--n", "9", "--range", "2", "regionmap", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "b,c,region,boundary,whom,lower,upper"
    assert len(lines) == 1 + 81


def test_hplot_csv(tmp_path):
    out = tmp_path / "hp.csv"
    theta = math.pi / 3
    assert main(["--theta", str(theta), "hplot", "--zmax", "2", "--samples", "9",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "z,h,h_star,h_perp,h_perp_star"
    # below the domain floor the starred columns are empty
    first = lines[1].split(",")
    assert first[0] == "0" and first[2] == "" and first[4] == ""


def test_whomgamma_csv(tmp_path):
    out = tmp_path / "wg.csv"
    assert main(["whomgamma", "--gamma-range=-1:1:5", "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    vals = {float(g): float(w) for g, w in rows}
    assert vals[0.0] == 0.0
    assert vals[1.0] == vals[-1.0]  # even in gamma for this symmetric frame


def test_homogenize_csv(tmp_path):
    out = tmp_path / "hom.csv"
    assert main(["homogenize", "--gamma-bands", "0.4:1", "--eps-list", "1/4,1/8",
                 "--hlam", "0.25", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "epsilon,hlam,e_eps,target,rel_error,flagged_area"
    assert len(lines) == 3


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["--n", "9", "--range", "2", "verify-envelope"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_bad_config_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "classify", "--bc", "0,0"]) == 2
    missing = tmp_path / "missing.json"
    assert main(["--config", str(missing), "classify", "--bc", "0,0"]) == 2
