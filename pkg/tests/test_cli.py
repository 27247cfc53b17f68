import json

import numpy as np
import pytest

from nclp import __version__
from nclp.algebra import Element, full_matrix_algebra, make_algebra
from nclp.cli import run
from nclp.io import amplified_to_json, element_to_json, map_to_json
from nclp.lp import matrix_unit_family
from nclp.maps import LinearMap


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _run_json(argv, capsys):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_norm_of_identity(tmp_path, capsys):
    path = _write(tmp_path, "id2.json", element_to_json(Element.identity(full_matrix_algebra(2))))
    code, d = _run_json(["norm", "--element", path, "--p", "1"], capsys)
    assert code == 0
    assert d["value"] == pytest.approx(2.0)
    assert d["command"] == "norm" and d["schema_version"] == "1.0"


def test_s1norm(tmp_path, capsys):
    X = matrix_unit_family(full_matrix_algebra(2), 2, 0, swap=True)
    path = _write(tmp_path, "swap.json", amplified_to_json(X))
    code, d = _run_json(["s1norm", "--amplified", path, "--p", "1"], capsys)
    assert code == 0
    assert d["upper"] == pytest.approx(4.0) and d["lower"] == pytest.approx(4.0)


def test_cbnorm_and_csv(tmp_path, capsys):
    path = _write(tmp_path, "t2.json", map_to_json(LinearMap.transpose_map(full_matrix_algebra(2), 1.0)))
    code, d = _run_json(["cbnorm", "--map", path, "--restarts", "2"], capsys)
    assert code == 0
    assert d["lower"] == pytest.approx(2.0) and d["upper"] == pytest.approx(2.0)
    assert d["params"]["m_max"] == 4
    code = run(["cbnorm", "--map", path, "--restarts", "1", "--m-max", "2", "--csv"])
    lines = capsys.readouterr().out.splitlines()
    assert code == 0 and lines[0] == "suite,instance,check,measured,bound,status"


def test_structural_commands(tmp_path, capsys):
    spec = make_algebra([(3, [1.0]), (2, [1.0])])
    T = LinearMap.from_function(spec, spec, 1.0, lambda x: Element(spec, [x.data[0], x.data[1].T]))
    path = _write(tmp_path, "T.json", map_to_json(T))
    code, d = _run_json(["decompose", "--map", path], capsys)
    assert code == 0 and d["alpha_corners"] == [0] and d["beta_corners"] == [1]
    code, d = _run_json(["yeadon", "--map", path], capsys)
    assert code == 0 and d["separating"] is True
    code, d = _run_json(["split", "--map", path, "--extract"], capsys)
    assert code == 0 and sorted(d["central"]) == ["anti-direct", "direct"]
    code, d = _run_json(["inverse", "--map", path], capsys)
    assert code == 0 and d["j_inverse_matches"] is True
    code, d = _run_json(["kernel", "--map", path], capsys)
    assert code == 0 and d["kernel_corners"] == []


def test_inverse_twist_exits_1(tmp_path, capsys):
    spec = full_matrix_algebra(2)
    d = np.diag([1.0, 1j])
    T = LinearMap.from_function(spec, spec, 1.0, lambda x: Element(spec, [d @ x.data[0].T]))
    path = _write(tmp_path, "tw.json", map_to_json(T))
    code, out = _run_json(["inverse", "--map", path], capsys)
    assert code == 1
    assert out["twisted_matches"] is True and out["j_inverse_matches"] is False


def test_not_separating_exits_1(tmp_path, capsys):
    spec = full_matrix_algebra(2)
    T = LinearMap(spec, spec, 1.0, np.ones((4, 4)))
    path = _write(tmp_path, "bad.json", map_to_json(T))
    code, out = _run_json(["decompose", "--map", path], capsys)
    assert code == 1 and "error" in out
    code, out = _run_json(["yeadon", "--map", path], capsys)
    assert code == 1 and out["separating"] is False


def test_degree(capsys):
    code, d = _run_json(["degree", "--K", "2", "--p", "1"], capsys)
    assert code == 0 and d["N"] == 2
    code, d = _run_json(["degree", "--K", "2.5", "--branch", "S1"], capsys)
    assert code == 0 and d["N"] == 2


def test_example_writes_out(tmp_path, capsys):
    out = tmp_path / "ex.json"
    code = run(["example", "--p", "2", "--eps", "0.5", "--nmax", "2", "--mmax", "1", "--out", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    assert d["passed"] is True
    assert d["data"]["beta"][0] == pytest.approx(0.4166666666666667)


def test_verify_identities(capsys):
    code, d = _run_json(["verify", "identities", "--N", "2", "--m", "2", "--p", "1.5", "--samples", "2"], capsys)
    assert code == 0 and d["passed"] is True


@pytest.mark.parametrize("argv", [
    ["norm", "--element", "/nonexistent.json", "--p", "1"],
    ["degree", "--K", "2", "--p", "2"],
    ["example", "--p", "2", "--eps", "1.5"],
    ["example", "--p", "0.5", "--eps", "0.5"],
])
def test_input_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert "input error" in capsys.readouterr().err


def test_malformed_json_exit_2(tmp_path, capsys):
    path = tmp_path / "x.json"
    path.write_text("[1, 2")
    assert run(["norm", "--element", str(path), "--p", "1"]) == 2


def test_bad_exponent_exit_2(tmp_path, capsys):
    path = _write(tmp_path, "id2.json", element_to_json(Element.identity(full_matrix_algebra(2))))
    assert run(["norm", "--element", path, "--p", "0.3"]) == 2
