import json
import math

import pytest

from nclp.suites import (ExampleParams, SuiteReport, example_map, run_example, suite_degree_detection,
                         suite_direct_maps, suite_main_theorems, suite_subhomogeneous_bounds,
                         transposition_exponent)


@pytest.mark.parametrize("K,p,branch,expected", [
    (2.0, 1.0, "cb", 2), (3.0, 1.0, "cb", 3), (2.9999, 1.0, "cb", 2),
    (2 ** (1 / 3), 3.0, "cb", 2), (2.5, 2.0, "S1", 2), (3 * (1 - 1e-12), 1.0, "S1", 3), (1.0, 1.5, "cb", 1),
])
def test_degree_detection(K, p, branch, expected):
    assert suite_degree_detection(K, p, branch) == expected


def test_degree_detection_errors():
    with pytest.raises(ValueError):
        suite_degree_detection(2.0, 2.0, "cb")
    with pytest.raises(ValueError):
        suite_degree_detection(0.5, 1.0, "S1")
    with pytest.raises(ValueError):
        suite_degree_detection(2.0, 1.0, "bogus")


def test_transposition_exponent():
    assert transposition_exponent(1) == 1
    assert transposition_exponent(2) == 0
    assert transposition_exponent(4) == pytest.approx(0.5)


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_subhomogeneous_small(p):
    rep = suite_subhomogeneous_bounds(2, p, samples=6)
    assert rep.passed, [c for c in rep.failures()]
    assert rep.data["s1_sharp_ratio"] == pytest.approx(2, rel=1e-6)
    assert rep.data["sp_sharp_ratio"] == pytest.approx(2 ** transposition_exponent(p), rel=1e-12)


def test_direct_maps_small():
    rep = suite_direct_maps(1.5, trials=2, restarts=1)
    assert rep.passed, rep.failures()


def test_main_theorems_small():
    rep = suite_main_theorems(1.0, trials=1, restarts=2)
    assert rep.passed, rep.failures()
    names = {c.check for c in rep.checks}
    assert "(i)=>(ii) degree from cb constant" in names


def test_example_params_validation():
    with pytest.raises(ValueError):
        ExampleParams(1.0, 0.5)
    with pytest.raises(ValueError):
        ExampleParams(2.0, 1.0)
    with pytest.raises(ValueError):
        ExampleParams(2.0, -0.1)
    with pytest.raises(ValueError):
        ExampleParams(2.0, 0.5, n_max=1)
    assert ExampleParams(2.0, 0.25).beta(2) == pytest.approx((1.25 ** 2 - 1) / 3)


def test_example_map_is_isometric_on_corners():
    params = ExampleParams(2.0, 0.5, n_max=3)
    T, betas = example_map(params)
    assert len(betas) == 2
    assert T.rank() == T.source.dim < T.target.dim


def test_example_small():
    rep = run_example(ExampleParams(2.0, 0.5, n_max=3, m_max=1, samples=4))
    assert rep.passed, rep.failures()
    assert rep.data["s1_analytic_upper"] == pytest.approx(1.5, rel=1e-9)
    assert len(rep.data["certificates"]) == 3


def test_report_serialization():
    rep = SuiteReport("demo", {"p": 1.0}, 3)
    rep.add("a", "ok", 1.0, 2.0, True)
    rep.add("b", "bad", 3.0, 2.0, False, {"x": 1})
    d = json.loads(rep.to_json())
    assert d["schema_version"] == "1.0" and d["passed"] is False
    assert [c["status"] for c in d["checks"]] == ["pass", "fail"]
    back = SuiteReport.from_dict(d)
    assert back.failures()[0].witness == {"x": 1}
    lines = rep.to_csv().splitlines()
    assert lines[0] == "suite,instance,check,measured,bound,status"
    assert lines[2].endswith(",fail")
