import json

import numpy as np
import pytest

from nclp.algebra import random_element
from nclp.io import (InputError, amplified_from_json, amplified_to_json, element_from_json, element_to_json,
                     estimate_to_json, load_json, map_from_json, map_to_json, spec_from_json, spec_to_json)
from nclp.lp import AmplifiedElement
from nclp.maps import LinearMap
from nclp.valued import NormEstimate


def _through_text(d):
    return json.loads(json.dumps(d))


def test_spec_round_trip(mixed_spec):
    assert spec_from_json(_through_text(spec_to_json(mixed_spec))) == mixed_spec


def test_element_round_trip(mixed_spec, rng):
    x = random_element(mixed_spec, rng)
    y = element_from_json(_through_text(element_to_json(x)))
    assert (x - y).max_abs() <= 1e-15


def test_amplified_round_trip(mixed_spec, rng):
    X = AmplifiedElement.random(mixed_spec, 2, rng)
    Y = amplified_from_json(_through_text(amplified_to_json(X)))
    assert (X - Y).max_abs() <= 1e-15


def test_map_round_trip(mixed_spec, rng):
    T = LinearMap(mixed_spec, mixed_spec, 1.5, rng.normal(size=(mixed_spec.dim,) * 2))
    S = map_from_json(_through_text(map_to_json(T)))
    assert S.p == 1.5
    assert np.max(np.abs(S.matrix - T.matrix)) <= 1e-15


def test_flat_matrix_accepted():
    d = {"algebra": {"blocks": [{"n": 2, "weights": [1.0]}]},
         "blocks": [[[[1, 0], [0, 0], [0, 0], [1, 0]]]]}
    x = element_from_json(d)
    np.testing.assert_array_equal(x.data[0], np.eye(2))


@pytest.mark.parametrize("doc", [
    {"blocks": [{"n": 2.5, "weights": [1.0]}]},
    {"blocks": [{"n": 2, "weights": [-1.0]}]},
    {"blocks": [{"n": 2}]},
    {"blocks": []},
])
def test_bad_specs(doc):
    with pytest.raises(ValueError):
        spec_from_json(doc)


def test_bad_element_shape():
    d = {"algebra": {"blocks": [{"n": 2, "weights": [1.0]}]}, "blocks": [[[[[1, 0]]]]]}
    with pytest.raises(InputError):
        element_from_json(d)


def test_bad_amplified_shape(mixed_spec):
    d = {"algebra": spec_to_json(mixed_spec), "m": 2, "entries": [[]]}
    with pytest.raises(InputError):
        amplified_from_json(d)


def test_load_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_json(bad)
    with pytest.raises(InputError):
        load_json(tmp_path / "missing.json")


def test_estimate_infinite_upper():
    d = estimate_to_json(NormEstimate(1.0, float("inf"), False, 3))
    assert d["upper"] is None and d["witness"] is None
    json.dumps(d)
