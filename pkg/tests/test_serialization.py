import numpy as np
import pytest

from dpplab.dpp import Configuration
from dpplab.errors import ConfigError
from dpplab.ground import GroundSpace
from dpplab.operators import project_span
from dpplab.serialization import (
    distribution_from_dict,
    distribution_to_dict,
    kernel_from_dict,
    kernel_to_dict,
    load_json,
    samples_from_csv,
    samples_to_csv,
    save_json,
    space_from_dict,
    space_to_dict,
)


def _space():
    return GroundSpace(np.array([0.5, 1.0, 2.0]), np.array([0.25, 0.5, 1.0]), label="demo")


def test_space_round_trip(tmp_path):
    space = _space()
    payload = space_to_dict(space)
    save_json(payload, tmp_path / "space.json")
    back = space_from_dict(load_json(tmp_path / "space.json"))
    assert np.array_equal(back.points, space.points)
    assert np.array_equal(back.weights, space.weights)
    assert back.label == "demo"


def test_kernel_round_trip():
    space = _space()
    K = project_span(np.vstack([np.ones(3), space.points]), space)
    back = kernel_from_dict(kernel_to_dict(K))
    assert np.allclose(back.entries, K.entries, atol=0)
    assert np.array_equal(back.space.points, space.points)


def test_distribution_round_trip():
    table = {0: 0.25, 3: 0.5, 5: 0.25}
    back = distribution_from_dict(distribution_to_dict(table, 3))
    assert back == table


def test_unknown_version_rejected():
    payload = space_to_dict(_space())
    payload["format_version"] = 99
    with pytest.raises(ConfigError):
        space_from_dict(payload)


def test_samples_round_trip():
    space = _space()
    samples = [
        Configuration(space, frozenset({0, 2})),
        Configuration(space, frozenset()),
        Configuration(space, frozenset({1})),
    ]
    text = samples_to_csv(samples)
    assert text == "0 2\n\n1\n"
    back = samples_from_csv(text, space)
    assert [X.occupied for X in back] == [X.occupied for X in samples]
