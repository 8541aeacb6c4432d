import json

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import seeds
from jmdecohere.dynamics import dephasing_generator, depolarizing_generator
from jmdecohere.formats import (
    FormatError,
    dumps,
    generator_from_dict,
    generator_to_dict,
    observable_from_dict,
    observable_to_dict,
    verdict_from_dict,
    verdict_to_dict,
)
from jmdecohere.jmcheck import jm_feasibility
from jmdecohere.observables import random_observable


@given(seeds)
def test_observable_round_trip(seed):
    E = random_observable(3, 2, np.random.default_rng(seed))
    back = observable_from_dict(json.loads(dumps(observable_to_dict(E))))
    assert np.array_equal(back.effects, E.effects)
    assert back.outcomes == E.outcomes


def test_generator_round_trip():
    for g in (dephasing_generator(0.4, 1.1), depolarizing_generator(d=3)):
        back = generator_from_dict(json.loads(dumps(generator_to_dict(g))))
        assert np.array_equal(back.superop, g.superop)
        assert back.divisible is True


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_verdict_round_trip(seed):
    rng = np.random.default_rng(seed)
    v = jm_feasibility(random_observable(2, 2, rng), random_observable(2, 2, rng))
    doc = verdict_to_dict(v, certificate=True)
    back = verdict_from_dict(json.loads(dumps(doc)))
    assert back.status is v.status and back.residual == v.residual
    assert back.iterations == v.iterations and back.criterion == v.criterion
    if v.certificate is not None:
        assert np.array_equal(back.certificate.grid, v.certificate.grid)
    assert verdict_to_dict(back, certificate=True) == doc


def test_unknown_keys_rejected():
    doc = observable_to_dict(random_observable(2, 2, np.random.default_rng(0)))
    doc["colour"] = "red"
    with pytest.raises(FormatError):
        observable_from_dict(doc)
    with pytest.raises(FormatError):
        generator_from_dict({"hamiltonian": [[[0, 0]]], "extra": 1})


def test_malformed_matrices():
    with pytest.raises(FormatError):
        observable_from_dict({"effects": [[[1, 0], [0, 1]]]})
    with pytest.raises(FormatError):
        observable_from_dict({"dim": 3, "effects": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]})
    with pytest.raises(FormatError):
        generator_from_dict({"hamiltonian": [[[0, 0]]], "divisible": "yes"})
