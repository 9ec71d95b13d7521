import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from wick_holder.chaos import ChaosExpansion
from wick_holder.operators import DiagonalOperator
from wick_holder.serialization import dumps, format_float, loads


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip_is_bit_faithful(x):
    assert float(format_float(x)).hex() == x.hex()


def test_non_finite_tokens():
    doc = loads(dumps({"a": math.inf, "b": -math.inf}))
    assert doc == {"a": math.inf, "b": -math.inf}
    assert math.isnan(loads(dumps([math.nan]))[0])


def test_seventeen_digits():
    assert format_float(0.1) == "0.10000000000000001"


def test_chaos_expansion_round_trip():
    rng = np.random.default_rng(5)
    terms = {(i, j): float(rng.normal()) / 3 for i in range(4) for j in range(3)}
    phi = ChaosExpansion(2, terms, 30)
    back = ChaosExpansion.from_dict(loads(dumps(phi.to_dict())))
    assert back == phi
    assert all(back.coeff(a).hex() == c.hex() for a, c in phi.terms.items())


def test_operator_round_trip():
    A = DiagonalOperator((1 / 7, -2 / 3, 1e-300))
    assert DiagonalOperator.from_dict(loads(dumps(A.to_dict()))) == A


def test_output_is_valid_json_and_ordered():
    text = dumps({"z": 1, "a": [1.5, 2], "m": {"x": True, "y": None}})
    assert list(json.loads(text)) == ["z", "a", "m"]
