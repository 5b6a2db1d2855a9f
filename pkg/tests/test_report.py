import json
import math

import numpy as np
from hypothesis import given, strategies as st

from cuspcoeffs.report import Check, VerificationReport, dumps


def _report():
    return VerificationReport(
        "demo",
        [
            Check("b.second", "x", False, residual=0.5, tolerance=0.1),
            Check("a.first", "y", True, residual=1e-12, tolerance=1e-9, values={"z": 1 + 2j}),
            Check("c.third", "z", False, skipped="not reachable"),
        ],
    )


def test_summary_and_order():
    r = _report()
    assert r.summary == {"pass": 1, "fail": 1, "skip": 1, "total": 3}
    assert not r.passed
    assert [c["id"] for c in r.to_dict()["checks"]] == ["a.first", "b.second", "c.third"]


def test_json_shape():
    data = json.loads(dumps(_report()))
    first = data["checks"][0]
    assert first["values"]["z"] == {"re": 1.0, "im": 2.0}
    assert first["status"] == "pass"
    assert "seconds" not in first


def test_timing_is_not_serialised():
    a, b = _report(), _report()
    a.checks[0].seconds, b.checks[0].seconds = 1.0, 2.0
    assert dumps(a) == dumps(b)


def test_nonfinite_and_numpy():
    out = json.loads(dumps({"n": float("nan"), "i": -math.inf, "a": np.arange(3), "b": np.float32(0.5)}))
    assert out == {"n": "nan", "i": "-inf", "a": [0, 1, 2], "b": 0.5}


json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False, allow_infinity=False) | st.text(),
    lambda children: st.lists(children) | st.dictionaries(st.text(), children),
    max_leaves=20,
)


@given(json_values)
def test_dumps_roundtrips_and_is_stable(value):
    text = dumps(value)
    assert dumps(json.loads(text)) == text
    assert json.loads(text) == value


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_keep_full_precision(x):
    assert json.loads(dumps([x]))[0] == x
