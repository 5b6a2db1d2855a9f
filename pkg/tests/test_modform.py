import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcoeffs.builtin import get_form
from cuspcoeffs.modform import (
    InsufficientTerms,
    NewformError,
    evaluate,
    evaluate_many,
    load_newform,
    newform_from_dict,
    newform_to_dict,
    save_newform,
    slash,
    validate,
)


def naive_series_product(factors, n_max):
    """q^shift prod (1 - q^(m n))^e by repeated integer multiplication (no pentagonal tricks)."""
    shift = sum(m * e for m, e in factors) // 24
    poly = [0] * (n_max + 1)
    poly[shift] = 1
    for m, e in factors:
        for n in range(1, n_max // m + 1):
            for _ in range(e):
                for i in range(n_max, m * n - 1, -1):
                    poly[i] -= poly[i - m * n]
    return poly


def test_delta_matches_product():
    f = get_form("delta")
    ref = naive_series_product([(1, 24)], 60)
    assert [int(round(f.a(n).real)) for n in range(1, 61)] == ref[1:]
    assert f.a(2) == -24 and f.a(3) == 252


def test_level11_matches_product():
    f = get_form("level11")
    ref = naive_series_product([(1, 2), (11, 2)], 200)
    assert np.array_equal(f.coefficients[1:201].real, np.array(ref[1:], dtype=float))


def test_level11_point_counts():
    # a_p = p + 1 - #E(F_p) for y^2 + y = x^3 - x^2 - 10x - 20
    f = get_form("level11")
    for p in (2, 3, 5, 7, 13, 17, 19, 23):
        pts = 1 + sum(1 for x in range(p) for y in range(p) if (y * y + y - x**3 + x * x + 10 * x + 20) % p == 0)
        assert f.a(p) == p + 1 - pts


def test_level36_point_counts():
    # a_p = p + 1 - #E(F_p) for y^2 = x^3 + 1
    f = get_form("level36")
    for p in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        pts = 1 + sum(1 for x in range(p) for y in range(p) if (y * y - x**3 - 1) % p == 0)
        assert f.a(p) == p + 1 - pts


def test_level36_is_cm():
    f = get_form("level36")
    assert f.a(1) == 1
    for p in (5, 11, 17, 23, 29):
        assert f.a(p) == 0


@pytest.mark.parametrize("name", ["delta", "level11", "level9chi", "level12chi", "level36"])
def test_builtins_satisfy_invariants(name):
    f = get_form(name)
    assert validate(f) == []


def test_roundtrip(tmp_path):
    f = get_form("level9chi")
    path = tmp_path / "f.json"
    save_newform(f, path)
    g = load_newform(path)
    assert g.level == 9 and g.weight == 3 and g.character == f.character
    assert np.array_equal(g.coefficients, f.coefficients)


def _small(name="level11", n=50):
    data = newform_to_dict(get_form(name))
    data["coefficients"] = data["coefficients"][:n]
    return data


def test_corrupted_coefficient_rejected():
    data = _small()
    data["coefficients"][5][1] += 1.0  # a(6)
    with pytest.raises(NewformError, match="multiplicativity"):
        newform_from_dict(data)


def test_bad_normalisation_and_character():
    data = _small()
    data["coefficients"][0][1] = 2.0
    with pytest.raises(NewformError, match="normalisation"):
        newform_from_dict(data)
    data = _small("level9chi")
    data["weight"] = 2
    with pytest.raises(NewformError, match="parity"):
        newform_from_dict(data)


def test_gap_and_malformed(tmp_path):
    data = _small()
    del data["coefficients"][3]
    with pytest.raises(NewformError):
        newform_from_dict(data)
    with pytest.raises(NewformError):
        newform_from_dict({"level": 11})
    bad = tmp_path / "x.json"
    bad.write_text(json.dumps(_small())[:-20])
    with pytest.raises(NewformError):
        load_newform(bad)


def test_insufficient_terms():
    f = newform_from_dict(_small())
    with pytest.raises(InsufficientTerms):
        f.a(60)
    with pytest.raises(InsufficientTerms):
        evaluate(f, 0.1 + 0.01j)


def test_delta_inversion():
    f = get_form("delta")
    z = 0.2 + 1.1j
    lhs = evaluate(f, -1 / z)[0]
    assert abs(lhs - z**12 * evaluate(f, z)[0]) < 1e-12 * abs(lhs)


def test_level11_fricke():
    # f(-1/(11 z)) = -eps 11 z^2 f(z) with root number eps = +1 for this curve
    f = get_form("level11")
    z = 0.1 + 0.4j
    lhs = evaluate(f, -1 / (11 * z))[0]
    rhs = -11 * z**2 * evaluate(f, z)[0]
    assert abs(lhs - rhs) < 1e-10 * abs(rhs)


@settings(max_examples=25, deadline=None)
@given(st.integers(-20, 20), st.integers(1, 6), st.floats(-0.5, 0.5), st.floats(0.15, 0.6))
def test_modularity_under_gamma0(d, c0, x, y):
    f = get_form("level9chi")
    c = 9 * c0
    if math.gcd(c, d) != 1:
        return
    a = pow(d, -1, c)
    b = (a * d - 1) // c
    z = complex(x, y)
    got = slash(f, (a, b, c, d), z)
    # direct Fourier series on the right, Gamma_0(N) reduction on the left
    want = complex(f.character.value(d)) * evaluate(f, z)[0]
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))
