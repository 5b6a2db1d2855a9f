import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcoeffs.hankel import (
    HankelInterpolant,
    HankelParams,
    exp_kernel,
    hankel,
    hankel_exp_kernel_closed_form,
    hankel_many,
    hankel_tanh_sinh,
    linear_combination,
    smooth_bump,
)

HOLO2 = HankelParams("holomorphic", 2)


def test_bump_shape():
    F = smooth_bump(1.0, 3.0)
    assert F(2.0) == pytest.approx(1.0)
    assert F(1.0) == 0 and F(3.0) == 0 and F(0.5) == 0
    with pytest.raises(ValueError):
        smooth_bump(2.0, 1.0)


@pytest.mark.parametrize("k, y, eta", [(2, 0.5, 0.3), (3, 0.3, 1.7), (12, 1.0, 0.8), (12, 0.5, 0.05)])
def test_exp_kernel_closed_form(k, y, eta):
    # integral of J_{k-1}(a sqrt x) x^{(k-1)/2} e^{-px}, a standard Laplace transform
    got = hankel(exp_kernel(k, y), HankelParams("holomorphic", k), eta).value
    want = hankel_exp_kernel_closed_form(k, y, eta)
    assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_exp_kernel_closed_form_against_mpmath():
    import mpmath

    k, y, eta = 3, 0.4, 0.9
    val = mpmath.quad(
        lambda x: mpmath.besselj(k - 1, 4 * mpmath.pi * mpmath.sqrt(eta * x)) * x ** ((k - 1) / 2) * mpmath.exp(-2 * mpmath.pi * x * y),
        [0, 5, 20, mpmath.inf],
    )
    want = complex(2 * mpmath.pi * (1j**k) * val)
    assert abs(hankel_exp_kernel_closed_form(k, y, eta) - want) < 1e-12


@settings(max_examples=15, deadline=None)
@given(
    st.sampled_from([2, 3, 4, 12]),
    st.floats(0.2, 5.0),
    st.floats(0.5, 20.0),
    st.floats(-4.5, 3.0).map(math.exp),
)
def test_two_rules_agree(k, A, width, y):
    F, params = smooth_bump(A, A + width), HankelParams("holomorphic", k)
    g = hankel(F, params, y)
    t = hankel_tanh_sinh(F, params, y)
    assert abs(g.value - t) <= 1e-9 * max(1.0, abs(t))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(0.2, 5.0), st.floats(0.5, 20.0))
def test_vanishes_for_negative_y(y, A, width):
    F = smooth_bump(A, A + width)
    assert hankel(F, HOLO2, -y).value == 0
    assert hankel_tanh_sinh(F, HOLO2, -y) == 0


@settings(max_examples=10, deadline=None)
@given(
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    st.floats(0.02, 10.0),
)
def test_linearity(alpha, beta, y):
    F, G = smooth_bump(1.0, 10.0), smooth_bump(2.0, 5.0)
    combo = linear_combination((alpha, F), (beta, G))
    lhs = hankel_tanh_sinh(combo, HOLO2, y)
    rhs = alpha * hankel(F, HOLO2, y).value + beta * hankel(G, HOLO2, y).value
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
    assert abs(hankel(combo, HOLO2, y).value - rhs) <= 1e-9 * max(1.0, abs(rhs))


def test_error_estimate_is_honest():
    F = smooth_bump(1.0, 100.0)
    for y in (0.01, 1.0, 30.0):
        r = hankel(F, HOLO2, y)
        t = hankel_tanh_sinh(F, HOLO2, y)
        assert abs(r.value - t) <= max(10 * r.error, 1e-12 * max(1.0, abs(t)))


def test_interpolant_matches_direct_quadrature():
    F = smooth_bump(1.0, 100.0)
    interp = HankelInterpolant(F, HOLO2)
    ys = np.array([0.003, 0.2, 1.0, 7.5, 40.0])
    direct = np.array([r.value for r in hankel_many(F, HOLO2, ys)])
    assert np.max(np.abs(interp(ys) - direct)) < 1e-10
    assert interp.validate() < 1e-10
    assert np.all(interp(np.array([-1.0, -0.1])) == 0)
