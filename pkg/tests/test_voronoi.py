import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcoeffs.builtin import get_form
from cuspcoeffs.cusps import ScalingMatrix, adapted_scaling_matrix, matmul, parse_cusp
from cuspcoeffs.hankel import smooth_bump
from cuspcoeffs.voronoi import (
    average_bound,
    average_bound_experiment,
    closed_form_identity,
    coefficients_at,
    dual_cusp,
    relate_scaling_matrices,
    verify_voronoi,
)


@pytest.mark.parametrize("b, expected", [(2, "0/1"), (3, "0/1"), (5, "0/1"), (11, "oo"), (22, "oo")])
def test_dual_cusp_of_infinity(b, expected):
    f = get_form("level11")
    d = dual_cusp(f, 1, b)
    assert str(d.cusp_b) == expected
    assert d.g == 1 and d.prefactor == 1 / b
    s = d.sigma_b
    assert s.a * s.d - s.b * s.q == 1 and s.q == b


def test_dual_cusp_shares_factor_with_width():
    # at the cusp 0 of level 11 the width is 11, so b = 22 has g = 11
    f = get_form("level11")
    d = dual_cusp(f, 1, 22, adapted_scaling_matrix(parse_cusp("0", 11), 1))
    assert d.delta_a == 11 and d.g == 11 and d.twist_modulus == d.delta_b * 2
    assert d.hankel_scale == d.delta_b * 4
    with pytest.raises(ValueError):
        dual_cusp(f, 2, 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(-6, 6), st.integers(-3, 3), st.sampled_from(["0", "1/3", "2/3", "oo"]))
def test_relate_scaling_matrices(j, t, cusp):
    N = 9
    s = adapted_scaling_matrix(parse_cusp(cusp, N), 9)
    gamma = matmul((1, 0, N * t, 1), (1, j, 0, 1))
    tau = ScalingMatrix(*matmul(matmul(gamma, s.sigma_inv), (1, 2, 0, 1)))
    g, m = relate_scaling_matrices(N, s, tau)
    assert g[2] % N == 0 and g[0] * g[3] - g[1] * g[2] == 1
    assert matmul(matmul(g, s.sigma_inv), (1, m, 0, 1)) == tau.sigma_inv


@settings(max_examples=12, deadline=None)
@given(st.integers(-4, 4), st.integers(-2, 2), st.sampled_from(["0", "1/3", "2/3"]))
def test_transported_formula_matches_oracle(j, t, cusp):
    # product formula at the adapted matrix, moved to an arbitrary scaling matrix of the cusp
    f = get_form("level9chi")
    s = adapted_scaling_matrix(parse_cusp(cusp, 9), 9)
    sigma = ScalingMatrix(*matmul(matmul((1, 0, 9 * t, 1), (1, j, 0, 1)), s.sigma_inv))
    orc = coefficients_at(f, sigma, 12, "oracle")
    pf = coefficients_at(f, sigma, 12, "product_formula")
    assert np.max(np.abs(orc[1:] - pf[1:])) < 1e-9


@pytest.mark.parametrize(
    "name, a, b, cusp",
    [("level11", 1, 3, None), ("level11", 2, 5, "0"), ("level9chi", 1, 2, "1/3"), ("delta", 1, 2, None)],
)
def test_voronoi_identity(name, a, b, cusp):
    f = get_form(name)
    c = None if cusp is None else parse_cusp(cusp, f.level)
    r = verify_voronoi(f, a, b, c, smooth_bump(1.0, 100.0))
    assert r.passed, r
    assert r.rel_residual < 1e-8
    assert r.details["hankel_validation"] < 1e-9


def test_voronoi_detects_a_wrong_twist():
    # the dual side for 2/3 must not match the twisted sum for 1/3: guards against vacuous passes
    f = get_form("level11")
    one = verify_voronoi(f, 1, 3, None, smooth_bump(1.0, 100.0))
    two = verify_voronoi(f, 2, 3, None, smooth_bump(1.0, 100.0))
    assert one.passed and two.passed
    assert abs(one.lhs - two.rhs) > 1e-3 * abs(one.lhs)


@pytest.mark.parametrize("provenance", ["product_formula", "oracle"])
def test_closed_form_identity(provenance):
    f = get_form("level11")
    r = closed_form_identity(f, 1, 3, 0.5, provenance=provenance)
    assert r.passed, r


def test_average_bound_formula():
    assert average_bound(2, 1, 1, 1.0) == pytest.approx(9 * 2)
    assert average_bound(2, 11, 1, 100.0) == pytest.approx(9 / 121 * (100 ** (2 + 14 / 64) + 100**1.5))


@pytest.mark.parametrize("name, cusp, slope", [("level11", "0", 1.99), ("level9chi", "1/3", 2.97)])
def test_average_bound_slope(name, cusp, slope):
    f = get_form(name)
    t = average_bound_experiment(f, parse_cusp(cusp, f.level), X_grid=[500, 1000, 2000, 5000])
    assert t.passed and abs(t.slope - slope) < 0.03
    assert all(r < 1 for r in t.ratio)
