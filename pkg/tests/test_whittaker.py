import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcoeffs.builtin import get_form
from cuspcoeffs.cusps import ScalingMatrix, adapted_scaling_matrix, enumerate_cusps, parse_cusp
from cuspcoeffs.suite import check_principal_series, check_product_formula
from cuspcoeffs.voronoi import fitted_local_params
from cuspcoeffs.whittaker import (
    MatrixArg,
    al_partner,
    all_local_params,
    local_params,
    principal_series_value,
    product_formula,
    product_formula_array,
    spherical_value,
    value_contragredient,
    value_l_eq_0,
    verify_al_relation,
)


def e(x):
    return cmath.exp(2j * cmath.pi * x)


def test_spherical_value_normalisation():
    params = local_params(get_form("delta"), 2)
    assert spherical_value(params, 0) == 1
    assert spherical_value(params, -1) == 0
    assert abs(spherical_value(params, 1) - (-24) / 2**6) < 1e-14


def test_steinberg_root_number_is_known():
    params = local_params(get_form("level11"), 11)
    assert params.epsilon_status == "known" and abs(params.epsilon + 1) < 1e-14


def test_infinity_reproduces_input():
    f = get_form("level11")
    local = all_local_params(f)
    vals, mask, _ = product_formula_array(f, local, ScalingMatrix(1, 0, 0, 1), 300)
    assert mask[1:].all()
    assert np.max(np.abs(vals[1:] - f.coefficients[1:301])) < 1e-9


def test_level11_cusp_zero_without_fitting():
    # the Steinberg root number is known, so the cusp 0 needs no fitted constant
    f = get_form("level11")
    local = all_local_params(f)
    s = adapted_scaling_matrix(parse_cusp("0", 11), 1)
    for n in range(1, 40):
        v = product_formula(f, local, s, n)
        assert v.available
    # independent check through the Fricke involution: |a(n; 0)| = |a(n)| / 11
    for n in (1, 2, 3, 7, 11, 22):
        assert abs(abs(product_formula(f, local, s, n).value) - abs(f.a(n)) / 11) < 1e-12


def test_array_matches_pointwise():
    f = get_form("level9chi")
    local = fitted_local_params(f)
    s = adapted_scaling_matrix(parse_cusp("1/3", 9), 9)
    vals, mask, _ = product_formula_array(f, local, s, 60)
    for n in range(1, 61):
        assert abs(vals[n] - product_formula(f, local, s, n).value) < 1e-12


@pytest.mark.parametrize("name", ["level11", "level9chi", "level12chi"])
def test_product_formula_against_oracle(name):
    checks = check_product_formula(name, n_max=25)
    assert checks and all(c.status != "fail" for c in checks), [(c.id, c.residual) for c in checks if c.status == "fail"]
    assert all(len(c.values["fits"]) <= 1 for c in checks)
    skipped = sorted(c.inputs["cusp"] for c in checks if c.status == "skip")
    # cusps with 0 < q_p < N_p outside the principal series have no local formula here
    assert skipped == (["1/2", "1/6"] if name == "level12chi" else [])


def test_frozen_fitted_constants():
    # one unimodular constant per unknown local datum, read off the oracle once
    loc = fitted_local_params(get_form("level9chi"))[3]
    assert abs(loc.epsilon - e(2 / 9)) < 1e-12
    assert loc.b_chi == 1 and abs(loc.ps_phase - e(2 / 3)) < 1e-12
    loc12 = fitted_local_params(get_form("level12chi"))
    assert abs(loc12[2].epsilon - 1) < 1e-12 and abs(loc12[3].epsilon - 1j) < 1e-12
    loc36 = fitted_local_params(get_form("level36"))
    assert abs(loc36[2].epsilon + 1) < 1e-12 and abs(loc36[3].epsilon - 1) < 1e-12


def test_principal_series_support_and_ratio():
    checks = check_principal_series("level9chi")
    assert sorted(c.inputs["cusp"] for c in checks) == ["1/3", "2/3"]
    for check in checks:
        assert check.passed
        assert len(check.values["support_classes"]) == 1
        assert abs(check.values["ratio_mean"] - 1 / 3) < 1e-9


def test_principal_series_zero_off_support():
    params = fitted_local_params(get_form("level9chi"))[3]
    assert principal_series_value(params, MatrixArg(-2, 1, 1)).value == 0
    on = principal_series_value(params, MatrixArg(-3, 1, 2))  # -b^{-1} = -1 = 2 mod 3
    off = principal_series_value(params, MatrixArg(-3, 1, 1))
    assert abs(abs(on.value) - 3**0.5) < 1e-12 and off.value == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(-4, 2), st.integers(1, 400))
def test_reflection_agrees_with_direct_formula(t, v):
    # l = 0: the explicit formula and the reflection through the contragredient must agree
    params = fitted_local_params(get_form("level36"))[2]
    if v % 2 == 0:
        return
    direct = value_l_eq_0(params, MatrixArg(t, 0, v))
    reflected = value_contragredient(params, MatrixArg(t, 0, v))
    assert abs(direct.value - reflected.value) < 1e-12


def test_al_partner_flips_denominator():
    f = get_form("level36")
    c = parse_cusp("0", 36)
    assert al_partner(f, (2,), c).q_S == 4
    assert al_partner(f, (2, 3), c).q_S == 36
    with pytest.raises(ValueError):
        al_partner(f, (5,), c)


@pytest.mark.parametrize("name, S", [("level11", (11,)), ("level9chi", (3,))])
def test_atkin_lehner(name, S):
    f = get_form(name)
    local = fitted_local_params(f)
    for c in enumerate_cusps(f.level):
        rep = verify_al_relation(f, S, c, n_max=20, local=local)
        assert rep.passed, rep
        assert rep.modulus_error < 1e-8
        if rep.eta_residual is not None:
            assert rep.eta_residual < 1e-8
