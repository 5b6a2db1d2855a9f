import cmath

import numpy as np
import pytest

from cuspcoeffs.builtin import get_form
from cuspcoeffs.cusp_oracle import (
    expand_at_cusp,
    expand_with_matrix,
    matrix_period,
    verify_periodicity,
    verify_scaling_skew,
)
from cuspcoeffs.cusps import ScalingMatrix, adapted_scaling_matrix, enumerate_cusps, extended_width, parse_cusp


def test_infinity_reproduces_input():
    f = get_form("delta")
    ex = expand_with_matrix(f, ScalingMatrix(1, 0, 0, 1), 40, delta=1)
    for n in range(1, 41):
        assert abs(ex.a(n) - f.a(n)) < 1e-9 * max(1.0, n**5.5)
    assert not ex.unresolved


def test_level11_cusp_zero_from_fricke():
    # f|S(z) = -11^{-1} f(z/11): the Fricke sign of this curve form is -1
    f = get_form("level11")
    ex = expand_at_cusp(f, parse_cusp("0", 11), 30)
    assert ex.delta == 11
    for n in range(1, 31):
        assert abs(ex.a(n) + f.a(n) / 11) < 1e-12


def test_level9chi_cusp_zero_is_conjugate_form():
    # at the cusp 0 the expansion is a constant multiple of the conjugate q-series,
    # with modulus 9^{-k/2} and phase e(2/9)
    f = get_form("level9chi")
    ex = expand_at_cusp(f, parse_cusp("0", 9), 30)
    ratios = [ex.a(n) / np.conj(f.a(n)) for n in range(1, 31) if abs(f.a(n)) > 0.5]
    assert len(ratios) > 5
    expected = cmath.exp(2j * cmath.pi * 2 / 9) / 27
    assert max(abs(r - expected) for r in ratios) < 1e-12


@pytest.mark.parametrize("name", ["level9chi", "level12chi"])
def test_periodicity_is_exact_at_every_cusp(name):
    f = get_form(name)
    for c in enumerate_cusps(f.level):
        s = adapted_scaling_matrix(c, f.conductor)
        delta = extended_width(f.level, f.conductor, c.q).delta
        r = verify_periodicity(f, s, delta, n_points=12)
        assert r.passed, (str(c), r)


def test_matrix_period_matches_extended_width():
    f = get_form("level9chi")
    for c in enumerate_cusps(9):
        s = adapted_scaling_matrix(c, 9)
        assert matrix_period(f, s) == extended_width(9, 9, c.q).delta


@pytest.mark.parametrize("gamma, m", [((1, 0, 9, 1), 1), ((2, 1, 9, 5), 2), ((4, 1, 27, 7), 0)])
def test_scaling_skew(gamma, m):
    # a different scaling matrix for the same cusp skews coefficients by chi(gamma) e(nm/delta)
    f = get_form("level9chi")
    r = verify_scaling_skew(f, parse_cusp("1/3", 9), gamma, m, n_max=15)
    assert r.passed, r


def test_gamma_outside_gamma0_rejected():
    f = get_form("level11")
    with pytest.raises(ValueError):
        verify_scaling_skew(f, parse_cusp("0", 11), (1, 1, 1, 2), 0)


def test_diagnostics_are_small():
    f = get_form("level12chi")
    ex = expand_at_cusp(f, parse_cusp("1/3", 12), 20)
    assert ex.residual < 1e-10 and ex.alias_diff < 1e-10
    assert ex.n_samples > 40
