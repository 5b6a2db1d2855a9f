import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from cuspcoeffs.arith import character_from_table, trivial_character
from cuspcoeffs.builtin import level9chi_character
from cuspcoeffs.cusps import (
    Cusp,
    ScalingMatrix,
    adapted_scaling_matrix,
    bruhat_decompose,
    count_cusps_bruteforce,
    cusp_count,
    cusps_equivalent,
    enumerate_cusps,
    extended_width,
    parse_cusp,
    period_bruteforce,
    reduce_to_standard_form,
    scaling_matrix,
    width,
    width_bruteforce,
)

# cusp counts of Gamma_0(N) for N = 1..20, counted by hand from orbits on P^1(Z/N)
KNOWN_COUNTS = [1, 2, 2, 3, 2, 4, 2, 4, 4, 4, 2, 6, 2, 4, 4, 6, 2, 8, 2, 6]


def test_known_counts():
    assert [cusp_count(N) for N in range(1, 21)] == KNOWN_COUNTS
    assert cusp_count(36) == 12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 150))
def test_count_matches_orbit_count(N):
    assert cusp_count(N) == len(enumerate_cusps(N)) == count_cusps_bruteforce(N)


def test_level12_cusps():
    cs = enumerate_cusps(12)
    assert [str(c) for c in cs] == ["0/1", "1/2", "1/3", "1/4", "1/6", "oo"]
    assert [width(12, c.q) for c in cs] == [12, 3, 4, 3, 1, 1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.data())
def test_width_matches_bruteforce(N, data):
    c = data.draw(st.sampled_from(enumerate_cusps(N)))
    assert width_bruteforce(N, scaling_matrix(c)) == width(N, c.q)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.integers(-50, 50), st.integers(1, 50), st.integers(-5, 5), st.integers(-5, 5))
def test_equivalence_is_gamma0_invariant(N, a, c, s, t):
    # move a/c by gamma = (1 + N s t', ...) built from two generators of Gamma_0(N)
    assume(math.gcd(a, c) == 1)
    for g in ((1, s, 0, 1), (1, 0, N * t, 1)):
        a2, c2 = g[0] * a + g[1] * c, g[2] * a + g[3] * c
        h = math.gcd(a2, c2)
        assert cusps_equivalent((a, c), (a2 // h, c2 // h), N)
        assert reduce_to_standard_form(a, c, N) == reduce_to_standard_form(a2 // h, c2 // h, N)


def test_distinct_cusps_are_inequivalent():
    cs = enumerate_cusps(36)
    for i, x in enumerate(cs):
        for y in cs[i + 1 :]:
            fx = (1, 0) if x.is_infinity else (x.a, x.q)
            fy = (1, 0) if y.is_infinity else (y.a, y.q)
            assert not cusps_equivalent(fx, fy, 36)


def test_parse_cusp():
    assert parse_cusp("oo", 11).is_infinity
    assert parse_cusp("0", 11) == parse_cusp("5/11", 11).__class__(11, 1, 0, 0)
    assert str(parse_cusp("2/6", 12)) == "1/3"
    assert parse_cusp("5/12", 12).is_infinity


def test_invalid_cusp_rejected():
    with pytest.raises(ValueError):
        Cusp(12, 5, 0, 1)
    with pytest.raises(ValueError):
        ScalingMatrix(1, 1, 1, 1)


def test_extended_width_values():
    # level 9 with a primitive character mod 9: delta = lcm(Mq, q^2, N)/q^2
    assert extended_width(9, 9, 3).delta == 3 and extended_width(9, 9, 3).width == 1
    assert extended_width(9, 9, 1).delta == 9
    assert extended_width(12, 1, 2).delta == 3
    assert extended_width(12, 4, 2).delta == 6
    assert extended_width(12, 12, 6).delta == 2


@pytest.mark.parametrize("N, chi", [(9, "level9chi"), (12, "mod4"), (12, "mod3"), (8, "trivial")])
def test_extended_width_is_period(N, chi):
    chars = {
        "level9chi": level9chi_character,
        "mod4": lambda: character_from_table(12, [(7, 0, 1), (5, 1, 2)]),
        "mod3": lambda: character_from_table(12, [(7, 1, 2), (5, 1, 2)]),
        "trivial": lambda: trivial_character(8),
    }
    x = chars[chi]()
    for c in enumerate_cusps(N):
        d = extended_width(N, x.conductor, c.q).delta
        assert period_bruteforce(N, x, adapted_scaling_matrix(c, x.conductor)) == d


def test_adapted_matrix_normalisation():
    for c in enumerate_cusps(36):
        s = adapted_scaling_matrix(c, 1)
        assert s.a * s.d - s.b * s.q == 1
        if not c.is_infinity:
            assert math.gcd(s.a, 36) == 1 and s.q == c.q
            assert cusps_equivalent((s.a, s.q), (c.a, c.q), 36)


def test_bruhat_factors_multiply_back():
    for c in enumerate_cusps(12)[:-1]:
        assert len(bruhat_decompose(scaling_matrix(c))) == 5
    with pytest.raises(ValueError):
        bruhat_decompose(ScalingMatrix(1, 0, 0, 1))
