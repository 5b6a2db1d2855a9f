import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cuspcoeffs.arith import (
    RootOfUnity,
    character_from_table,
    coprime_part,
    crt,
    divisors,
    euler_phi,
    factor,
    inverse_mod,
    is_prime,
    local_component,
    omega_p,
    padic_frac,
    ppart,
    primes_up_to,
    psi_p,
    trivial_character,
    vp,
)
from cuspcoeffs.builtin import level9chi_character


def test_small_values():
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert divisors(36) == [1, 2, 3, 4, 6, 9, 12, 18, 36]
    assert euler_phi(36) == 12
    assert factor(720).factors == ((2, 4), (3, 2), (5, 1))
    assert vp(Fraction(9, 8), 2) == -3
    assert ppart(360, 12) == 72
    assert coprime_part(360, 12) == (5, 72)


def test_large_prime_and_semiprime():
    p, q = 1_000_000_007, 998_244_353
    assert is_prime(p) and is_prime(q)
    assert factor(p * q).factors == ((q, 1), (p, 1))


@given(st.integers(1, 10**6))
def test_factor_roundtrip(n):
    f = factor(n)
    assert math.prod(p**e for p, e in f.factors) == n
    assert all(is_prime(p) for p in f.primes)


@given(st.integers(2, 500), st.integers(2, 500), st.integers(0, 10**6), st.integers(0, 10**6))
def test_crt_solves_congruences(m1, m2, r1, r2):
    if math.gcd(m1, m2) != 1:
        with pytest.raises(ValueError):
            crt([r1, r2], [m1, m2])
        return
    x, M = crt([r1, r2], [m1, m2])
    assert M == m1 * m2 and 0 <= x < M
    assert x % m1 == r1 % m1 and x % m2 == r2 % m2


@given(st.integers(1, 10**6), st.integers(2, 10**4))
def test_inverse_mod(a, m):
    if math.gcd(a, m) == 1:
        assert a * inverse_mod(a, m) % m == 1


@given(st.fractions(), st.fractions())
def test_root_of_unity_group_law(s, t):
    a, b = RootOfUnity(s), RootOfUnity(t)
    assert 0 <= a.turn < 1
    assert a * b == RootOfUnity(s + t)
    assert a * a.conjugate() == RootOfUnity(0)
    assert abs(complex(a) * complex(b) - complex(a * b)) < 1e-12


def test_character_table_is_multiplicative():
    chi = level9chi_character()
    assert chi.modulus == 9 and chi.conductor == 9
    units = [r for r in range(9) if math.gcd(r, 9) == 1]
    for a in units:
        for b in units:
            assert chi(a * b) == chi(a) * chi(b)
    assert chi(3) is None


def test_inconsistent_generator_values_rejected():
    with pytest.raises(ValueError):
        character_from_table(5, [(2, 1, 4), (4, 1, 4)])


def test_trivial_character():
    chi = trivial_character(12)
    assert chi.conductor == 1 and chi(5) == RootOfUnity(0) and chi(2) is None


def test_local_component_factorizes_character():
    chi = character_from_table(12, [(5, 1, 2), (7, 1, 2)])
    for n in (1, 5, 7, 11):
        prod = RootOfUnity(0)
        for p in (2, 3):
            prod = prod * local_component(chi, p)(n)
        assert prod == chi(n)


@given(st.integers(1, 2000), st.integers(1, 2000))
def test_idelic_character_trivial_on_positive_rationals(num, den):
    # product over all finite places; the archimedean factor is trivial on x > 0
    chi = level9chi_character()
    x = Fraction(num, den)
    places = set(factor(num).primes) | set(factor(den).primes) | {3}
    prod = RootOfUnity(0)
    for p in places:
        prod = prod * omega_p(chi, p, x)
    assert prod == RootOfUnity(0)


@given(st.fractions(max_denominator=10**6))
def test_additive_character_trivial_on_rationals(x):
    # prod_p psi_p(x) * e(x) = 1: the p-adic fractional parts add up to x mod 1
    prod = RootOfUnity(x)
    for p in factor(x.denominator).primes if x.denominator > 1 else ():
        prod = prod * psi_p(x, p)
    assert prod == RootOfUnity(0)
    assert padic_frac(Fraction(3, 1), 5) == 0
