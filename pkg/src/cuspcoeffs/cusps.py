"""Cusps of Gamma_0(N): classes, widths, extended widths and scaling matrices.

A cusp is labelled by its denominator q | N and a class d mod (q, N/q); the
representative a/q satisfies a*d = 1 mod (q, N/q) and, except for the cusp 0,
gcd(a, N) = 1. The cusp at infinity has q = N and scaling matrix the identity.

Matrices are plain 4-tuples (a, b, c, d) meaning [[a, b], [c, d]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import DirichletCharacter, divisors, unit_group_generators, euler_phi, factor, inverse_mod, vp

__all__ = [
    "Cusp",
    "ScalingMatrix",
    "WidthData",
    "enumerate_cusps",
    "cusp_count",
    "width",
    "extended_width",
    "extended_width_for",
    "scaling_matrix",
    "adapted_scaling_matrix",
    "reduce_to_standard_form",
    "cusps_equivalent",
    "bruhat_decompose",
    "parse_cusp",
    "matmul",
    "count_cusps_bruteforce",
    "width_bruteforce",
    "period_bruteforce",
]

Matrix = tuple  # (a, b, c, d)


def matmul(x: Matrix, y: Matrix) -> Matrix:
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _class_modulus(N: int, q: int) -> int:
    return math.gcd(q, N // q)


@dataclass(frozen=True)
class Cusp:
    level: int
    q: int
    d_class: int
    a: int = field(compare=False)

    def __post_init__(self):
        if self.level < 1 or self.q < 1 or self.level % self.q:
            raise ValueError(f"cusp denominator {self.q} must divide the level {self.level}")
        m = _class_modulus(self.level, self.q)
        valid = self.d_class == 0 if m == 1 else (0 < self.d_class < m and math.gcd(self.d_class, m) == 1)
        if not valid:
            raise ValueError(f"class {self.d_class} is not a unit mod {m}")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError("representative numerator must be coprime to the denominator")

    @property
    def is_infinity(self) -> bool:
        return self.q == self.level

    @property
    def class_modulus(self) -> int:
        return _class_modulus(self.level, self.q)

    @property
    def fraction(self) -> Fraction | None:
        """a/q as a rational, or None for infinity."""
        return None if self.is_infinity else Fraction(self.a, self.q)

    def __str__(self) -> str:
        return "oo" if self.is_infinity else f"{self.a}/{self.q}"


@dataclass(frozen=True)
class ScalingMatrix:
    """sigma^{-1} = (a, b; q, d) in SL_2(Z); sigma = (d, -b; -q, a) maps the cusp a/q to oo."""

    a: int
    b: int
    q: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.q != 1:
            raise ValueError(f"scaling matrix {self.sigma_inv} does not have determinant 1")

    @property
    def sigma_inv(self) -> Matrix:
        return (self.a, self.b, self.q, self.d)

    @property
    def sigma(self) -> Matrix:
        return (self.d, -self.b, -self.q, self.a)

    def shifted(self, j: int) -> "ScalingMatrix":
        """n(j) * sigma^{-1}; leaves f|sigma^{-1} unchanged for 1-periodic f."""
        return ScalingMatrix(self.a + j * self.q, self.b + j * self.d, self.q, self.d)


@dataclass(frozen=True)
class WidthData:
    width: int
    delta: int
    d_pi_exponents: dict = field(hash=False)


def cusp_count(N: int) -> int:
    return sum(euler_phi(_class_modulus(N, q)) if _class_modulus(N, q) > 1 else 1 for q in divisors(N))


def _representative(N: int, q: int, d_class: int) -> int:
    if q == 1:
        return 0 if N > 1 else 1
    m = _class_modulus(N, q)
    target = inverse_mod(d_class, m) if m > 1 else 0
    a = target if target > 0 else m
    while math.gcd(a, N) != 1:
        a += m
    return a


def enumerate_cusps(N: int) -> list[Cusp]:
    """All cusps of Gamma_0(N), ordered by denominator then class; infinity is last."""
    if N < 1:
        raise ValueError("level must be positive")
    out = []
    for q in divisors(N):
        m = _class_modulus(N, q)
        classes = [x for x in range(m) if math.gcd(x, m) == 1] if m > 1 else [0]
        for d in classes:
            out.append(Cusp(N, q, d, _representative(N, q, d)))
    return out


def width(N: int, q: int) -> int:
    if q < 1 or N % q:
        raise ValueError(f"denominator {q} does not divide {N}")
    return N // math.gcd(q * q, N)


def _d_pi(N: int, M: int, q: int) -> dict[int, int]:
    out = {}
    for p in factor(N).primes:
        qp, Mp, Np = vp(q, p), (vp(M, p) if M > 1 else 0), vp(N, p)
        out[p] = max(2 * qp, Mp + qp, Np)
    return out


def extended_width(N: int, M: int, q: int) -> WidthData:
    """Width, extended width and the local exponents d_pi(q_p) for conductor M."""
    if M < 1 or N % M:
        raise ValueError(f"conductor {M} does not divide the level {N}")
    w = width(N, q)
    delta = w * M // math.gcd(q * w, M)
    lcm_form = math.lcm(M * q, q * q, N) // (q * q)
    if delta != lcm_form:
        raise AssertionError(f"extended width closed forms disagree: {delta} vs {lcm_form}")
    d_pi = _d_pi(N, M, q)
    prod = 1
    for p, e in d_pi.items():
        prod *= p**e
    if prod != delta * q * q:
        raise AssertionError("extended width disagrees with the local exponents")
    return WidthData(w, delta, d_pi)


def extended_width_for(cusp: Cusp, M: int) -> WidthData:
    return extended_width(cusp.level, M, cusp.q)


def scaling_matrix(cusp: Cusp) -> ScalingMatrix:
    """sigma^{-1} = (a, b; q, d) with the smallest nonnegative b; identity at infinity."""
    if cusp.is_infinity:
        return ScalingMatrix(1, 0, 0, 1)
    a, q = cusp.a, cusp.q
    if a == 0:
        return ScalingMatrix(0, -1, 1, 0)
    b = (-inverse_mod(q % a, a)) % a if a > 1 else 0
    d, r = divmod(1 + b * q, a)
    assert r == 0
    return ScalingMatrix(a, b, q, d)


def adapted_scaling_matrix(cusp: Cusp, M: int) -> ScalingMatrix:
    """sigma^{-1} = (a, b; q, d) with gcd(a, N) = 1 and d = a^{-1} mod delta*q.

    This normalisation makes the bar-inverse of a in the local formulas equal to d.
    For the cusp 0 the representative is moved to 1/1; infinity keeps the identity.
    """
    if cusp.is_infinity:
        return ScalingMatrix(1, 0, 0, 1)
    N, q = cusp.level, cusp.q
    a = cusp.a
    while math.gcd(a, N) != 1:
        a += q
    delta = extended_width(N, M, q).delta
    mod = delta * q
    d = inverse_mod(a % mod, mod) if mod > 1 else 1
    b, r = divmod(a * d - 1, q)
    assert r == 0
    return ScalingMatrix(a, b, q, d)


def _invariant(a: int, c: int, N: int) -> tuple[int, int]:
    """(q, class) of the cusp a/c; class is the d-class, a^{-1}(c/q)^{-1} mod (q, N/q)."""
    if math.gcd(a, c) != 1:
        raise ValueError(f"{a}/{c} is not in lowest terms")
    q = math.gcd(c, N)
    m = _class_modulus(N, q)
    if m == 1:
        return q, 0
    return q, inverse_mod((a * (c // q)) % m, m)


def reduce_to_standard_form(a: int, q: int, N: int) -> Cusp:
    """The enumerated cusp equivalent to a/q (q = 0 means infinity)."""
    if q < 0:
        a, q = -a, -q
    qq, cls = _invariant(a, q, N)
    return Cusp(N, qq, cls, _representative(N, qq, cls))


def cusps_equivalent(c1: tuple[int, int], c2: tuple[int, int], N: int) -> bool:
    """Whether fractions c1 = (a1, q1) and c2 = (a2, q2) lie in one Gamma_0(N)-orbit."""
    return _invariant(*_normal(c1), N) == _invariant(*_normal(c2), N)


def _normal(c: tuple[int, int]) -> tuple[int, int]:
    a, q = c
    return (-a, -q) if q < 0 else (a, q)


def parse_cusp(text: str, N: int) -> Cusp:
    s = text.strip().lower()
    if s in ("oo", "inf", "infinity", "∞", "1/0"):
        return reduce_to_standard_form(1, 0, N)
    if "/" in s:
        a, q = (int(x) for x in s.split("/"))
    else:
        a, q = int(s), 1
    g = math.gcd(a, q)
    return reduce_to_standard_form(a // g, q // g, N)


def bruhat_decompose(sigma: ScalingMatrix):
    """sigma = z(q) n(-d/q) a(1/q^2) w n(-a/q) with w = (0, 1; -1, 0), exact rationals.

    Returns the five factors as 4-tuples of Fractions, in product order.
    """
    a, b, q, d = sigma.sigma_inv
    if q == 0:
        raise ValueError("the cusp at infinity has no Bruhat cell")
    F = Fraction
    factors = (
        (F(q), F(0), F(0), F(q)),
        (F(1), F(-d, q), F(0), F(1)),
        (F(1, q * q), F(0), F(0), F(1)),
        (F(0), F(1), F(-1), F(0)),
        (F(1), F(-a, q), F(0), F(1)),
    )
    prod = factors[0]
    for m in factors[1:]:
        prod = matmul(prod, m)
    if prod != tuple(F(x) for x in sigma.sigma):
        raise AssertionError("Bruhat factors do not multiply back to sigma")
    return factors


# ---------------------------------------------------------------------------
# brute-force checks, independent of the closed forms above


def count_cusps_bruteforce(N: int) -> int:
    """Orbits of (c : d) in P^1(Z/N) under unit scaling and d -> d + c."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    if N == 1:
        return 1
    c, d = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    c, d = c.ravel(), d.ravel()
    g = np.gcd(np.gcd(c, d), N)
    ok = g == 1
    idx = c * N + d
    src, dst = [], []
    for u in unit_group_generators(N):
        src.append(idx[ok])
        dst.append(((u * c[ok]) % N) * N + (u * d[ok]) % N)
    src.append(idx[ok])
    dst.append(c[ok] * N + (c[ok] + d[ok]) % N)
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(N * N, N * N))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return len(np.unique(labels[idx[ok]]))


def width_bruteforce(N: int, sigma: ScalingMatrix, limit: int | None = None) -> int:
    """Least n >= 1 with sigma^{-1} n(n) sigma in Gamma_0(N)."""
    for n in range(1, (limit or N) + 1):
        g = matmul(matmul(sigma.sigma_inv, (1, n, 0, 1)), sigma.sigma)
        if g[2] % N == 0:
            return n
    raise ValueError("no width found below the limit")


def period_bruteforce(N: int, chi: DirichletCharacter, sigma: ScalingMatrix) -> int:
    """Least t >= 1 with sigma^{-1} n(t) sigma in Gamma_0(N) acting trivially through chi."""
    for t in range(1, N * N * chi.modulus + 1):
        g = matmul(matmul(sigma.sigma_inv, (1, t, 0, 1)), sigma.sigma)
        if g[2] % N == 0:
            v = chi(g[3])
            if v is not None and v.turn == 0:
                return t
    raise ValueError("no period found")
