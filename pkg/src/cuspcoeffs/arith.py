"""Exact integer arithmetic and Dirichlet characters.

Character values are stored as exact roots of unity, i.e. rationals modulo 1
(``RootOfUnity(Fraction(1, 6))`` is ``e(1/6)``), and only converted to complex
floats when a caller asks for ``complex(...)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

__all__ = [
    "Factored",
    "RootOfUnity",
    "DirichletCharacter",
    "factor",
    "divisors",
    "vp",
    "coprime_part",
    "ppart",
    "crt",
    "inverse_mod",
    "euler_phi",
    "lcm",
    "is_prime",
    "primes_up_to",
    "padic_frac",
    "padic_residue",
    "character_from_table",
    "trivial_character",
    "unit_group_generators",
    "induce_down",
    "local_component",
    "omega_p",
    "psi_p",
]


# ---------------------------------------------------------------------------
# integers


def lcm(*args: int) -> int:
    out = 1
    for a in args:
        out = out * a // math.gcd(out, a)
    return out


def inverse_mod(a: int, m: int) -> int:
    if m == 1:
        return 0
    return pow(a, -1, m)


def crt(residues: Iterable[int], moduli: Iterable[int]) -> tuple[int, int]:
    """Solve x = r_i mod m_i for pairwise coprime moduli; returns (x, M)."""
    x, M = 0, 1
    for r, m in zip(residues, moduli):
        if math.gcd(M, m) != 1:
            raise ValueError("crt moduli must be pairwise coprime")
        t = ((r - x) * inverse_mod(M, m)) % m
        x += M * t
        M *= m
    return x % M, M


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        c = rng.randrange(1, n)
        f = lambda x: (x * x + c) % n  # noqa: E731
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


@dataclass(frozen=True)
class Factored:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"non-canonical factorization {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors {self.factors} do not multiply to {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        return dict(self.factors).get(p, 0)


@lru_cache(maxsize=4096)
def factor(n: int) -> Factored:
    if n < 1:
        raise ValueError("factor expects a positive integer")
    if n > 2**63:
        raise ValueError("factor is limited to n <= 2**63")
    counts: dict[int, int] = {}
    m = n
    for p in range(2, 1000):
        if p * p > m:
            break
        while m % p == 0:
            counts[p] = counts.get(p, 0) + 1
            m //= p
    stack = [m] if m > 1 else []
    while stack:
        x = stack.pop()
        if is_prime(x):
            counts[x] = counts.get(x, 0) + 1
            continue
        d = _pollard_rho(x)
        stack.extend([d, x // d])
    return Factored(n, tuple(sorted(counts.items())))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factor(n).factors:
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factor(n).factors:
        out = out // p * (p - 1)
    return out


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, v in enumerate(sieve) if v]


def vp(n: int | Fraction, p: int) -> int:
    """p-adic valuation of a nonzero integer or rational."""
    if n == 0:
        raise ValueError("vp(0) is undefined")
    if isinstance(n, Fraction):
        return vp(n.numerator, p) - vp(n.denominator, p)
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def ppart(n: int, N: int) -> int:
    """(n, N^oo): the largest divisor of n supported on primes of N."""
    n = abs(n)
    out = 1
    for p in factor(N).primes if N > 1 else ():
        while n % p == 0:
            n //= p
            out *= p
    return out


def coprime_part(n: int, N: int) -> tuple[int, int]:
    """Split n = n0 * n1 with (n0, N) = 1 and n1 | N^oo."""
    if n < 1:
        raise ValueError("coprime_part expects n >= 1")
    n1 = ppart(n, N)
    return n // n1, n1


def padic_residue(x: Fraction | int, p: int, k: int) -> int:
    """Residue of a p-adic integer x (rational with p-free denominator) mod p^k."""
    x = Fraction(x)
    if x.denominator % p == 0:
        raise ValueError(f"{x} is not p-integral at p={p}")
    m = p**k
    return (x.numerator * inverse_mod(x.denominator % m, m)) % m if m > 1 else 0


def padic_frac(x: Fraction | int, p: int) -> Fraction:
    """The p-adic fractional part {x}_p in [0, 1), a rational with p-power denominator."""
    x = Fraction(x)
    e = vp(x.denominator, p)
    if e == 0:
        return Fraction(0)
    pe = p**e
    rest = x.denominator // pe
    num = (x.numerator * inverse_mod(rest % pe, pe)) % pe
    return Fraction(num, pe)


# ---------------------------------------------------------------------------
# roots of unity


@dataclass(frozen=True, order=True)
class RootOfUnity:
    """e(turn) with turn a rational reduced into [0, 1)."""

    turn: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        t = Fraction(self.turn)
        object.__setattr__(self, "turn", t - math.floor(t))

    @classmethod
    def of(cls, num: int, den: int) -> "RootOfUnity":
        return cls(Fraction(num, den))

    @property
    def num(self) -> int:
        return self.turn.numerator

    @property
    def den(self) -> int:
        return self.turn.denominator

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        if not isinstance(other, RootOfUnity):
            return NotImplemented
        return RootOfUnity(self.turn + other.turn)

    def __pow__(self, k: int) -> "RootOfUnity":
        return RootOfUnity(self.turn * k)

    def conjugate(self) -> "RootOfUnity":
        return RootOfUnity(-self.turn)

    inverse = conjugate

    def __complex__(self) -> complex:
        # exact values on the axes keep trivial characters bit-exact
        t = self.turn
        if t == 0:
            return 1 + 0j
        if t == Fraction(1, 2):
            return -1 + 0j
        if t == Fraction(1, 4):
            return 1j
        if t == Fraction(3, 4):
            return -1j
        ang = 2 * math.pi * float(t)
        return complex(math.cos(ang), math.sin(ang))

    def __repr__(self) -> str:
        return f"e({self.turn})"


ONE = RootOfUnity()


# ---------------------------------------------------------------------------
# Dirichlet characters


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod ``modulus`` with an exact value table."""

    modulus: int
    table: tuple[tuple[int, Fraction], ...]  # sorted (residue, turn) for residues coprime to modulus
    conductor: int

    @property
    def values(self) -> dict[int, RootOfUnity]:
        return {r: RootOfUnity(t) for r, t in self.table}

    def __call__(self, n: int) -> RootOfUnity | None:
        """Exact value, or None when gcd(n, modulus) > 1."""
        return self._dict().get(n % self.modulus)

    def _dict(self) -> dict[int, RootOfUnity]:
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = {r: RootOfUnity(t) for r, t in self.table}
            object.__setattr__(self, "_cache", cache)
        return cache

    def value(self, n: int) -> complex:
        """Complex value, 0 off the unit group."""
        v = self(n)
        return 0j if v is None else complex(v)

    def is_trivial(self) -> bool:
        return self.conductor == 1

    @property
    def order(self) -> int:
        return lcm(*(Fraction(t).denominator for _, t in self.table)) if self.table else 1

    def parity(self) -> int:
        """0 for even, 1 for odd."""
        v = self(-1)
        return 0 if v is None or v.turn == 0 else 1

    def conjugate(self) -> "DirichletCharacter":
        table = tuple((r, (-t) % 1) for r, t in self.table)
        return DirichletCharacter(self.modulus, table, self.conductor)

    def primitive(self) -> "DirichletCharacter":
        return induce_down(self, self.conductor)

    def extend(self, modulus: int) -> "DirichletCharacter":
        """The character mod a multiple of the modulus induced from this one."""
        if modulus % self.modulus:
            raise ValueError("extend needs a multiple of the modulus")
        d = self._dict()
        table = tuple(
            (r, d[r % self.modulus].turn) for r in range(modulus) if math.gcd(r, modulus) == 1
        )
        return DirichletCharacter(modulus, table, self.conductor)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        m = lcm(self.modulus, other.modulus)
        a, b = self.extend(m)._dict(), other.extend(m)._dict()
        table = tuple((r, (a[r] * b[r]).turn) for r in sorted(a))
        return DirichletCharacter(m, table, _conductor(m, dict(table)))

    def generator_values(self) -> list[tuple[int, int, int]]:
        """[(g, num, den)] on a generating set of (Z/M)^x, as in the newform JSON format."""
        d = self._dict()
        return [(g, d[g].num, d[g].den) for g in unit_group_generators(self.modulus)]


def _unit_residues(m: int) -> list[int]:
    return [r for r in range(m) if math.gcd(r, m) == 1] if m > 1 else [0]


def unit_group_generators(m: int) -> list[int]:
    """CRT-lifted generators of the prime-power factors of (Z/m)^x."""
    if m <= 2:
        return []
    gens = []
    fac = factor(m)
    for p, e in fac.factors:
        pe = p**e
        other = m // pe
        local: list[int] = []
        if p == 2:
            if e >= 2:
                local.append(pe - 1)
            if e >= 3:
                local.append(5)
        else:
            g = next(
                g for g in range(2, pe)
                if math.gcd(g, p) == 1 and _mult_order(g, pe) == euler_phi(pe)
            )
            local.append(g)
        for g in local:
            x, _ = crt([g, 1], [pe, other])
            gens.append(x)
    return gens


def _mult_order(g: int, m: int) -> int:
    k, x = 1, g % m
    while x != 1:
        x = x * g % m
        k += 1
    return k


def _conductor(modulus: int, table: dict[int, Fraction]) -> int:
    for f in divisors(modulus):
        if all(t == 0 for r, t in table.items() if r % f == 1 % f):
            return f
    return modulus


def character_from_table(
    modulus: int, generator_values: Iterable[tuple[int, int, int]] | dict[int, Fraction]
) -> DirichletCharacter:
    """Build the full value table from values on generators.

    ``generator_values`` is ``[(g, num, den), ...]`` meaning chi(g) = e(num/den),
    or a mapping ``g -> Fraction``. The assignment is closed under multiplication;
    a residue reached twice with different values raises ValueError.
    """
    if modulus < 1:
        raise ValueError("modulus must be positive")
    if isinstance(generator_values, dict):
        gens = {g % modulus: Fraction(t) % 1 for g, t in generator_values.items()}
    else:
        gens = {}
        for g, num, den in generator_values:
            t = Fraction(num, den) % 1
            if gens.get(g % modulus, t) != t:
                raise ValueError(f"generator {g} assigned two values")
            gens[g % modulus] = t
    for g in gens:
        if math.gcd(g, modulus) != 1:
            raise ValueError(f"generator {g} is not a unit mod {modulus}")
    one = 1 % modulus
    if one in gens and gens[one] != 0:
        raise ValueError("chi(1) must be 1")
    table: dict[int, Fraction] = {one: Fraction(0)}
    frontier = [one]
    while frontier:
        x = frontier.pop()
        for g, t in gens.items():
            y = x * g % modulus
            val = (table[x] + t) % 1
            if y in table:
                if table[y] != val:
                    raise ValueError(
                        f"inconsistent generator values: residue {y} gets e({table[y]}) and e({val})"
                    )
            else:
                table[y] = val
                frontier.append(y)
    expected = euler_phi(modulus) if modulus > 1 else 1
    if len(table) != expected:
        raise ValueError(
            f"generators span {len(table)} of the {expected} units mod {modulus}"
        )
    return DirichletCharacter(modulus, tuple(sorted(table.items())), _conductor(modulus, table))


def trivial_character(modulus: int = 1) -> DirichletCharacter:
    return character_from_table(modulus, {g: Fraction(0) for g in unit_group_generators(modulus)})


def induce_down(chi: DirichletCharacter, f: int) -> DirichletCharacter:
    """The character mod f (a multiple of the conductor) that chi factors through."""
    if chi.modulus % f or f % chi.conductor:
        raise ValueError("f must divide the modulus and be a multiple of the conductor")
    d = chi._dict()
    table = {}
    for r in _unit_residues(f):
        lift = next(x for x in range(r, chi.modulus + f, f) if math.gcd(x, chi.modulus) == 1)
        table[r % f] = d[lift % chi.modulus].turn
    return DirichletCharacter(f, tuple(sorted(table.items())), chi.conductor)


def local_component(chi: DirichletCharacter, p: int) -> DirichletCharacter:
    """Primitive p-part of chi; the product over p of these recovers chi via CRT."""
    prim = chi.primitive()
    c = prim.modulus
    e = vp(c, p) if c > 1 else 0
    if e == 0:
        return trivial_character(1)
    pe = p**e
    other = c // pe
    d = prim._dict()
    table = {}
    for r in _unit_residues(pe):
        x, _ = crt([r, 1], [pe, other])
        table[r] = d[x].turn
    return DirichletCharacter(pe, tuple(sorted(table.items())), pe)


# ---------------------------------------------------------------------------
# local characters at p


def omega_p(chi: DirichletCharacter, p: int, x: Fraction | int) -> RootOfUnity:
    """p-component of the idelic character attached to chi, at x in Q_p^x.

    On units the idelic character is chi^{-1} composed with reduction, so
    omega_p(u) = conj(chi_p(u)) with chi_p the primitive p-part of chi; on the
    uniformizer omega_p(p) = prod over the other primes l of chi_l(p).
    """
    x = Fraction(x)
    if x == 0:
        raise ValueError("omega_p is defined on Q_p^x")
    k = vp(x, p)
    u = x / Fraction(p) ** k
    out = ONE
    chi_p = local_component(chi, p)
    if chi_p.modulus > 1:
        out = chi_p(padic_residue(u, p, vp(chi_p.modulus, p))).conjugate()
    if k:
        out = out * (_omega_at_uniformizer(chi, p) ** k)
    return out


@lru_cache(maxsize=1024)
def _omega_at_uniformizer(chi: DirichletCharacter, p: int) -> RootOfUnity:
    out = ONE
    c = chi.conductor
    if c == 1:
        return out
    for ell in factor(c).primes:
        if ell != p:
            out = out * local_component(chi, ell)(p)
    return out


def psi_p(x: Fraction | int, p: int) -> RootOfUnity:
    """Additive character of Q_p, e(-{x}_p); trivial exactly on Z_p."""
    return RootOfUnity(-padic_frac(x, p))
