"""Newforms given by q-expansion data: evaluation, slash action, file format.

Evaluation near the real axis goes through a Gamma_0(N) reduction that moves
each point to the highest available height in its orbit before summing the
Fourier series, so the number of terms stays moderate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .arith import (
    DirichletCharacter,
    character_from_table,
    divisors,
    factor,
    primes_up_to,
    trivial_character,
)

__all__ = [
    "FORMAT_VERSION",
    "NewformData",
    "KappaKernel",
    "NewformError",
    "InsufficientTerms",
    "kappa",
    "bessel_k_imag",
    "evaluate",
    "evaluate_many",
    "slash",
    "slash_many",
    "load_newform",
    "save_newform",
    "newform_from_dict",
    "newform_to_dict",
    "validate",
    "conjugate_form",
]

FORMAT_VERSION = 1
EVAL_TOL = 1e-16  # relative truncation target used when choosing n_terms


class NewformError(ValueError):
    """A newform data file violates one of the load-time invariants."""


class InsufficientTerms(ValueError):
    """The requested point needs more Fourier coefficients than are available."""


@dataclass(frozen=True)
class NewformData:
    level: int
    weight: int
    character: DirichletCharacter
    coefficients: np.ndarray  # index n holds a_f(n); index 0 unused (0)
    kind: str = "holomorphic"
    parity: int = 0
    spectral_parameter: float = 0.0
    name: str = ""
    exact: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def n_max(self) -> int:
        return len(self.coefficients) - 1

    @property
    def conductor(self) -> int:
        return self.character.conductor

    def a(self, n: int) -> complex:
        if n < 1:
            if self.kind == "maass" and n < 0:
                return complex(self.coefficients[-n])
            return 0j
        if n > self.n_max:
            raise InsufficientTerms(f"a({n}) requested but only {self.n_max} coefficients stored")
        return complex(self.coefficients[n])

    def chi_N(self, n: int) -> complex:
        """chi induced to modulus N (zero on integers sharing a factor with N)."""
        if math.gcd(n, self.level) != 1:
            return 0j
        return self.character.value(n)

    def lam(self, n: int) -> complex:
        """Hecke-normalised eigenvalue a_f(n) / n^{(k-1)/2}."""
        return self.a(n) / n ** ((self.weight - 1) / 2)

    def kernel(self) -> "KappaKernel":
        return KappaKernel(self.kind, self.weight, self.parity, self.spectral_parameter)


@dataclass(frozen=True)
class KappaKernel:
    kind: str = "holomorphic"
    weight: int = 0
    parity: int = 0
    spectral_parameter: float = 0.0


def bessel_k_imag(t: float, x, h: float | None = None):
    """K_{it}(x) for real t and x > 0, by the trapezoid rule on
    int_0^oo exp(-x cosh u) cos(t u) du (doubly exponential decay in u)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("K_{it}(x) needs x > 0")
    xmin = float(np.min(x))
    # cut where x cosh U exceeds 745 + log-ish margin, so the integrand underflows
    U = math.acosh(max(1.0, 750.0 / xmin)) if xmin < 750 else 1.0
    U = max(U, 1.0)
    if h is None:
        h = min(0.05, 0.25 / (abs(t) + 1.0))
    u = np.arange(0.0, U + h, h)
    w = np.full(u.shape, h)
    w[0] = h / 2
    integrand = np.exp(-np.multiply.outer(x, np.cosh(u))) * np.cos(t * u)
    return integrand @ w


def kappa(kernel: KappaKernel, y):
    """The weight function kappa_f(y) of the Fourier expansion."""
    y = np.asarray(y, dtype=float)
    if kernel.kind == "holomorphic":
        return np.where(y > 0, np.exp(-2 * np.pi * np.where(y > 0, y, 0.0)), 0.0)
    if np.any(y == 0):
        raise ValueError("the Maass kernel is undefined at y = 0")
    ay = np.abs(y)
    sgn = np.sign(y) ** kernel.parity
    flat = bessel_k_imag(kernel.spectral_parameter, (2 * np.pi * ay).ravel()).reshape(ay.shape)
    return sgn * np.sqrt(ay) * flat


# ---------------------------------------------------------------------------
# evaluation


def _terms_needed(f: NewformData, y: float, tol: float = EVAL_TOL) -> int:
    """Smallest T whose holomorphic tail bound, relative to 1, is below tol."""
    if y <= 0:
        raise ValueError("evaluation needs Im z > 0")
    rho = math.exp(-2 * math.pi * y)
    k = f.weight
    T = max(int(math.ceil((-math.log(tol) + 0.5 * k * math.log(1 + 1 / y)) / (2 * math.pi * y))), 1)
    while _tail_bound(k, T, rho) > tol:
        T = int(T * 1.2) + 1
    return T


def _tail_bound(k: int, T: int, rho: float) -> float:
    """Bound for sum_{n > T} 2 n^{k/2} rho^n, from |a(n)| <= d(n) n^{(k-1)/2} <= 2 n^{k/2}."""
    t1 = 2 * (T + 1) ** (k / 2) * rho ** (T + 1)
    r = ((T + 2) / (T + 1)) ** (k / 2) * rho
    if r >= 1:
        return math.inf
    return t1 / (1 - r)


def _series(f: NewformData, w: np.ndarray, T: int) -> np.ndarray:
    """Truncated Fourier sum at points w (vector), first T terms."""
    if T > f.n_max:
        raise InsufficientTerms(f"{T} terms needed, {f.n_max} available (Im z too small)")
    if f.kind == "holomorphic":
        q = np.exp(2j * np.pi * w)
        acc = np.full(w.shape, complex(f.coefficients[T]))
        for n in range(T - 1, 0, -1):
            acc = acc * q + f.coefficients[n]
        return acc * q
    x, y = w.real, w.imag
    out = np.zeros(w.shape, dtype=complex)
    kern = f.kernel()
    for n in range(1, T + 1):
        kp = kappa(kern, n * y)
        km = kappa(kern, -n * y)
        an = f.coefficients[n]
        out += an * (kp * np.exp(2j * np.pi * n * x) + km * np.exp(-2j * np.pi * n * x))
    return out


def evaluate(f: NewformData, z: complex, n_terms: int | None = None, tol: float = EVAL_TOL):
    """f(z) by the Fourier series, with a tail bound (holomorphic kind).

    Returns (value, tail_bound). Raises InsufficientTerms when the stored
    coefficients cannot reach the requested tolerance at this height.
    """
    y = z.imag
    if y <= 0:
        raise ValueError("evaluation needs Im z > 0")
    if n_terms is None:
        n_terms = _terms_needed(f, y, tol)
    if n_terms > f.n_max:
        raise InsufficientTerms(f"y={y} needs {n_terms} terms for tol={tol}, have {f.n_max}")
    if f.kind == "holomorphic" and y * n_terms < 3 and n_terms < f.n_max:
        raise InsufficientTerms(f"y * n_terms = {y * n_terms:.3g} < 3 is below the validity region")
    val = _series(f, np.array([complex(z)]), n_terms)[0]
    bound = _tail_bound(f.weight, n_terms, math.exp(-2 * math.pi * y)) if f.kind == "holomorphic" else float("nan")
    return complex(val), bound


def _reduce_gamma0(N: int, w: np.ndarray):
    """For each w find (a, b, c, d) in Gamma_0(N) (up to sign) raising Im as far as a
    bounded search allows. Returns arrays a, b, c, d."""
    x, y = w.real, w.imag
    n = len(w)
    best_c = np.zeros(n, dtype=np.int64)
    best_d = np.ones(n, dtype=np.int64)
    best_im = y.copy()
    cmax = int(1.0 / max(float(y.min()), 1e-12)) + 1
    for c in range(N, cmax + 1, N):
        # a bottom row (c, d) gives Im <= 1 / (c^2 y), so larger c cannot help once this fails
        active = c * c * y * best_im < 1.0
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        cx = c * x[idx]
        base = np.floor(-cx).astype(np.int64)
        for off in (-1, 0, 1, 2):
            d = base + off
            ok = np.gcd(d, c) == 1
            im = y[idx] / ((cx + d) ** 2 + (c * y[idx]) ** 2)
            better = ok & (im > best_im[idx])
            sel = idx[better]
            best_im[sel] = im[better]
            best_c[sel] = c
            best_d[sel] = d[better]
    a = np.empty(n, dtype=object)
    b = np.empty(n, dtype=object)
    for i in range(n):
        c, d = int(best_c[i]), int(best_d[i])
        if c == 0:
            a[i], b[i] = 1, 0
        else:
            ai = pow(d, -1, c)
            a[i], b[i] = ai, (ai * d - 1) // c
    return a, b, best_c.astype(object), best_d.astype(object)


def evaluate_many(f: NewformData, w: Sequence[complex] | np.ndarray, tol: float = EVAL_TOL) -> np.ndarray:
    """f at many points of the upper half-plane, using Gamma_0(N) reduction.

    f(w) = chi(d)^{-1} (c w + d)^{-k} f(gamma w) for gamma = (a, b; c, d) in Gamma_0(N).
    """
    w = np.asarray(w, dtype=complex).ravel()
    if np.any(w.imag <= 0):
        raise ValueError("evaluation needs Im z > 0")
    a, b, c, d = _reduce_gamma0(f.level, w)
    af = a.astype(float)
    bf = b.astype(float)
    cf = c.astype(float)
    df = d.astype(float)
    # gamma w computed as a/c - 1/(c (c w + d)) to avoid cancellation when c > 0
    cwd = cf * w + df
    gw = np.where(cf == 0, w + bf, 0j)
    nz = cf != 0
    gw[nz] = af[nz] / cf[nz] - 1.0 / (cf[nz] * cwd[nz])
    gw = gw.real - np.floor(gw.real) + 1j * gw.imag
    T = _terms_needed(f, float(gw.imag.min()), tol)
    if T > f.n_max and _tail_ok(f, gw, f.n_max):
        T = f.n_max
    vals = _series(f, gw, T) * cwd ** (-f.weight)
    chi = np.array([f.character.value(int(di)) for di in d])
    return vals / chi


def _tail_ok(f: NewformData, gw: np.ndarray, T: int) -> bool:
    return _tail_bound(f.weight, T, math.exp(-2 * math.pi * float(gw.imag.min()))) < 1e-12


def slash_many(f: NewformData, gamma, z) -> np.ndarray:
    """(f|_k gamma)(z) = det^{k/2} (c z + d)^{-k} f(gamma z) for integer gamma with det > 0."""
    a, b, c, d = (int(v) for v in gamma)
    det = a * d - b * c
    if det <= 0:
        raise ValueError("slash needs det > 0")
    z = np.asarray(z, dtype=complex).ravel()
    cz = c * z + d
    if c == 0:
        gz = (a * z + b) / d
    else:
        gz = a / c - det / (c * cz)
    vals = evaluate_many(f, gz)
    k = f.weight
    return det ** (k / 2) * cz ** (-k) * vals


def slash(f: NewformData, gamma, z: complex) -> complex:
    return complex(slash_many(f, gamma, [z])[0])


# ---------------------------------------------------------------------------
# file format and validation


def newform_to_dict(f: NewformData) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "name": f.name,
        "level": f.level,
        "weight": f.weight,
        "kind": f.kind,
    }
    if f.kind == "maass":
        out["parity"] = f.parity
        out["spectral_parameter"] = f.spectral_parameter
    out["character"] = {
        "modulus": f.character.modulus,
        "values_on_generators": [list(t) for t in f.character.generator_values()],
    }
    out["coefficients"] = [
        [n, float(c.real), float(c.imag)] for n, c in enumerate(f.coefficients) if n >= 1
    ]
    return out


def newform_from_dict(data: dict, check: bool = True) -> NewformData:
    try:
        level = int(data["level"])
        weight = int(data["weight"])
        kind = data.get("kind", "holomorphic")
        ch = data.get("character", {"modulus": 1, "values_on_generators": []})
        chi = character_from_table(int(ch["modulus"]), [tuple(v) for v in ch["values_on_generators"]])
        rows = data["coefficients"]
        n_max = max(int(r[0]) for r in rows)
        coeffs = np.zeros(n_max + 1, dtype=complex)
        seen = set()
        for r in rows:
            n = int(r[0])
            if n < 1 or n in seen:
                raise NewformError(f"coefficient index {n} is invalid or repeated")
            seen.add(n)
            coeffs[n] = complex(float(r[1]), float(r[2]))
        if len(seen) != n_max:
            raise NewformError("coefficients must cover 1..n_max without gaps")
    except NewformError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise NewformError(f"malformed newform data: {exc}") from exc
    f = NewformData(
        level=level,
        weight=weight,
        character=chi,
        coefficients=coeffs,
        kind=kind,
        parity=int(data.get("parity", 0)),
        spectral_parameter=float(data.get("spectral_parameter", 0.0)),
        name=str(data.get("name", "")),
    )
    if check:
        problems = validate(f)
        if problems:
            raise NewformError("; ".join(problems))
    return f


def load_newform(path: str | Path, check: bool = True) -> NewformData:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise NewformError(f"{path}: not valid JSON ({exc})") from exc
    return newform_from_dict(data, check=check)


def save_newform(f: NewformData, path: str | Path) -> None:
    Path(path).write_text(json.dumps(newform_to_dict(f)))


def validate(f: NewformData, rel_tol: float = 1e-9) -> list[str]:
    """Load-time invariants; returns a list of violations (empty when valid)."""
    problems = []
    chi = f.character
    if f.kind not in ("holomorphic", "maass"):
        problems.append(f"unknown kind {f.kind!r}")
    if f.level % chi.modulus and f.level % chi.conductor:
        problems.append(f"character modulus {chi.modulus} does not divide level {f.level}")
    if f.level % chi.conductor:
        problems.append(f"conductor {chi.conductor} does not divide level {f.level}")
    if f.n_max < 1 or abs(f.coefficients[1] - 1) > rel_tol:
        problems.append("a_f(1) != 1 (normalisation)")
    if f.kind == "holomorphic":
        if f.weight < 1:
            problems.append("holomorphic weight must be positive")
        elif chi.parity() != f.weight % 2:
            problems.append("character parity does not match chi(-1) = (-1)^k")
    else:
        if f.parity not in (0, 1):
            problems.append("Maass parity must be 0 or 1")
    if problems:
        return problems
    n_max = f.n_max
    a = f.coefficients
    scale = lambda n: max(1.0, n ** (f.weight / 2))  # noqa: E731
    for m in range(2, min(n_max, 100) + 1):
        for n in range(m + 1, min(n_max // m, 100) + 1):
            if math.gcd(m, n) == 1 and abs(a[m * n] - a[m] * a[n]) > rel_tol * scale(m * n) * 10:
                problems.append(f"multiplicativity fails at a({m})a({n}) != a({m * n})")
                return problems
    if f.kind == "holomorphic":
        for p in primes_up_to(min(n_max, 1000)):
            if f.level % p and abs(f.lam(p)) > 2 + 1e-6:
                problems.append(f"|lambda_f({p})| = {abs(f.lam(p)):.6g} exceeds the Deligne bound")
                return problems
    for p in primes_up_to(n_max):
        pk = p
        chip = f.chi_N(p) * p ** (f.weight - 1)
        while pk * p <= n_max:
            nxt = a[p] * a[pk] - chip * (a[pk // p] if pk > p else 1)
            if abs(a[pk * p] - nxt) > rel_tol * scale(pk * p) * 10:
                problems.append(f"Hecke recursion fails at p={p}, p^r={pk * p}")
                return problems
            pk *= p
    return problems


def conjugate_form(f: NewformData) -> NewformData:
    """The form with conjugated coefficients and character (the contragredient newform)."""
    exact = f.exact
    return NewformData(
        level=f.level,
        weight=f.weight,
        character=f.character.conjugate(),
        coefficients=np.conj(f.coefficients),
        kind=f.kind,
        parity=f.parity,
        spectral_parameter=f.spectral_parameter,
        name=(f.name + "~") if f.name else "",
        exact=None if exact is None else exact,
    )
