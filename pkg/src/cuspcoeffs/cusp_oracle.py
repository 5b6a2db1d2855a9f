"""Fourier coefficients at a cusp, computed numerically from the q-expansion.

f|sigma^{-1} is sampled on the horizontal line Im z = y over one period
[0, delta); the DFT of the samples gives a_f(n; a) * kappa_f(n y / delta).
This module knows nothing about the local formulas and serves as the ground
truth they are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import divisors
from .cusps import Cusp, ScalingMatrix, extended_width, matmul, scaling_matrix
from .modform import NewformData, evaluate_many, kappa

__all__ = [
    "CuspExpansion",
    "CheckResult",
    "matrix_period",
    "slashed_values",
    "expand_at_cusp",
    "expand_with_matrix",
    "choose_height",
    "verify_periodicity",
    "verify_scaling_skew",
    "KAPPA_FLOOR",
]

KAPPA_FLOOR = 1e-12  # coefficients whose kappa falls below this are not divided out
EPS = 2.2e-16


@dataclass
class CuspExpansion:
    sigma: ScalingMatrix
    delta: int
    y: float
    coefficients: dict  # n -> a_f(n; a), resolved n only
    modes: dict  # n -> raw DFT value a_f(n; a) kappa(n y / delta), every sampled |n| <= n_max
    unresolved: list
    residual: float  # reconstruction error at off-grid points, absolute
    alias_diff: float  # max change between J and 2J samples, relative to max(|a|, n^{(k-1)/2} delta^{-k/2})
    n_samples: int
    sample_max: float
    cusp: Cusp | None = None
    error_estimate: dict = field(default_factory=dict)  # n -> predicted absolute error

    def a(self, n: int) -> complex:
        return self.coefficients[n]


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    details: dict = field(default_factory=dict)


def matrix_period(f: NewformData, sigma: ScalingMatrix) -> int:
    """Least t >= 1 with sigma^{-1} n(t) sigma in Gamma_0(N) and chi of its lower-right entry equal to 1."""
    N = f.level
    c = sigma.q
    if c == 0:
        return 1
    w = N // math.gcd(c * c, N)
    t = w
    while True:
        g = matmul(matmul(sigma.sigma_inv, (1, t, 0, 1)), sigma.sigma)
        assert g[2] % N == 0
        v = f.character(g[3])
        if v is not None and v.turn == 0:
            return t
        t += w


def slashed_values(f: NewformData, sigma: ScalingMatrix, z: np.ndarray) -> np.ndarray:
    """(f|_k sigma^{-1})(z) for sigma^{-1} in SL_2(Z)."""
    a, b, c, d = sigma.sigma_inv
    z = np.asarray(z, dtype=complex)
    if c == 0:
        return evaluate_many(f, (a * z + b) / d) * float(d) ** (-f.weight)
    cz = c * z + d
    w = a / c - 1.0 / (c * cz)
    return evaluate_many(f, w) * cz ** (-f.weight)


def window_start(sigma: ScalingMatrix, period: float) -> float:
    """Start of the sampling window of length ``period``, centred on the pole -d/c of the slash factor.

    There |cz + d| stays below |c| period/2 + ..., which keeps Im(sigma^{-1} z) as large as possible.
    """
    a, b, c, d = sigma.sigma_inv
    if c == 0:
        return 0.0
    return float(math.floor(-d / c - period / 2))


def _dft(F: np.ndarray) -> np.ndarray:
    return np.fft.fft(F) / len(F)


def _shift_phase(J: int, x0: float, period: float) -> np.ndarray:
    freq = np.fft.fftfreq(J, 1.0 / J)  # signed mode index for each DFT slot
    return np.exp(-2j * np.pi * freq * x0 / period)


def _mode(c: np.ndarray, n: int) -> complex:
    return complex(c[n % len(c)])


def _sample_count(n_max: int, delta: int, y: float, oversample: int) -> int:
    # aliasing of mode n by mode n + J is damped by exp(-2 pi J y / delta)
    need = max(2 * oversample * n_max, int(math.ceil(45.0 * delta / (2 * math.pi * y))), 64)
    return 1 << (need - 1).bit_length()


def choose_height(f: NewformData, sigma: ScalingMatrix, delta: int, n_max: int) -> float:
    """Pick y so that the predicted relative error of a_f(n; a), n <= n_max, is smallest.

    Model: absolute error of a DFT mode ~ EPS * max|F| * sqrt(#terms); dividing
    by kappa(n y / delta) and comparing with the trivial size n^{(k-1)/2} delta^{-k/2}.
    """
    k = f.weight
    best = None
    for L in (3.0, 5.0, 7.0, 9.0, 12.0, 15.0, 18.0, 22.0, 26.0):
        y = L * delta / (2 * math.pi * n_max)
        x = window_start(sigma, delta) + (np.arange(256) + 0.5) * delta / 256
        try:
            F = slashed_values(f, sigma, x + 1j * y)
        except ValueError:
            continue
        fmax = float(np.max(np.abs(F)))
        worst = 0.0
        for n in (1, max(1, n_max // 2), n_max):
            size = max(n, 1) ** ((k - 1) / 2) * delta ** (-k / 2)
            worst = max(worst, 1e3 * EPS * fmax * math.exp(2 * math.pi * n * y / delta) / size)
        if best is None or worst < best[0]:
            best = (worst, y)
    if best is None:
        raise ValueError("no admissible height: not enough stored coefficients")
    return best[1]


def expand_with_matrix(
    f: NewformData,
    sigma: ScalingMatrix,
    n_max: int,
    y: float | None = None,
    delta: int | None = None,
    oversample: int = 4,
    period_multiple: int = 1,
) -> CuspExpansion:
    """Expansion of f|sigma^{-1} in e(n z / delta), for n up to n_max.

    ``period_multiple`` samples over c * delta instead (used to check that
    modes off the lattice (1/delta) Z vanish); coefficient indices then refer
    to frequencies n / (c delta).
    """
    if delta is None:
        delta = matrix_period(f, sigma)
    period = delta * period_multiple
    nn = n_max * period_multiple
    if y is None:
        y = choose_height(f, sigma, period, nn)
    J = _sample_count(nn, period, y, oversample)
    x0 = window_start(sigma, period)
    x2 = np.arange(2 * J) * (period / (2 * J))
    F2 = slashed_values(f, sigma, x0 + x2 + 1j * y)
    F = F2[::2]
    # undo the window shift: mode n picks up e(n x0 / period)
    c1 = _dft(F) * _shift_phase(J, x0, period)
    c2 = _dft(F2) * _shift_phase(2 * J, x0, period)
    kern = f.kernel()
    coeffs, modes, unresolved, errs = {}, {}, [], {}
    fmax = float(np.max(np.abs(F2)))
    alias = 0.0
    for n in range(-nn, nn + 1):
        mode = _mode(c1, n)
        modes[n] = mode
        if n == 0:
            continue
        kv = float(kappa(kern, np.array([n * y / period]))[0])
        if abs(kv) < KAPPA_FLOOR:
            if f.kind != "holomorphic" or n > 0:
                unresolved.append(n)
            continue
        coeffs[n] = mode / kv
        errs[n] = 10 * EPS * fmax * math.sqrt(J) / abs(kv)
        typical = abs(n) ** ((f.weight - 1) / 2) * delta ** (-f.weight / 2)
        alias = max(alias, abs(_mode(c2, n) - mode) / abs(kv) / max(abs(coeffs[n]), typical))
    # reconstruction at the odd (off-grid) points of the 2J grid
    xo = x0 + x2[1::2]
    idx = np.arange(-(J // 2), J // 2)
    modes_full = c1[idx % J]
    recon = np.exp(2j * np.pi * np.outer(xo[:64] if len(xo) > 64 else xo, idx) / period) @ modes_full
    residual = float(np.max(np.abs(recon - F2[1::2][: len(recon)])))
    return CuspExpansion(
        sigma=sigma,
        delta=delta,
        y=y,
        coefficients=coeffs,
        modes=modes,
        unresolved=unresolved,
        residual=residual,
        alias_diff=alias,
        n_samples=J,
        sample_max=fmax,
        error_estimate=errs,
    )


def expand_at_cusp(
    f: NewformData,
    cusp: Cusp,
    n_max: int,
    y: float | None = None,
    sigma: ScalingMatrix | None = None,
    oversample: int = 4,
) -> CuspExpansion:
    """a_f(n; cusp) for 1 <= |n| <= n_max (negative n only for Maass forms)."""
    if cusp.level != f.level:
        raise ValueError("cusp level differs from the form's level")
    if sigma is None:
        sigma = scaling_matrix(cusp)
    delta = extended_width(f.level, f.conductor, cusp.q).delta
    exp = expand_with_matrix(f, sigma, n_max, y=y, delta=delta, oversample=oversample)
    exp.cusp = cusp
    return exp


def verify_periodicity(
    f: NewformData, sigma: ScalingMatrix, delta: int, y: float = 0.5, n_points: int = 32, tol: float = 1e-8
) -> CheckResult:
    """(f|sigma^{-1})(z + delta) = (f|sigma^{-1})(z) holds, and fails for every proper divisor of delta."""
    rng = np.random.default_rng(12345)
    x = rng.uniform(0, delta, n_points)
    z = x + 1j * y
    base = slashed_values(f, sigma, z)
    scale = float(np.max(np.abs(base)))
    shifted = slashed_values(f, sigma, z + delta)
    res = float(np.max(np.abs(shifted - base))) / scale
    divisor_res = {}
    for t in divisors(delta):
        if t == delta:
            continue
        other = slashed_values(f, sigma, z + t)
        divisor_res[t] = float(np.max(np.abs(other - base))) / scale
    passed = res < tol and all(r > tol for r in divisor_res.values())
    return CheckResult(
        "periodicity", passed, res, {"delta": delta, "proper_divisor_residuals": divisor_res}
    )


def verify_scaling_skew(
    f: NewformData,
    cusp: Cusp,
    gamma: tuple,
    m: int,
    n_max: int = 20,
    tol: float = 1e-8,
    sigma: ScalingMatrix | None = None,
) -> CheckResult:
    """tau^{-1} = gamma sigma^{-1} n(m) gives coefficients skewed by chi(gamma) e(n m / delta)."""
    a, b, c, d = gamma
    if a * d - b * c != 1 or c % f.level:
        raise ValueError("gamma must lie in Gamma_0(N)")
    if sigma is None:
        sigma = scaling_matrix(cusp)
    delta = extended_width(f.level, f.conductor, cusp.q).delta
    t = matmul(matmul(gamma, sigma.sigma_inv), (1, m, 0, 1))
    tau = ScalingMatrix(*t)
    e1 = expand_with_matrix(f, sigma, n_max, delta=delta)
    e2 = expand_with_matrix(f, tau, n_max, delta=delta, y=e1.y)
    chi_g = f.character.value(d)
    worst = 0.0
    for n, v in e1.coefficients.items():
        if n <= 0 and f.kind == "holomorphic":
            continue
        pred = chi_g * np.exp(2j * np.pi * n * m / delta) * v
        scale = max(abs(v), abs(n) ** ((f.weight - 1) / 2) * delta ** (-f.weight / 2))
        worst = max(worst, abs(e2.coefficients[n] - pred) / scale)
    return CheckResult("scaling_skew", worst < tol, worst, {"m": m, "gamma": list(gamma)})
