"""Voronoi summation with an additive twist a/b at an arbitrary cusp, the closed-form
identity it implies for f(a/b + iy), and the average-bound experiment.

For a cusp a with sigma_a^{-1} = (p, s; q, r), g = (delta(a), b), x = a delta(a)/g and
xbar = x^{-1} mod b/g, the dual cusp is b = (D sigma_a)^{-1} oo with

    D = (xbar, (1 - x xbar)/(b/g); -b/g, x),

and the identity checked is

    sum_n e(n a/b) a_f(n; a) (n/delta_a)^{-(k-1)/2} F(n/delta_a)
      = g/b sum_{n != 0} e(-n xbar/(delta_b b/g)) a_f(n; b) (n/delta_b)^{-(k-1)/2} H F(n/(delta_b (b/g)^2)).

Here a_f(n; a) are the coefficients of f|sigma_a^{-1} in e(n z/delta_a). At a = oo
(g = 1) this is the classical twisted formula. For other cusps the prefactor g/b and
the argument n g^2/(delta_b b^2) are what the closed-form kernel F = x^{(k-1)/2} e(ixy)
forces: the left side is then (f|sigma_a^{-1})(x/(b/g) + iy), and D moves that point
to -xbar/(b/g) + i/((b/g)^2 y) with automorphy factor -i (b/g) y.

Dual coefficients are taken with respect to sigma_b^{-1} = sigma_a^{-1} D^{-1}. Moving
xbar by a multiple of b/g translates sigma_b and changes the twist by the matching
character, so the right side does not depend on that choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import inverse_mod
from .builtin import BUILTIN_NAMES, get_form
from .cusp_oracle import expand_with_matrix
from .cusps import (
    Cusp,
    ScalingMatrix,
    adapted_scaling_matrix,
    enumerate_cusps,
    extended_width,
    matmul,
    reduce_to_standard_form,
)
from .hankel import HankelParams, TestFunction, hankel_exp_kernel_closed_form, hankel_interpolant
from .modform import InsufficientTerms, NewformData, evaluate
from .whittaker import fit_local_constants, product_formula_array

__all__ = [
    "THETA",
    "DualCusp",
    "VoronoiReport",
    "IdentityReport",
    "BoundsTable",
    "dual_cusp",
    "relate_scaling_matrices",
    "coefficients_at",
    "fitted_local_params",
    "ensure_terms",
    "voronoi_lhs",
    "voronoi_rhs",
    "verify_voronoi",
    "closed_form_identity",
    "average_bound_experiment",
    "average_bound",
]

THETA = Fraction(7, 64)  # exponent towards Ramanujan in the average bound
MAX_ORACLE_TERMS = 20000
VORONOI_TOL = 1e-6
TAIL_TOL = 1e-10  # dual-sum truncation, relative to max(1, |LHS|)
NOISE_FLOOR = 1e-12  # |H| below this fraction of max|H| is quadrature noise


@dataclass(frozen=True)
class DualCusp:
    b: int
    sigma_a: ScalingMatrix
    sigma_b: ScalingMatrix  # sigma_b^{-1} = sigma_a^{-1} D^{-1}
    cusp_b: Cusp
    delta_a: int
    delta_b: int
    g: int
    x: int
    xbar: int

    @property
    def twist_modulus(self) -> int:
        """delta_b b / g, the denominator of the dual twist."""
        return self.delta_b * (self.b // self.g)

    @property
    def hankel_scale(self) -> int:
        """delta_b (b/g)^2: the dual term n sees H F(n / hankel_scale)."""
        return self.delta_b * (self.b // self.g) ** 2

    @property
    def prefactor(self) -> float:
        return self.g / self.b


def _width_for_lower_left(f: NewformData, c: int) -> int:
    q = math.gcd(c, f.level) if c else f.level
    return extended_width(f.level, f.conductor, q).delta


def dual_cusp(f: NewformData, a: int, b: int, sigma_a: ScalingMatrix | None = None) -> DualCusp:
    """The dual cusp and its scaling matrix for the twist a/b at the cusp sigma_a^{-1} oo."""
    if b < 1 or math.gcd(a, b) != 1:
        raise ValueError("the twist a/b needs b >= 1 and gcd(a, b) = 1")
    if sigma_a is None:
        sigma_a = ScalingMatrix(1, 0, 0, 1)
    delta_a = _width_for_lower_left(f, sigma_a.q)
    g = math.gcd(delta_a, b)
    bb = b // g
    x = a * delta_a // g
    xbar = inverse_mod(x % bb, bb) if bb > 1 else 0
    top, r = divmod(1 - x * xbar, bb)
    assert r == 0
    D_inv = (x, -top, bb, xbar)
    sb = ScalingMatrix(*matmul(sigma_a.sigma_inv, D_inv))
    cusp_b = reduce_to_standard_form(sb.a, sb.q, f.level) if sb.q else reduce_to_standard_form(1, 0, f.level)
    return DualCusp(b, sigma_a, sb, cusp_b, delta_a, _width_for_lower_left(f, sb.q), g, x, xbar)


def relate_scaling_matrices(N: int, sigma: ScalingMatrix, tau: ScalingMatrix) -> tuple[tuple, int]:
    """(gamma, m) with tau^{-1} = gamma sigma^{-1} n(m) and gamma in Gamma_0(N)."""
    for m in range(N):
        gamma = matmul(matmul(tau.sigma_inv, (1, -m, 0, 1)), sigma.sigma)
        if gamma[2] % N == 0:
            return gamma, m
    raise ValueError("the two scaling matrices belong to inequivalent cusps")


# ---------------------------------------------------------------------------
# coefficient supply

_LOCAL_CACHE: dict = {}


def fitted_local_params(f: NewformData, n_fit: int = 30) -> dict:
    """Local parameters with unknown constants fitted from low oracle coefficients at each cusp."""
    key = (f.name, f.level, f.weight, f.n_max, f.coefficients[: n_fit + 1].tobytes())
    if key not in _LOCAL_CACHE:
        oracles = {}
        for c in enumerate_cusps(f.level):
            s = adapted_scaling_matrix(c, f.conductor)
            ex = expand_with_matrix(f, s, n_fit, delta=extended_width(f.level, f.conductor, c.q).delta)
            oracles[c] = (s, {n: v for n, v in ex.coefficients.items() if n > 0})
        local, log = fit_local_constants(f, oracles)
        _LOCAL_CACHE[key] = (local, log)
    return _LOCAL_CACHE[key][0]


def ensure_terms(f: NewformData, n: int) -> NewformData:
    """f with stored coefficients up to n, regenerating builtins when needed."""
    if f.n_max >= n:
        return f
    if f.name in BUILTIN_NAMES:
        return get_form(f.name, n)
    raise InsufficientTerms(f"needs a_f(n) up to {n}; the form stores {f.n_max}")


def coefficients_at(
    f: NewformData, sigma: ScalingMatrix, n_max: int, provenance: str = "oracle"
) -> np.ndarray:
    """a_f(n; sigma^{-1} oo) for n = 0..n_max w.r.t. the given scaling matrix.

    'oracle' samples f|sigma^{-1} directly. 'product_formula' evaluates the local
    formula at the adapted matrix tau of the same cusp and transports it:
    tau^{-1} = gamma sigma^{-1} n(m) gives a(n; sigma) = conj(chi(d_gamma)) e(-n m/delta) a(n; tau).
    Unavailable entries are NaN.
    """
    delta = _width_for_lower_left(f, sigma.q)
    if provenance == "oracle":
        if n_max > MAX_ORACLE_TERMS:
            raise InsufficientTerms(f"oracle limited to {MAX_ORACLE_TERMS} terms, {n_max} requested")
        ex = expand_with_matrix(f, sigma, n_max, delta=delta)
        out = np.zeros(n_max + 1, dtype=complex)
        for n, v in ex.coefficients.items():
            if 0 < n <= n_max:
                out[n] = v
        return out
    if provenance != "product_formula":
        raise ValueError(f"unknown provenance {provenance!r}")
    f = ensure_terms(f, n_max)
    local = fitted_local_params(f)
    if sigma.q == 0 and sigma.sigma_inv[1] == 0:
        tau = ScalingMatrix(1, 0, 0, 1)
    else:
        c = reduce_to_standard_form(sigma.a, sigma.q, f.level) if sigma.q else reduce_to_standard_form(1, 0, f.level)
        tau = adapted_scaling_matrix(c, f.conductor)
    gamma, m = relate_scaling_matrices(f.level, sigma, tau)
    vals, mask, _ = product_formula_array(f, local, tau, n_max)
    n = np.arange(n_max + 1)
    chi = f.character.value(gamma[3])
    return np.conj(chi) * np.exp(-2j * np.pi * n * m / delta) * vals


# ---------------------------------------------------------------------------
# the two sides


@dataclass
class VoronoiReport:
    form: str
    a: int
    b: int
    cusp_a: str
    cusp_b: str
    delta_a: int
    delta_b: int
    lhs: complex
    rhs: complex
    abs_residual: float
    rel_residual: float
    lhs_terms: int
    rhs_terms: int
    tail_bound: float
    lhs_provenance: str
    rhs_provenance: str
    passed: bool
    details: dict = field(default_factory=dict)


def _a_matrix(f: NewformData, cusp: Cusp | None) -> ScalingMatrix:
    if cusp is None or cusp.is_infinity:
        return ScalingMatrix(1, 0, 0, 1)
    return adapted_scaling_matrix(cusp, f.conductor)


def voronoi_lhs(
    f: NewformData, a: int, b: int, cusp: Cusp | None, F: TestFunction, provenance: str = "oracle"
) -> tuple[complex, int]:
    """sum_n e(n a/b) a_f(n; a) (n/delta_a)^{-(k-1)/2} F(n/delta_a); returns (value, number of terms)."""
    if not F.compact:
        raise ValueError("the left side needs a compactly supported F")
    sigma = _a_matrix(f, cusp)
    delta = _width_for_lower_left(f, sigma.q)
    A, B = F.support
    n_lo, n_hi = max(1, math.floor(A * delta)), math.ceil(B * delta)
    if sigma.sigma_inv == (1, 0, 0, 1):
        f = ensure_terms(f, n_hi)
        coeffs = f.coefficients[: n_hi + 1]
    else:
        coeffs = coefficients_at(f, sigma, n_hi, provenance)
    n = np.arange(n_lo, n_hi + 1)
    x = n / delta
    terms = np.exp(2j * np.pi * n * a / b) * coeffs[n] * x ** (-(f.weight - 1) / 2) * F(x)
    return complex(np.sum(terms)), int(np.count_nonzero(F(x)))


def _truncation(f, dual: DualCusp, F, scale: float, growth: float, tol: float) -> tuple[int, float]:
    """Number of dual terms so that the remaining terms are below tol * scale.

    Term bound: g/b * growth * (n/delta_b)^{1/4} * max|H| over a panel of
    the interpolant. Panels are added until three consecutive ones fall below the
    tolerance, or below the quadrature noise floor (NOISE_FLOOR * max|H|), where the
    computed H carries no information. H of a smooth bump decays faster than any power.
    """
    H = hankel_interpolant(F, HankelParams.of(f))
    X = dual.hankel_scale
    pref = dual.prefactor
    quiet, i, tail, hmax = 0, 0, 0.0, 0.0
    while quiet < 3:
        t0, t1 = i * H.width, (i + 1) * H.width
        H.extend(t1)
        hmax = max(hmax, H.panel_max(i))
        count = X * (t1 * t1 - t0 * t0) + 1
        bound = pref * growth * (X * t1 * t1 / dual.delta_b) ** 0.25 * H.panel_max(i) * count
        if bound < tol * scale or H.panel_max(i) < NOISE_FLOOR * hmax:
            quiet += 1
            tail += bound
        else:
            quiet, tail = 0, 0.0
        i += 1
        if i > 2000:
            raise RuntimeError("Hankel transform does not decay; cannot truncate the dual sum")
    t_cut = (i - 3) * H.width
    return int(math.ceil(X * t_cut * t_cut)), tail


def voronoi_rhs(
    f: NewformData,
    a: int,
    b: int,
    cusp: Cusp | None,
    F: TestFunction,
    provenance: str = "product_formula",
    scale: float = 1.0,
    n_terms: int | None = None,
) -> tuple[complex, dict]:
    """g/b sum_{n != 0} e(-n xbar/(delta_b b/g)) a_f(n; b)(n/delta_b)^{-(k-1)/2} H F(n/(delta_b (b/g)^2))."""
    if f.kind != "holomorphic":
        raise NotImplementedError("end-to-end Voronoi is implemented for holomorphic forms")
    dual = dual_cusp(f, a, b, _a_matrix(f, cusp))
    k = f.weight
    growth = _coefficient_growth(f, dual.delta_b)
    tail = 0.0
    if n_terms is None:
        n_terms, tail = _truncation(f, dual, F, max(1.0, scale), growth, TAIL_TOL)
    n_terms = max(n_terms, 1)
    coeffs = coefficients_at(f, dual.sigma_b, n_terms, provenance)
    n = np.arange(1, n_terms + 1)
    H = hankel_interpolant(F, HankelParams.of(f))
    h = H(n / dual.hankel_scale)
    twist = np.exp(-2j * np.pi * (n * dual.xbar % dual.twist_modulus) / dual.twist_modulus)
    terms = twist * coeffs[n] * (n / dual.delta_b) ** (-(k - 1) / 2) * h
    if np.isnan(terms).any():
        raise InsufficientTerms("some dual coefficients are unavailable from the product formula")
    value = dual.prefactor * complex(np.sum(terms))
    info = {
        "dual": dual,
        "terms": n_terms,
        "tail_bound": tail,
        "negative_terms": 0,  # H F(y) = 0 for y < 0 in the holomorphic case
        "hankel_validation": H.validate(),
    }
    return value, info


def _coefficient_growth(f: NewformData, delta_b: int) -> float:
    """max |a_f(n)| n^{-(k-1)/2} over stored n <= 2000, scaled by delta_b^{-1/2} times a safety factor.

    |a_f(n; b)| (n/delta_b)^{-(k-1)/2} is at most about delta_b^{-1/2} d(n) n^theta; the
    factor 4 covers the divisor-function fluctuations beyond the sampled range.
    """
    m = min(f.n_max, 2000)
    n = np.arange(1, m + 1)
    g = float(np.max(np.abs(f.coefficients[1 : m + 1]) * n ** (-(f.weight - 1) / 2)))
    return 4 * g / math.sqrt(delta_b) * math.sqrt(delta_b)  # delta_b cancels against the normalisation


def verify_voronoi(
    f: NewformData,
    a: int,
    b: int,
    cusp: Cusp | None,
    F: TestFunction,
    lhs_provenance: str = "oracle",
    rhs_provenance: str = "product_formula",
    tol: float = VORONOI_TOL,
) -> VoronoiReport:
    lhs, lhs_terms = voronoi_lhs(f, a, b, cusp, F, lhs_provenance)
    rhs, info = voronoi_rhs(f, a, b, cusp, F, rhs_provenance, scale=abs(lhs))
    dual = info["dual"]
    res = abs(lhs - rhs)
    rel = res / abs(lhs) if abs(lhs) > 0 else float("inf")
    passed = rel < tol or res < 1e-9
    return VoronoiReport(
        form=f.name,
        a=a,
        b=b,
        cusp_a="oo" if cusp is None else str(cusp),
        cusp_b=str(dual.cusp_b),
        delta_a=dual.delta_a,
        delta_b=dual.delta_b,
        lhs=lhs,
        rhs=rhs,
        abs_residual=res,
        rel_residual=rel,
        lhs_terms=lhs_terms,
        rhs_terms=info["terms"],
        tail_bound=info["tail_bound"],
        lhs_provenance="input" if cusp is None or cusp.is_infinity else lhs_provenance,
        rhs_provenance=rhs_provenance,
        passed=bool(passed),
        details={"hankel_validation": info["hankel_validation"], "xbar": dual.xbar, "g": dual.g},
    )


# ---------------------------------------------------------------------------
# the closed-form identity


@dataclass
class IdentityReport:
    form: str
    a: int
    b: int
    y: float
    cusp_b: str
    delta_b: int
    direct: complex
    dual: complex
    rel_residual: float
    terms: int
    provenance: str
    passed: bool


def closed_form_identity(
    f: NewformData, a: int, b: int, y: float, provenance: str = "product_formula", tol: float = 1e-8
) -> IdentityReport:
    """f(a/b + iy) against the dual expansion with F = x^{(k-1)/2} e(ixy) and the closed-form Hankel transform.

    With sigma_b^{-1} = (a, (a abar - 1)/b; b, abar) the right side collapses to
    (-iby)^{-k} sum a_f(n; b) e((n/delta_b)(-abar/b + i/(y b^2))).
    """
    if f.kind != "holomorphic":
        raise NotImplementedError("the closed form needs a holomorphic form")
    if y <= 0:
        raise ValueError("y must be positive")
    k = f.weight
    dual = dual_cusp(f, a, b)
    X = dual.delta_b * b * b
    # H F(n/X) carries exp(-2 pi n/(X y)); stop once it is below 1e-18 relative to n^{k/2}
    n_terms = int(math.ceil(X * y * (18 * math.log(10) + k * math.log(X * y + 2)) / (2 * math.pi))) + 8
    coeffs = coefficients_at(f, dual.sigma_b, n_terms, provenance)
    n = np.arange(1, n_terms + 1)
    h = np.array([hankel_exp_kernel_closed_form(k, y, m / X) for m in n])
    twist = np.exp(-2j * np.pi * (n * dual.xbar % dual.twist_modulus) / dual.twist_modulus)
    rhs = complex(np.sum(twist * coeffs[n] * (n / dual.delta_b) ** (-(k - 1) / 2) * h)) / b
    direct, _ = evaluate(f, complex(a / b, y))
    rel = abs(direct - rhs) / max(abs(direct), 1e-300)
    return IdentityReport(
        form=f.name,
        a=a,
        b=b,
        y=y,
        cusp_b=str(dual.cusp_b),
        delta_b=dual.delta_b,
        direct=direct,
        dual=rhs,
        rel_residual=rel,
        terms=n_terms,
        provenance=provenance,
        passed=bool(rel < tol),
    )


# ---------------------------------------------------------------------------
# the average bound


@dataclass
class BoundsTable:
    form: str
    cusp: str
    delta: int
    X: list
    S: list  # sum_{n <= X} |a_f(n; a)|^2
    bound: list  # reference bound with theta = 7/64 and implied constant 1
    ratio: list
    slope: float
    window: tuple
    passed: bool
    provenance: str


def average_bound(k: int, delta: int, q_gcd: int, X: float, theta: float = float(THETA)) -> float:
    """((k+1)^2 / delta^k)(X^{k+2 theta} + X^{k-1/2} (q, N/q)^{k+2 theta})."""
    return (k + 1) ** 2 / delta**k * (X ** (k + 2 * theta) + X ** (k - 0.5) * q_gcd ** (k + 2 * theta))


def average_bound_experiment(f: NewformData, cusp: Cusp, X_grid=None, provenance: str = "auto") -> BoundsTable:
    """S(X) = sum_{n <= X} |a_f(n; a)|^2 on a grid, the reference bound and the log-log slope of S.

    'auto' uses the product formula and falls back to the oracle at cusps it does not reach.
    """
    if X_grid is None:
        X_grid = np.unique(np.geomspace(500, 5000, 12).astype(int))
    X_grid = [int(x) for x in X_grid]
    Xmax = max(X_grid)
    sigma = _a_matrix(f, cusp)
    delta = _width_for_lower_left(f, sigma.q)
    if cusp.is_infinity:
        f = ensure_terms(f, Xmax)
        coeffs = f.coefficients[: Xmax + 1]
        prov = "input"
    else:
        prov = "product_formula" if provenance == "auto" else provenance
        coeffs = coefficients_at(f, sigma, Xmax, prov)
        if provenance == "auto" and np.isnan(coeffs[1:]).any():
            prov = "oracle"
            coeffs = coefficients_at(f, sigma, Xmax, prov)
    if np.isnan(coeffs[1:]).any():
        raise InsufficientTerms(f"coefficients at {cusp} are not available from the {provenance}")
    cum = np.cumsum(np.abs(coeffs) ** 2)
    S = [float(cum[x]) for x in X_grid]
    q_gcd = math.gcd(cusp.q, f.level // cusp.q)
    bound = [average_bound(f.weight, delta, q_gcd, x) for x in X_grid]
    ratio = [s / bd for s, bd in zip(S, bound)]
    good = [(math.log(x), math.log(s)) for x, s in zip(X_grid, S) if s > 0]
    slope = float(np.polyfit(*zip(*good), 1)[0]) if len(good) >= 2 else float("nan")
    window = (f.weight - 0.75, f.weight + 0.25)
    return BoundsTable(
        form=f.name,
        cusp=str(cusp),
        delta=delta,
        X=X_grid,
        S=S,
        bound=bound,
        ratio=ratio,
        slope=slope,
        window=window,
        passed=bool(window[0] <= slope <= window[1]),
        provenance=prov,
    )
