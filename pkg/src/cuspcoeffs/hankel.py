"""Test functions and the Bessel-kernel Hankel transforms of Voronoi summation.

Holomorphic weight k:
    H F(y) = 2 pi i^k int_0^oo J_{k-1}(4 pi sqrt(y x)) F(x) dx   for y > 0, and 0 for y < 0.
Maass, spectral parameter t:
    y > 0:  (pi i / sinh(pi t)) int (J_{2it} - J_{-2it})(4 pi sqrt(y x)) F(x) dx
    y < 0:  4 cosh(pi t) int K_{2it}(4 pi sqrt(|y| x)) F(x) dx

The main rule is composite Gauss-Legendre in s = sqrt(x), with the panel count
following the oscillation of the kernel; the error estimate compares two panel
counts. An independent tanh-sinh rule (mpmath) serves as the cross-check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import j0, j1, jv

from .modform import bessel_k_imag

__all__ = [
    "TestFunction",
    "HankelParams",
    "HankelResult",
    "smooth_bump",
    "exp_kernel",
    "linear_combination",
    "hankel",
    "hankel_many",
    "hankel_tanh_sinh",
    "hankel_exp_kernel_closed_form",
    "QuadratureError",
    "HankelInterpolant",
    "hankel_interpolant",
]

GL_NODES = 20
_GL = np.polynomial.legendre.leggauss(GL_NODES)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class TestFunction:
    """F on (0, oo). kind is 'bump' (params A, B), 'exp_kernel' (params k, y) or 'combination'."""

    __test__ = False  # not a pytest class

    kind: str
    params: tuple
    terms: tuple = ()  # (coefficient, TestFunction) pairs for combinations

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "bump":
            return float(self.params[0]), float(self.params[1])
        if self.kind == "exp_kernel":
            k, y = self.params
            # x^{(k-1)/2} e^{-2 pi x y} < 1e-20 beyond this point
            X = 1.0
            while (k - 1) / 2 * math.log(X) - 2 * math.pi * X * y > math.log(1e-20):
                X *= 1.5
            return 0.0, X
        lo = min(F.support[0] for _, F in self.terms)
        hi = max(F.support[1] for _, F in self.terms)
        return lo, hi

    @property
    def compact(self) -> bool:
        if self.kind == "combination":
            return all(F.compact for _, F in self.terms)
        return self.kind == "bump"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "bump":
            A, B = self.params
            u = (2 * x - A - B) / (B - A)
            inside = np.abs(u) < 1
            uu = np.where(inside, u, 0.0)
            return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - uu * uu)), 0.0)
        if self.kind == "exp_kernel":
            k, y = self.params
            return np.where(x > 0, np.maximum(x, 0) ** ((k - 1) / 2) * np.exp(-2 * np.pi * x * y), 0.0)
        out = np.zeros(x.shape, dtype=complex)
        for c, F in self.terms:
            out = out + c * F(x)
        return out


def smooth_bump(A: float, B: float) -> TestFunction:
    """exp(1 - 1/(1 - u^2)) with u = (2x - A - B)/(B - A): C^oo, support exactly [A, B], maximum 1."""
    if not 0 < A < B:
        raise ValueError("bump support must satisfy 0 < A < B")
    return TestFunction("bump", (float(A), float(B)))


def exp_kernel(k: int, y: float) -> TestFunction:
    """F(x) = x^{(k-1)/2} e(i x y) = x^{(k-1)/2} exp(-2 pi x y), y > 0."""
    if y <= 0:
        raise ValueError("exp_kernel needs y > 0")
    return TestFunction("exp_kernel", (int(k), float(y)))


def linear_combination(*terms) -> TestFunction:
    """sum c_i F_i from pairs (c_i, F_i)."""
    return TestFunction("combination", (), tuple((complex(c), F) for c, F in terms))


@dataclass(frozen=True)
class HankelParams:
    kind: str = "holomorphic"
    weight: int = 2
    spectral_parameter: float = 0.0

    @classmethod
    def of(cls, f) -> "HankelParams":
        return cls(f.kind, f.weight, f.spectral_parameter or 0.0)


@dataclass
class HankelResult:
    value: complex
    error: float
    panels: int = 0
    rule: str = "gauss_legendre"
    details: dict = field(default_factory=dict)


def _kernel(params: HankelParams, y: float, z: np.ndarray) -> np.ndarray:
    """The full kernel including constants, at z = 4 pi sqrt(|y| x)."""
    if params.kind == "holomorphic":
        order = params.weight - 1
        J = j1(z) if order == 1 else j0(z) if order == 0 else jv(order, z)
        return 2 * math.pi * (1j**params.weight) * J
    t = params.spectral_parameter
    if y > 0:
        vals = np.array([complex(mpmath.besselj(2j * t, float(v))) for v in np.ravel(z)]).reshape(np.shape(z))
        # (J_{2it} - J_{-2it})(z) = 2i Im J_{2it}(z) for real z
        return (math.pi * 1j / math.sinh(math.pi * t)) * (2j * vals.imag)
    return 4 * math.cosh(math.pi * t) * bessel_k_imag(2 * t, np.maximum(np.ravel(z), 1e-300)).reshape(np.shape(z))


def _panels_for(y: float, s0: float, s1: float, base: int) -> int:
    oscillations = 2 * math.sqrt(abs(y)) * (s1 - s0)  # (4 pi sqrt(y) / 2 pi) * length in s
    return int(base + math.ceil(oscillations))


def _gauss(F: TestFunction, params: HankelParams, ys: np.ndarray, panels: int, s0: float, s1: float) -> np.ndarray:
    x0, w0 = _GL
    edges = np.linspace(s0, s1, panels + 1)
    h = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    s = (mid[:, None] + h[:, None] * x0[None, :]).ravel()
    w = (h[:, None] * w0[None, :]).ravel()
    g = F(s * s) * 2 * s * w
    out = np.empty(len(ys), dtype=complex)
    for i, y in enumerate(ys):
        out[i] = _kernel(params, y, 4 * math.pi * math.sqrt(abs(y)) * s) @ g
    return out


def hankel_many(
    F: TestFunction, params: HankelParams, ys, base_panels: int = 16, tol: float = 1e-10
) -> list[HankelResult]:
    """H F at each y; holomorphic y < 0 gives exactly 0."""
    ys = np.asarray(ys, dtype=float)
    if np.any(ys == 0):
        raise ValueError("the Hankel transform is evaluated at y != 0")
    if F.kind == "combination":
        # each term on its own support: panels then align with every bump's end points
        parts = [(c, hankel_many(G, params, ys, base_panels, tol)) for c, G in F.terms]
        return [
            HankelResult(
                sum(c * r[i].value for c, r in parts),
                sum(abs(c) * r[i].error for c, r in parts),
                sum(r[i].panels for _, r in parts),
                parts[0][1][i].rule,
            )
            for i in range(len(ys))
        ]
    A, B = F.support
    s0, s1 = math.sqrt(A), math.sqrt(B)
    results: list[HankelResult | None] = [None] * len(ys)
    live = []
    for i, y in enumerate(ys):
        if params.kind == "holomorphic" and y < 0:
            results[i] = HankelResult(0j, 0.0, 0, "support")
        else:
            live.append(i)
    # group by panel count so nearby y share nodes
    groups: dict[int, list[int]] = {}
    for i in live:
        groups.setdefault(_panels_for(ys[i], s0, s1, base_panels), []).append(i)
    for P, idx in groups.items():
        yy = ys[idx]
        coarse = _gauss(F, params, yy, P, s0, s1)
        fine = _gauss(F, params, yy, 2 * P, s0, s1)
        for j, i in enumerate(idx):
            err = abs(fine[j] - coarse[j])
            results[i] = HankelResult(complex(fine[j]), float(err), 2 * P)
    bad = [r for r in results if r.error > tol * max(1.0, abs(r.value))]
    if bad:
        raise QuadratureError(f"Gauss-Legendre did not converge: worst error {max(r.error for r in bad):.3g}")
    return results


def hankel(F: TestFunction, params: HankelParams, y: float, **kw) -> HankelResult:
    return hankel_many(F, params, [y], **kw)[0]


def hankel_tanh_sinh(F: TestFunction, params: HankelParams, y: float, dps: int = 20) -> complex:
    """Independent evaluation with mpmath's tanh-sinh rule, split at the kernel's half periods."""
    if y == 0:
        raise ValueError("the Hankel transform is evaluated at y != 0")
    if params.kind == "holomorphic" and y < 0:
        return 0j
    if params.kind != "holomorphic":
        raise NotImplementedError("the tanh-sinh cross-check covers the holomorphic kernel")
    A, B = F.support
    s0, s1 = math.sqrt(A), math.sqrt(B)
    k = params.weight
    with mpmath.workdps(dps):
        c = 4 * mpmath.pi * mpmath.sqrt(mpmath.mpf(y))

        def integrand(s):
            return mpmath.besselj(k - 1, c * s) * complex(F(float(s * s))) * 2 * s

        pieces = max(2, int(math.ceil(2 * (2 * math.sqrt(y) * (s1 - s0)))) + 2)
        pts = [mpmath.mpf(s0) + (mpmath.mpf(s1) - s0) * j / pieces for j in range(pieces + 1)]
        # support ends of combined terms are breakpoints too
        ends = {mpmath.sqrt(e) for _, G in F.terms for e in G.support} - set(pts)
        pts = sorted(set(pts) | ends)
        val = mpmath.quad(integrand, pts, method="tanh-sinh")
        return complex(2 * mpmath.pi * (1j**k) * val)


def hankel_exp_kernel_closed_form(k: int, y: float, eta: float) -> complex:
    """H F(eta) for F = exp_kernel(k, y): i^k eta^{(k-1)/2} y^{-k} exp(-2 pi eta / y), 0 for eta < 0.

    From int_0^oo J_nu(a sqrt x) x^{nu/2} e^{-p x} dx = (a/2)^nu p^{-nu-1} e^{-a^2/(4p)}
    with nu = k-1, a = 4 pi sqrt(eta), p = 2 pi y.
    """
    if eta <= 0:
        return 0j
    return (1j**k) * eta ** ((k - 1) / 2) * y ** (-k) * math.exp(-2 * math.pi * eta / y)


class HankelInterpolant:
    """H F(y) for y > 0 through piecewise Chebyshev interpolation in t = sqrt(y).

    As a function of t, H F is a superposition of J_{k-1}(4 pi t s), s in
    [sqrt(A), sqrt(B)], so it oscillates with at most 2 sqrt(B) cycles per unit
    t. Panels of width ``width`` carry ``nodes`` Chebyshev points each and are
    built lazily as larger y are requested. ``validate`` compares against
    direct quadrature at sample points.
    """

    def __init__(self, F: TestFunction, params: HankelParams, nodes: int = 40, width: float | None = None):
        if params.kind != "holomorphic":
            raise NotImplementedError("interpolation covers the holomorphic kernel")
        self.F, self.params, self.nodes = F, params, nodes
        smax = math.sqrt(F.support[1])
        # keep omega * half-width <= 12 for omega = 4 pi smax
        self.width = width or 24.0 / (4 * math.pi * smax)
        j = np.arange(nodes)
        self._x = np.cos((2 * j + 1) * math.pi / (2 * nodes))  # Chebyshev points of the first kind
        self._w = (-1.0) ** j * np.sin((2 * j + 1) * math.pi / (2 * nodes))
        self._panels: list[np.ndarray] = []
        self.validation_error: float | None = None

    @property
    def t_max(self) -> float:
        return len(self._panels) * self.width

    def panel_max(self, i: int) -> float:
        return float(np.max(np.abs(self._panels[i])))

    def extend(self, t_max: float) -> None:
        A, B = self.F.support
        s0, s1 = math.sqrt(A), math.sqrt(B)
        while self.t_max < t_max:
            i = len(self._panels)
            t = (i + 0.5) * self.width + 0.5 * self.width * self._x
            ys = t * t
            P = _panels_for(float(ys.max()), s0, s1, 16)
            vals = _gauss(self.F, self.params, ys, 2 * P, s0, s1)
            self._panels.append(vals)

    def __call__(self, ys) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        out = np.zeros(ys.shape, dtype=complex)
        pos = ys > 0
        if not pos.any():
            return out
        t = np.sqrt(ys[pos])
        self.extend(float(t.max()) + 1e-12)
        idx = np.minimum((t / self.width).astype(int), len(self._panels) - 1)
        res = np.empty(t.shape, dtype=complex)
        for i in np.unique(idx):
            sel = idx == i
            u = (t[sel] - (i + 0.5) * self.width) / (0.5 * self.width)
            diff = u[:, None] - self._x[None, :]
            exact = np.abs(diff) < 1e-15
            diff[exact] = 1.0
            k = self._w[None, :] / diff
            vals = (k @ self._panels[i]) / k.sum(axis=1)
            hit = exact.any(axis=1)
            if hit.any():
                vals[hit] = self._panels[i][np.argmax(exact[hit], axis=1)]
            res[sel] = vals
        out[pos] = res
        return out

    def validate(self, n_points: int = 24, seed: int = 7) -> float:
        """Max |interpolant - direct quadrature| at random y in the built range."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(0.05 * self.width, self.t_max, n_points)
        direct = np.array([r.value for r in hankel_many(self.F, self.params, t * t)])
        self.validation_error = float(np.max(np.abs(self(t * t) - direct)))
        return self.validation_error


_INTERPOLANTS: dict = {}


def hankel_interpolant(F: TestFunction, params: HankelParams) -> HankelInterpolant:
    key = (F, params)
    if key not in _INTERPOLANTS:
        _INTERPOLANTS[key] = HankelInterpolant(F, params)
    return _INTERPOLANTS[key]
