"""Built-in newforms generated from independent exact constructions.

* ``delta``: Ramanujan's Delta (level 1, weight 12) from the 24th power of the
  pentagonal-number series.
* ``level11``: the weight-2 newform of the curve y^2 + y = x^3 - x^2, as the
  eta product eta(z)^2 eta(11z)^2 (point counting is the test oracle).
* ``level9chi``: the weight-3 newform of level 9 whose character has order 6 and
  chi(2) = e(1/6). It is cut out of theta * E (theta the hexagonal theta series,
  E an Eisenstein series of weight 2) by killing the two Eisenstein eigenvalues
  of T_2, in exact Z[omega] arithmetic.
* ``level12chi``: eta(2z)^3 eta(6z)^3 (level 12, weight 3, character (-3/.)).
* ``level36``: the weight-2 newform of y^2 = x^3 + 1, as the eta product eta(6z)^4
  (point counting is the test oracle).

Generated sets are cached as JSON under a data directory (``CUSPCOEFFS_DATA``
overrides the default ``~/.cache/cuspcoeffs``).
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .arith import character_from_table, primes_up_to, trivial_character
from .modform import FORMAT_VERSION, NewformData, NewformError, newform_from_dict, newform_to_dict

__all__ = [
    "BUILTIN_NAMES",
    "DEFAULT_NMAX",
    "data_dir",
    "generate_builtin",
    "get_form",
    "delta_coefficients",
    "elliptic_ap",
    "hecke_extend",
    "eta_product",
    "level9chi_coefficients",
    "level12chi_coefficients",
    "eisenstein_to_complex",
]

BUILTIN_NAMES = ("delta", "level11", "level9chi", "level12chi", "level36")
DEFAULT_NMAX = 6000

# Weierstrass coefficients (a1, a2, a3, a4, a6)
CURVE_11A = (0, -1, 1, 0, 0)
CURVE_36A = (0, 0, 0, 0, 1)


def data_dir() -> Path:
    root = os.environ.get("CUSPCOEFFS_DATA")
    path = Path(root) if root else Path.home() / ".cache" / "cuspcoeffs"
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Delta


def _power_series_power(base: dict[int, int], m: int, n_max: int) -> list[int]:
    """Coefficients 0..n_max of B = A^m for a sparse integer series A with A(0) = 1,
    via n b_n = sum_j ((m + 1) j - n) a_j b_{n-j}."""
    terms = sorted((j, c) for j, c in base.items() if 0 < j <= n_max and c)
    b = [0] * (n_max + 1)
    b[0] = 1
    for n in range(1, n_max + 1):
        s = 0
        for j, c in terms:
            if j > n:
                break
            s += ((m + 1) * j - n) * c * b[n - j]
        q, r = divmod(s, n)
        if r:
            raise ArithmeticError("power series recurrence left a remainder")
        b[n] = q
    return b


def _pentagonal(n_max: int) -> dict[int, int]:
    """prod_{n>=1} (1 - q^n) = sum_k (-1)^k q^{k(3k-1)/2}."""
    out = {0: 1}
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 > n_max:
            break
        sign = -1 if k % 2 else 1
        out[e1] = sign
        e2 = k * (3 * k + 1) // 2
        if e2 <= n_max:
            out[e2] = sign
        k += 1
    return out


def delta_coefficients(n_max: int) -> list[int]:
    """[0, tau(1), ..., tau(n_max)]."""
    b = _power_series_power(_pentagonal(n_max), 24, n_max - 1)
    return [0] + b


# ---------------------------------------------------------------------------
# elliptic curves


def elliptic_ap(curve: tuple[int, ...], p: int) -> int:
    """a_p = p + 1 - #E(F_p), counting every projective point of the Weierstrass model."""
    a1, a2, a3, a4, a6 = curve
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    count += 1
        return p + 1 - count
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    x = np.arange(p, dtype=np.int64)
    rhs = (((4 * x % p) * x % p) * x + b2 * x % p * x + 2 * b4 * x + b6) % p
    squares = np.zeros(p, dtype=np.int64)
    sq = (x * x) % p
    np.add.at(squares, sq, 1)  # number of square roots of each residue
    affine = int(squares[rhs].sum())
    return p + 1 - (affine + 1)


def hecke_extend(ap: dict[int, int], n_max: int, level: int, weight: int, chi=None) -> list[int]:
    """Integer a(n), n <= n_max, from a(p) (trivial or real character values chi_N(p) in {0, +-1})."""
    a = [0] * (n_max + 1)
    a[1] = 1
    spf = list(range(n_max + 1))
    for p in range(2, math.isqrt(n_max) + 1):
        if spf[p] == p:
            for m in range(p * p, n_max + 1, p):
                if spf[m] == m:
                    spf[m] = p
    prime_powers: dict[int, int] = {}
    for p in primes_up_to(n_max):
        if level % p == 0:
            c = 0
        elif chi is None:
            c = 1
        else:
            v = chi(p)
            c = round(complex(v).real)
        prev, cur = 1, ap[p]
        prime_powers[p] = cur
        pk = p
        while pk * p <= n_max:
            nxt = ap[p] * cur - c * p ** (weight - 1) * prev
            pk *= p
            prime_powers[pk] = nxt
            prev, cur = cur, nxt
    for n in range(2, n_max + 1):
        p = spf[n]
        pk = p
        while n % (pk * p) == 0:
            pk *= p
        a[n] = prime_powers[pk] * a[n // pk]
    return a


def eta_product(factors: list[tuple[int, int]], n_max: int) -> list[int]:
    """Coefficients 0..n_max of prod_i eta(m_i z)^{e_i} (e_i > 0, sum m_i e_i = 24 s for an integer shift s).

    Each factor prod (1 - q^{m n}) is the pentagonal series in q^m, so the product is
    a sequence of sparse multiplications in exact int64 arithmetic.
    """
    shift, r = divmod(sum(m * e for m, e in factors), 24)
    if r:
        raise ValueError("eta product must have integral q-order")
    L = n_max + 1 - shift
    out = np.zeros(max(L, 1), dtype=np.int64)
    out[0] = 1
    pent = _pentagonal(L)
    for m, e in factors:
        terms = [(j * m, c) for j, c in pent.items() if j * m < L and c]
        for _ in range(e):
            new = np.zeros_like(out)
            for j, c in terms:
                new[j:] += c * out[: L - j]
            out = new
    res = [0] * (n_max + 1)
    for i in range(max(L, 0)):
        res[i + shift] = int(out[i])
    return res


def _curve_form(curve, level: int, n_max: int) -> list[int]:
    ap = {p: elliptic_ap(curve, p) for p in primes_up_to(n_max)}
    return hecke_extend(ap, n_max, level, 2)


# ---------------------------------------------------------------------------
# level 9, weight 3, order-6 character: Eisenstein-integer arithmetic
# x = A + B*omega with omega = e(1/3), omega^2 = -1 - omega


def _emul_scalar(A, B, c: int, d: int):
    return A * c - B * d, A * d + B * c - B * d


def eisenstein_to_complex(A, B):
    w = complex(-0.5, math.sqrt(3) / 2)
    return np.asarray(A, dtype=float) + np.asarray(B, dtype=float) * w


def _t2(A, B, chi2: tuple[int, int], L: int):
    """Weight-3 Hecke operator T_2 with character value chi2 at 2, on series of length L."""
    half = L // 2
    outA = np.zeros(half, dtype=np.int64)
    outB = np.zeros(half, dtype=np.int64)
    idx = np.arange(half)
    outA[:] = A[2 * idx]
    outB[:] = B[2 * idx]
    even = idx[idx % 2 == 0]
    cA, cB = _emul_scalar(A[even // 2], B[even // 2], 4 * chi2[0], 4 * chi2[1])
    outA[even] += cA
    outB[even] += cB
    return outA, outB


def _limbs(x: np.ndarray, bits: int) -> list[np.ndarray]:
    sign = np.sign(x)
    mag = np.abs(x)
    out = []
    while True:
        out.append(sign * (mag & ((1 << bits) - 1)))
        mag = mag >> bits
        if not mag.any():
            return out


def exact_convolve(a: np.ndarray, b: np.ndarray, n: int, bits: int = 6) -> np.ndarray:
    """First n terms of the integer convolution a * b, through float FFTs on small limbs.

    Each limb product stays far below 2^53, and the rounding is checked.
    """
    from scipy.fft import irfft, next_fast_len, rfft

    a = np.asarray(a[:n], dtype=np.int64)
    b = np.asarray(b[:n], dtype=np.int64)
    size = next_fast_len(len(a) + len(b) - 1, real=True)
    la = [rfft(x.astype(float), size) for x in _limbs(a, bits)]
    lb = [rfft(x.astype(float), size) for x in _limbs(b, bits)]
    out = np.zeros(n, dtype=np.int64)
    for i, fa in enumerate(la):
        for j, fb in enumerate(lb):
            r = irfft(fa * fb, size)[:n]
            ri = np.rint(r)
            if np.max(np.abs(r - ri), initial=0.0) > 0.25:
                raise ArithmeticError("FFT convolution lost exactness")
            out += ri.astype(np.int64) << (bits * (i + j))
    return out


def level9chi_coefficients(n_max: int) -> tuple[list[int], list[int]]:
    """Exact a(n) = A[n] + B[n] omega for n <= n_max."""
    L = 4 * (n_max + 1)
    n = np.arange(L)
    chi3 = np.where(n % 3 == 1, 1, np.where(n % 3 == 2, -1, 0)).astype(np.int64)
    theta = np.zeros(L, dtype=np.int64)
    theta[0] = 1
    for d in range(1, L):
        if chi3[d]:
            theta[d::d] += 6 * chi3[d]
    # phi: even character mod 9 of order 3 with phi(2) = omega^2; exponent table e with phi = omega^e
    expo = {}
    g = 1
    for j in range(6):
        expo[g] = (2 * j) % 3
        g = g * 2 % 9
    phiA = np.zeros(L, dtype=np.int64)
    phiB = np.zeros(L, dtype=np.int64)
    for r, e in expo.items():
        val = {0: (1, 0), 1: (0, 1), 2: (-1, -1)}[e]
        phiA[r::9] = val[0]
        phiB[r::9] = val[1]
    EA = np.zeros(L, dtype=np.int64)
    EB = np.zeros(L, dtype=np.int64)
    for d in range(1, L):
        m = np.arange(1, (L - 1) // d + 1)
        EA[d * m] += phiA[m] * d
        EB[d * m] += phiB[m] * d
    GA = exact_convolve(theta, EA, L)
    GB = exact_convolve(theta, EB, L)
    chi2 = (1, 1)  # e(1/6) = 1 + omega
    lam1 = (5, 4)  # 1 + 4 chi(2)
    lam2 = (5, 1)  # chi(2) + 4
    A1, B1 = _t2(GA, GB, chi2, L)
    cA, cB = _emul_scalar(GA[: L // 2], GB[: L // 2], *lam2)
    A1, B1 = A1 - cA, B1 - cB
    L2 = L // 2
    A2, B2 = _t2(A1, B1, chi2, L2)
    cA, cB = _emul_scalar(A1[: L2 // 2], B1[: L2 // 2], *lam1)
    A2, B2 = A2 - cA, B2 - cB
    A2, B2 = A2[: n_max + 1], B2[: n_max + 1]
    c0, c1 = int(A2[1]), int(B2[1])
    norm = c0 * c0 - c0 * c1 + c1 * c1
    if norm == 0:
        raise ArithmeticError("the Hecke projection annihilated the cusp form")
    # divide by c = c0 + c1 omega: multiply by conj(c) = (c0 - c1) - c1 omega, then by 1/norm
    pA = [int(x) for x in A2]
    pB = [int(x) for x in B2]
    outA, outB = [0] * (n_max + 1), [0] * (n_max + 1)
    for i in range(1, n_max + 1):
        u, v = c0 - c1, -c1
        x = pA[i] * u - pB[i] * v
        y = pA[i] * v + pB[i] * u - pB[i] * v
        if x % norm or y % norm:
            raise ArithmeticError(f"coefficient {i} is not integral after normalisation")
        outA[i], outB[i] = x // norm, y // norm
    return outA, outB


def level9chi_character():
    return character_from_table(9, [(2, 1, 6)])


# ---------------------------------------------------------------------------
# level 12, weight 3: eta(2z)^3 eta(6z)^3


def _eta_cubed_exponents(scale: int, n_max: int) -> dict[int, int]:
    """eta(scale*z)^3 / q^{scale/8} = sum_m (-1)^m (2m+1) q^{scale m(m+1)/2}."""
    out = {}
    m = 0
    while scale * m * (m + 1) // 2 <= n_max:
        out[scale * m * (m + 1) // 2] = (-1) ** m * (2 * m + 1)
        m += 1
    return out


def level12chi_coefficients(n_max: int) -> list[int]:
    s1 = _eta_cubed_exponents(2, n_max)
    s2 = _eta_cubed_exponents(6, n_max)
    a = [0] * (n_max + 1)
    for e1, c1 in s1.items():
        for e2, c2 in s2.items():
            n = 1 + e1 + e2
            if n <= n_max:
                a[n] += c1 * c2
    return a


# ---------------------------------------------------------------------------


def _make(name: str, n_max: int) -> NewformData:
    if name == "delta":
        exact = delta_coefficients(n_max)
        chi = trivial_character(1)
        level, weight = 1, 12
        coeffs = np.array([float(x) for x in exact], dtype=complex)
    elif name == "level11":
        exact = eta_product([(1, 2), (11, 2)], n_max)
        chi = trivial_character(1)
        level, weight = 11, 2
        coeffs = np.array(exact, dtype=complex)
    elif name == "level36":
        exact = eta_product([(6, 4)], n_max)
        chi = trivial_character(1)
        level, weight = 36, 2
        coeffs = np.array(exact, dtype=complex)
    elif name == "level9chi":
        A, B = level9chi_coefficients(n_max)
        exact = tuple(zip(A, B))
        chi = level9chi_character()
        level, weight = 9, 3
        coeffs = eisenstein_to_complex(A, B).astype(complex)
    elif name == "level12chi":
        exact = level12chi_coefficients(n_max)
        chi = character_from_table(3, [(2, 1, 2)])
        level, weight = 12, 3
        coeffs = np.array(exact, dtype=complex)
    else:
        raise KeyError(f"unknown builtin form {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return NewformData(level, weight, chi, coeffs, name=name, exact=tuple(exact))


def _load_cached(name: str, path: Path, n_max: int) -> NewformData | None:
    """The cached dataset, or None when it is stale (older format, too few terms).

    A cache file that is unreadable or breaks the load-time invariants raises
    NewformError: it is reported, never silently replaced.
    """
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise NewformError(f"{path}: corrupted dataset ({e}); delete it to regenerate") from e
    if data.get("format_version") != FORMAT_VERSION or len(data.get("coefficients", [])) < n_max:
        return None
    data["coefficients"] = data["coefficients"][:n_max]
    try:
        f = newform_from_dict(data, check=True)
    except NewformError as e:
        raise NewformError(f"{path}: corrupted dataset ({e}); delete it to regenerate") from e
    exact = data.get("exact")
    if exact is not None:
        exact = tuple(tuple(x) if isinstance(x, list) else x for x in exact[: n_max + 1])
    return NewformData(f.level, f.weight, f.character, f.coefficients, name=name, exact=exact)


def generate_builtin(name: str, n_max: int = DEFAULT_NMAX, use_cache: bool = True) -> NewformData:
    """Generate (or load from cache) a built-in newform with coefficients up to n_max."""
    if name not in BUILTIN_NAMES:
        raise KeyError(f"unknown builtin form {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    path = data_dir() / f"{name}.json" if use_cache else None
    if path is not None and path.exists():
        f = _load_cached(name, path, n_max)
        if f is not None:
            return f
    f = _make(name, n_max)
    if path is not None:
        data = newform_to_dict(f)
        data["exact"] = [list(x) if isinstance(x, tuple) else x for x in f.exact]
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data))
        tmp.replace(path)
    return f


def get_form(source: str, n_max: int = DEFAULT_NMAX) -> NewformData:
    """A builtin name or a path to a newform JSON file."""
    from .modform import load_newform

    if source in BUILTIN_NAMES:
        return generate_builtin(source, n_max)
    if not Path(source).exists():
        raise KeyError(f"{source!r} is neither a builtin form ({', '.join(BUILTIN_NAMES)}) nor a file")
    return load_newform(source)
