import math

import mpmath
import numpy as np
import pytest

from cuspcoeffs.hankel import HankelParams, hankel, smooth_bump
from cuspcoeffs.modform import KappaKernel, bessel_k_imag, kappa


@pytest.mark.parametrize("t", [0.0, 1.5, 9.53])
def test_bessel_k_imaginary_order(t):
    xs = np.array([0.05, 0.7, 3.0, 12.0])
    got = bessel_k_imag(t, xs)
    want = [float(mpmath.re(mpmath.besselk(1j * t, x))) for x in xs]
    assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, max(abs(w) for w in want))


def test_kappa():
    hol = KappaKernel("holomorphic", 2)
    assert kappa(hol, np.array([1.0]))[0] == pytest.approx(math.exp(-2 * math.pi))
    assert kappa(hol, np.array([-1.0]))[0] == 0
    odd = KappaKernel("maass", 0, 1, 9.53)
    v = kappa(odd, np.array([0.3, -0.3]))
    assert v[0] == pytest.approx(-v[1])
    with pytest.raises(ValueError):
        kappa(odd, np.array([0.0]))


def _direct(params, F, y):
    t = params.spectral_parameter
    A, B = F.support
    if y > 0:
        def kern(x):
            z = 4 * mpmath.pi * mpmath.sqrt(y * x)
            return (mpmath.pi * 1j / mpmath.sinh(mpmath.pi * t)) * (mpmath.besselj(2j * t, z) - mpmath.besselj(-2j * t, z))
    else:
        def kern(x):
            return 4 * mpmath.cosh(mpmath.pi * t) * mpmath.besselk(2j * t, 4 * mpmath.pi * mpmath.sqrt(-y * x))
    val = mpmath.quad(lambda x: kern(x) * float(F(float(x))), mpmath.linspace(A, B, 6))
    return complex(val)


@pytest.mark.parametrize("y", [0.7, -0.7])
def test_maass_hankel_against_direct_integration(y):
    params = HankelParams("maass", 0, 2.0)
    F = smooth_bump(1.0, 3.0)
    got = hankel(F, params, y).value
    want = _direct(params, F, y)
    assert abs(got - want) < 1e-8 * max(1.0, abs(want))
