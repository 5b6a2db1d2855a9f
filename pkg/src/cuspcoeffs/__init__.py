"""Fourier coefficients of newforms at arbitrary cusps of Gamma_0(N)."""

__version__ = "0.1.0"
