"""Numerical laboratory for symmetrizers, strong hyperbolicity and the
Cauchy problem of first-order systems with rough coefficients."""

__version__ = "0.1.0"
