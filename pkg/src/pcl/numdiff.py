"""Finite differences and Taylor coefficients of analytic functions."""

from __future__ import annotations

import math

import numpy as np


def central2(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def central4(f, x, h):
    """Fourth-order central difference of a (vector-valued) function."""
    return (8 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12 * h)


def second5(values, h):
    """Five-point second derivative at the interior points of a uniform sample."""
    v = np.asarray(values)
    return (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)


def first5(values, h):
    """Five-point first derivative at the interior points of a uniform sample."""
    v = np.asarray(values)
    return (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)


def taylor_coefficients(f, x0, radius, n_coef, n_points=64):
    """Taylor coefficients ``c_0 .. c_{n_coef-1}`` of an analytic ``f`` at ``x0``.

    Trapezoid rule for the Cauchy integral on a circle; ``f`` must accept an
    array and may return a tuple of arrays (one series per component).  The
    error decays like ``(radius/R)^n_points`` where ``R`` is the distance to the
    nearest singularity.
    """
    k = np.arange(n_points)
    zs = x0 + radius * np.exp(2j * np.pi * k / n_points)
    vals = f(zs)
    single = not isinstance(vals, tuple)
    if single:
        vals = (vals,)
    out = []
    for v in vals:
        c = np.fft.fft(np.asarray(v, dtype=complex)) / n_points
        out.append(c[:n_coef] / radius ** np.arange(n_coef))
    return out[0] if single else tuple(out)


def s_mul(a, b):
    n = len(a)
    return np.convolve(a, b)[:n]


def s_div(a, b):
    """Series quotient ``a/b`` (``b[0] != 0``)."""
    n = len(a)
    q = np.zeros(n, dtype=complex)
    for i in range(n):
        q[i] = (a[i] - np.dot(q[:i], b[i:0:-1])) / b[0]
    return q


def s_deriv(a):
    """Derivative of a truncated series (one order is lost)."""
    n = len(a)
    return np.array([a[i + 1] * (i + 1) for i in range(n - 1)] + [0j])


def s_value(a, order=0):
    """``order``-th derivative at the expansion point."""
    return a[order] * math.factorial(order)
