"""Closed-form heat and Laplace kernels with analytic derivatives.

Provides the d-dimensional Gaussian (heat) kernel, the Newtonian
(Laplace fundamental solution) kernel for n in {2, 3}, and their spatial
derivatives up to second order.  All derivatives are hand-coded closed
forms; finite differences appear only in the test suite.

Conventions
-----------
gaussian : ``(4 pi t)^(-d/2) exp(-|x|^2 / 4t)``, defined to be 0 for
    t <= 0.
newtonian : for n >= 3, ``-|x|^(2-n) / (n (n-2) omega_n)`` with omega_n
    the volume of the unit n-ball (so the n=3 kernel is ``-1/(4 pi |x|)``);
    for n = 2, ``(2 pi)^(-1) ln|x|``.
"""

import math

import numpy as np

__all__ = [
    "unit_ball_volume",
    "gaussian",
    "gaussian_dt",
    "newtonian",
    "gaussian_1d",
    "gaussian_1d_dx",
    "gaussian_1d_dxx",
    "gaussian_radial",
]


def unit_ball_volume(n):
    """Volume of the unit ball in R^n."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _check_order(order, d):
    order = tuple(int(k) for k in order)
    if len(order) != d:
        raise ValueError(f"order has length {len(order)}, expected {d}")
    if any(k < 0 for k in order):
        raise ValueError(f"negative entry in multi-index {order}")
    if sum(order) > 2:
        raise ValueError(f"|order| must be <= 2, got {order}")
    return order


def gaussian(d, order, x, t):
    """Evaluate D^order of the d-dimensional Gaussian kernel at (x, t).

    Parameters
    ----------
    d : int
        Spatial dimension, >= 1.
    order : sequence of int, length d
        Spatial derivative multi-index, |order| <= 2.
    x : array_like, shape (d,)
    t : float
        Kernel is identically 0 for t <= 0.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    order = _check_order(order, d)
    if t <= 0.0:
        return 0.0
    x = np.asarray(x, dtype=float).reshape(d)
    g = (4.0 * math.pi * t) ** (-d / 2.0) * math.exp(-float(x @ x) / (4.0 * t))
    total = sum(order)
    if total == 0:
        return g
    if total == 1:
        i = order.index(1)
        return -x[i] / (2.0 * t) * g
    if 2 in order:
        i = order.index(2)
        return (x[i] * x[i] / (4.0 * t * t) - 1.0 / (2.0 * t)) * g
    i, j = (k for k, v in enumerate(order) if v == 1)
    return x[i] * x[j] / (4.0 * t * t) * g


def gaussian_dt(d, x, t):
    """Analytic time derivative of the d-dimensional Gaussian kernel."""
    if t <= 0.0:
        return 0.0
    x = np.asarray(x, dtype=float).reshape(d)
    g = (4.0 * math.pi * t) ** (-d / 2.0) * math.exp(-float(x @ x) / (4.0 * t))
    return (float(x @ x) / (4.0 * t * t) - d / (2.0 * t)) * g


def newtonian(order, x):
    """Evaluate D^order of the Newtonian kernel at x != 0, n = len(x)."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n not in (2, 3):
        raise ValueError(f"Newtonian kernel implemented for n in {{2, 3}}, got n={n}")
    order = _check_order(order, n)
    r2 = float(x @ x)
    if r2 == 0.0:
        raise ValueError("Newtonian kernel is singular at x = 0")
    r = math.sqrt(r2)
    total = sum(order)
    if n == 2:
        if total == 0:
            return math.log(r) / (2.0 * math.pi)
        if total == 1:
            i = order.index(1)
            return x[i] / (2.0 * math.pi * r2)
        if 2 in order:
            i = order.index(2)
            return (r2 - 2.0 * x[i] * x[i]) / (2.0 * math.pi * r2 * r2)
        i, j = (k for k, v in enumerate(order) if v == 1)
        return -x[i] * x[j] / (math.pi * r2 * r2)
    # n = 3: N = -1/(4 pi r)
    if total == 0:
        return -1.0 / (4.0 * math.pi * r)
    if total == 1:
        i = order.index(1)
        return x[i] / (4.0 * math.pi * r ** 3)
    if 2 in order:
        i = order.index(2)
        return (r2 - 3.0 * x[i] * x[i]) / (4.0 * math.pi * r ** 5)
    i, j = (k for k, v in enumerate(order) if v == 1)
    return -3.0 * x[i] * x[j] / (4.0 * math.pi * r ** 5)


# Vectorized 1-d Gaussian helpers used in the layer-potential quadratures.
# t must be a positive scalar; x may be any ndarray.

def gaussian_1d(x, t):
    x = np.asarray(x, dtype=float)
    return (4.0 * math.pi * t) ** -0.5 * np.exp(-x * x / (4.0 * t))


def gaussian_1d_dx(x, t):
    x = np.asarray(x, dtype=float)
    return -x / (2.0 * t) * gaussian_1d(x, t)


def gaussian_1d_dxx(x, t):
    x = np.asarray(x, dtype=float)
    return (x * x / (4.0 * t * t) - 1.0 / (2.0 * t)) * gaussian_1d(x, t)


def gaussian_radial(d, r, t):
    """d-dimensional Gaussian kernel as a function of the radius |x| = r."""
    r = np.asarray(r, dtype=float)
    return (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-r * r / (4.0 * t))
