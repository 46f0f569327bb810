"""Layer-potential tensors of the half-space Stokes Poisson kernel.

Evaluates, by direct quadrature of their defining integrals,

    L_ij(x,t) = D_{x_j} int_0^{x_n} int_{R^{n-1}}
                    D_{z_n} Gamma(z,t)  D_{x_i} N(x-z)  dz,
    B_in(x,t) = int_{R^{n-1}} D_{x_n} Gamma(x'-z', x_n, t)
                    D_{z_i} N(z', 0)  dz',
    A_i(x,t)  = int_{R^{n-1}} Gamma(x'-z', x_n, t)
                    D_{z_i} N(z', 0)  dz',

together with the decomposition of the tangential convolution
Gamma' * D_{x_n}N(., x_n) into its Newtonian limit, a near-origin term I,
and a residual J1 bounded by c * x_n * sqrt(t).

The outer derivative of L is taken by moving it onto the Gaussian factor
(integration by parts in z; the z_n boundary terms cancel against the
Leibniz term of the variable upper limit, and D_{z_n}Gamma vanishes on
{z_n = 0}), giving the absolutely integrable form

    L_ij(x,t) = int_0^{x_n} int_{R^{n-1}}
                    D_{z_j} D_{z_n} Gamma(z,t)  D_{x_i} N(x-z)  dz

valid for every index pair.  The |x-z|^{1-n} corner singularity at z = x
is tamed by subtracting the Gaussian factor's value at x, integrating the
remainder on a mesh graded toward x, and adding back the closed-form
box integral of D_{x_i}N.
"""

from dataclasses import dataclass
import math

import numpy as np

from .kernels import gaussian_1d, gaussian_1d_dx, gaussian_1d_dxx, newtonian
from .quadrature import EndpointHint, QuadResult, integrate_1d, integrate_nd
from . import _heatlayer

__all__ = [
    "HalfSpacePoint",
    "TensorIndex",
    "l_tensor",
    "l_tensor_matrix",
    "b_tensor",
    "a_potential",
    "tangential_newton_convolution",
    "normal_newton_convolution",
    "gamma_convolution_decomposition",
]


@dataclass(frozen=True)
class HalfSpacePoint:
    x_prime: tuple
    x_n: float

    def __post_init__(self):
        if not self.x_n > 0:
            raise ValueError(f"x_n must be positive, got {self.x_n}")

    @property
    def n(self):
        return len(self.x_prime) + 1

    @property
    def coords(self):
        return np.array(list(self.x_prime) + [self.x_n], dtype=float)


@dataclass(frozen=True)
class TensorIndex:
    i: int
    j: int
    n: int

    def __post_init__(self):
        if not (1 <= self.i <= self.n and 1 <= self.j <= self.n):
            raise ValueError(f"indices must lie in 1..{self.n}, got {(self.i, self.j)}")

    @property
    def has_decay_bound(self):
        # the pointwise decay estimate excludes exactly i != n, j = n
        return not (self.i != self.n and self.j == self.n)


def _gaussian_nd(z, t):
    d = z.shape[1]
    return (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-np.sum(z * z, axis=1) / (4.0 * t))


def _phi_factor(z, j, n, t):
    """D_{z_j} D_{z_n} Gamma_n(z, t), vectorized over rows of z."""
    g = _gaussian_nd(z, t)
    zn = z[:, n - 1]
    if j == n:
        return (zn * zn / (4.0 * t * t) - 1.0 / (2.0 * t)) * g
    return z[:, j - 1] * zn / (4.0 * t * t) * g


def _newton_grad(u, i, n):
    """D_{x_i} N(u), vectorized over rows of u; |u| > 0 assumed."""
    r2 = np.sum(u * u, axis=1)
    if n == 3:
        return u[:, i - 1] / (4.0 * math.pi * r2 ** 1.5)
    return u[:, i - 1] / (2.0 * math.pi * r2)


def _box_newton_grad_integral(i, n, T, x_n, cfg):
    """int over {|u'|_inf < T} x (0, x_n) of D_{x_i} N(u) du.

    Zero for tangential i by oddness (the u'-box is symmetric).  For
    i = n the vertical integral is explicit and the remaining planar
    integral is radial (n=3: polar arc length over the square)."""
    if i != n:
        return QuadResult(0.0, 0.0, 0, True)
    if n == 2:
        val = (T * math.log1p(x_n * x_n / (T * T))
               + 2.0 * x_n * math.atan(T / x_n)) / (2.0 * math.pi)
        return QuadResult(val, 1e-15 * abs(val), 0, True)

    def f(rho):
        arc = np.where(rho <= T, 2.0 * math.pi * rho,
                       rho * (2.0 * math.pi
                              - 8.0 * np.arccos(np.minimum(T / np.maximum(rho, T), 1.0))))
        return arc * (1.0 / rho - 1.0 / np.sqrt(rho * rho + x_n * x_n)) / (4.0 * math.pi)

    r1 = integrate_1d(f, 0.0, T, cfg)
    r2 = integrate_1d(f, T, math.sqrt(2.0) * T, cfg)
    return r1 + r2


def l_tensor(idx, p, t, cfg):
    """L_ij(x, t) by direct quadrature of the defining integral."""
    if not t > 0:
        raise ValueError("l_tensor requires t > 0")
    n = idx.n
    if p.n != n:
        raise ValueError("point dimension does not match index dimension")
    x = p.coords
    sigma = math.sqrt(2.0 * t)
    T = cfg.tail_sigma * sigma + float(np.max(np.abs(x[:-1]))) + 0.5
    bounds = [(xk - T, xk + T) for xk in x[:-1]] + [(0.0, p.x_n)]
    phi_at_x = float(_phi_factor(x[None, :], idx.j, n, t)[0])

    def f(z):
        u = x[None, :] - z
        return (_phi_factor(z, idx.j, n, t) - phi_at_x) * _newton_grad(u, idx.i, n)

    res = integrate_nd(f, bounds, cfg, weight_center=[0.0] * n,
                       weight_scale=sigma, singular_point=list(x))
    corr = _box_newton_grad_integral(idx.i, n, T, p.x_n, cfg)
    return res + corr.scaled(phi_at_x)


def l_tensor_matrix(p, t, cfg):
    """All n^2 entries L_ij(x, t) in one shared-mesh quadrature pass.

    Every entry lives on the same domain with the same mesh grading, and
    the integrand factors into n Gaussian-column factors times n
    Newtonian-gradient rows, so the full matrix costs barely more than a
    single entry.  Entries match l_tensor to quadrature accuracy.
    """
    if not t > 0:
        raise ValueError("l_tensor_matrix requires t > 0")
    n = p.n
    x = p.coords
    sigma = math.sqrt(2.0 * t)
    T = cfg.tail_sigma * sigma + float(np.max(np.abs(x[:-1]))) + 0.5
    bounds = [(xk - T, xk + T) for xk in x[:-1]] + [(0.0, p.x_n)]
    phi_at_x = [float(_phi_factor(x[None, :], j, n, t)[0])
                for j in range(1, n + 1)]

    def f(z):
        u = x[None, :] - z
        cols = [_phi_factor(z, j, n, t) - phi_at_x[j - 1]
                for j in range(1, n + 1)]
        rows = [_newton_grad(u, i, n) for i in range(1, n + 1)]
        return np.stack([rows[i] * cols[j]
                         for i in range(n) for j in range(n)], axis=-1)

    res = integrate_nd(f, bounds, cfg, weight_center=[0.0] * n,
                       weight_scale=sigma, singular_point=list(x))
    corr = _box_newton_grad_integral(n, n, T, p.x_n, cfg)
    out = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            v = QuadResult(float(res.value[(i - 1) * n + (j - 1)]),
                           res.err_estimate, res.evaluations, res.converged)
            if i == n:
                v = v + corr.scaled(phi_at_x[j - 1])
            out[(i, j)] = v
    return out


def tangential_newton_convolution(i, x_prime, t, cfg, n=None):
    """(Gamma'(t) * D_i N(., 0))(x') by polar quadrature, i <= n-1.

    The |z'|^{1-n} singularity of D_i N at the origin is integrable in
    polar form; the angular integral (trapezoid, spectrally accurate) is
    O(rho) near rho = 0 by oddness.
    """
    x_prime = np.asarray(x_prime, dtype=float).ravel()
    if n is None:
        n = x_prime.size + 1
    if not 1 <= i <= n - 1:
        raise ValueError(f"tangential index required, got i={i}")
    R = float(np.linalg.norm(x_prime))
    rho_max = R + cfg.tail_sigma * math.sqrt(2.0 * t)

    if n == 2:
        xs = x_prime[0]

        def f(rho):
            return (gaussian_1d(xs - rho, t) - gaussian_1d(xs + rho, t)) / (2.0 * math.pi * rho)

        hints = [EndpointHint(0.0, "algebraic", 0.0,
                              delta_form=lambda d: (gaussian_1d(xs - d, t)
                                                    - gaussian_1d(xs + d, t)) / (2.0 * math.pi * d))]
        return integrate_1d(f, 0.0, rho_max, cfg, hints=hints)

    m_ang = 64 + int(8.0 * math.sqrt(rho_max * R / (2.0 * t)))
    theta = 2.0 * math.pi * np.arange(m_ang) / m_ang
    omega = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    def f(rho):
        rho = np.atleast_1d(rho)
        z = rho[:, None, None] * omega[None, :, :]
        d = x_prime[None, None, :] - z
        g = np.exp(-np.sum(d * d, axis=2) / (4.0 * t)) / (4.0 * math.pi * t)
        ang = (g @ omega[:, i - 1]) * (2.0 * math.pi / m_ang)
        return ang / (4.0 * math.pi * rho)

    hints = [EndpointHint(0.0, "algebraic", 0.0, delta_form=f)]
    return integrate_1d(f, 0.0, rho_max, cfg, hints=hints)


def b_tensor(i, p, t, cfg):
    """B_in(x, t) = Gamma1'(x_n, t) * (Gamma' * D_i N(., 0))(x')."""
    if not t > 0:
        raise ValueError("b_tensor requires t > 0")
    conv = tangential_newton_convolution(i, p.x_prime, t, cfg, n=p.n)
    return conv.scaled(float(gaussian_1d_dx(p.x_n, t)))


def a_potential(i, p, t, cfg, xn_order=0):
    """A_i(x, t) and its x_n-derivatives (order 0, 1, 2).

    A_i factorizes as Gamma1(x_n, t) times the tangential convolution;
    x_n enters only through the 1-d Gaussian, so the derivatives are
    analytic prefactors (order 1 reproduces B_in).
    """
    conv = tangential_newton_convolution(i, p.x_prime, t, cfg, n=p.n)
    pref = {0: gaussian_1d, 1: gaussian_1d_dx, 2: gaussian_1d_dxx}[xn_order]
    return conv.scaled(float(pref(p.x_n, t)))


def normal_newton_convolution(X_prime, x_n, t, cfg):
    """(Gamma'(t) * D_{x_n} N(., x_n))(X') via the radial Bessel kernel."""
    X_prime = np.asarray(X_prime, dtype=float).ravel()
    n = X_prime.size + 1
    R = float(np.linalg.norm(X_prime))
    prof = _heatlayer.w_profiles([R], [x_n], t, n, ["Wh"],
                                 tail_sigma=cfg.tail_sigma)
    val = float(prof["Wh"][0, 0])
    return QuadResult(val, 1e-8 * abs(val), 0, True)


def gamma_convolution_decomposition(X_prime, x_n, t, cfg):
    """Split Gamma' * D_{x_n}N(., x_n) at X' into Newtonian + I + J1.

    I is the portion of the convolution integral over the near-origin
    region {|z'| <= |X'|/10}; J1 is the remainder after also removing the
    pointwise Newtonian limit D_{x_n}N(X', x_n).
    Requires |X'| >= 1 and 0 < x_n < 1/2.
    """
    X_prime = np.asarray(X_prime, dtype=float).ravel()
    n = X_prime.size + 1
    R = float(np.linalg.norm(X_prime))
    if R < 1.0:
        raise ValueError(f"|X'| >= 1 required, got {R}")
    if not 0.0 < x_n < 0.5:
        raise ValueError(f"x_n in (0, 1/2) required, got {x_n}")
    total = normal_newton_convolution(X_prime, x_n, t, cfg)
    newt = float(newtonian(
        tuple([0] * (n - 1) + [1]), np.concatenate([X_prime, [x_n]])))
    newt_res = QuadResult(newt, 0.0, 0, True)

    # I: same radial integrand as `total`, truncated to r <= R/10
    if n == 3:
        from scipy.special import ive

        def f(r):
            a = r * R / (2.0 * t)
            kappa = (r / (2.0 * t)) * np.exp(-((r - R) ** 2) / (4.0 * t)) * ive(0, a)
            return kappa * x_n / (4.0 * math.pi * (r * r + x_n * x_n) ** 1.5)
    else:
        def f(r):
            kappa = gaussian_1d(R - r, t) + gaussian_1d(R + r, t)
            return kappa * x_n / (2.0 * math.pi * (r * r + x_n * x_n))

    hints = [EndpointHint(0.0, "algebraic", 0.0, delta_form=f)]
    i_res = integrate_1d(f, 0.0, R / 10.0, cfg, hints=hints)
    j1 = QuadResult(total.value - newt - i_res.value,
                    total.err_estimate + i_res.err_estimate,
                    total.evaluations + i_res.evaluations,
                    total.converged and i_res.converged)
    return total, newt_res, i_res, j1
