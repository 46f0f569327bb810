"""Radial reduction of tangential Gaussian-Newtonian convolutions.

Everything in the layer-potential tensors reduces to radial profiles of

    W(R, h, tau) = (Gamma'(tau) * N(., h))(X'),   R = |X'|,

the tangential convolution of the (n-1)-dimensional Gaussian with a
horizontal slice of the n-dimensional Newtonian kernel.  For n = 3 the
angular integral produces a scaled Bessel factor,

    W = int_0^inf  kappa(r; R, tau) N((r, h)) dr,
    kappa = (r / 2 tau) e^{-(r-R)^2/4 tau} I0e(r R / 2 tau),

whose R-derivatives follow from the I0/I1 recurrences; for n = 2 the
"angular" sum is the two-point reflection Gamma1(R-r) + Gamma1(R+r).

The recurrences lose roughly a^(k/2) digits to cancellation for the k-th
derivative when the Bessel argument a = r R / 2 tau is large (the
integrand then oscillates like a Hermite function while the integral is
O(1)).  In that regime the kernel is replaced by its large-argument form
kappa = A(r, R) e^{-(r-R)^2/4 tau} with A slowly varying, and writing
d/dR = D - d/dr with D = d/dR + d/dr (which annihilates the exponential)
lets every d/dr integrate by parts onto the smooth Newtonian slice:

    int d^k/dR^k kappa g dr
        = sum_j C(k,j) int (D^{k-j} A) e^{-(r-R)^2/4 tau} g^{(j)} dr,

a cancellation-free formula.  For n = 2 the same regime reduces to
int Gamma1(R - r) g^{(k)}(r) dr with exponentially small corrections.

W(., ., tau) is harmonic in (X', h) for h > 0, which converts vertical
derivatives into radial ones:

    W_hh  = -(W_RR + (n-2) W_R / R),
    W_Rhh = -(W_RRR + (n-2)(W_RR / R - W_R / R^2)),

and caloric in (X', tau): d/dtau W = W_RR + (n-2) W_R / R.  The one-sided
boundary value of the vertical derivative is the classical single-layer
jump W_h(R, 0+, tau) = Gamma'(R, tau) / 2.

All routines are vectorized over a radius array R and a height array h
at fixed tau; quadrature in r uses composite Gauss-Legendre panels,
geometrically graded toward r = 0 whenever the truncated Gaussian window
reaches it (the Newtonian slice has its |h|-scale feature there).
"""

import math

import numpy as np
from scipy.special import ive

from .kernels import gaussian_radial

_GLX, _GLW = np.polynomial.legendre.leggauss(8)

_R_FLOOR = 1e-8          # profiles are even in R; clamp tiny radii
_UNIFORM_WIDTH = 1.2     # uniform panel width in units of sqrt(2 tau)
_ASYM_A_MIN = 300.0      # switch to the by-parts form above this argument
_I0E_COEF = (1.0, 0.125, 0.0703125, 0.0732421875)


def _panel_nodes(edges):
    mids = 0.5 * (edges[1:] + edges[:-1])
    hws = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + hws[:, None] * _GLX[None, :]).ravel()
    wts = (hws[:, None] * _GLW[None, :]).ravel()
    return nodes, wts


def _r_grid(Rk, c, sigma, r_floor):
    """Panel edges for one radius: Gaussian window [Rk - c, Rk + c],
    geometrically graded toward 0 when the window reaches it."""
    hi = Rk + c
    lo = max(Rk - c, 0.0)
    width = _UNIFORM_WIDTH * sigma
    if lo > 0.0:
        n_u = max(4, int(math.ceil((hi - lo) / width)))
        return np.linspace(lo, hi, n_u + 1)
    top = min(width, hi)
    n_g = max(4, int(math.ceil(math.log2(top / r_floor))))
    geo = top * 2.0 ** (-np.arange(n_g + 1, dtype=float))[::-1]
    if top >= hi:
        return geo
    n_u = max(2, int(math.ceil((hi - top) / width)))
    return np.concatenate([geo[:-1], np.linspace(top, hi, n_u + 1)])


def _ive01(a):
    """Exponentially scaled I0, I1; scipy's ive yields NaN for arguments
    beyond ~1e16, where the large-argument expansion is exact to 1e-24."""
    big = a > 1e8
    safe = np.where(big, 1.0, a)
    i0 = ive(0, safe)
    i1 = ive(1, safe)
    if np.any(big):
        inv = 1.0 / np.where(big, a, 1.0)
        pref = np.sqrt(inv / (2.0 * np.pi))
        i0 = np.where(big, pref * (1.0 + 0.125 * inv + 0.0703125 * inv * inv), i0)
        i1 = np.where(big, pref * (1.0 - 0.375 * inv - 0.1171875 * inv * inv), i1)
    return i0, i1


def _kernel_stack_3d(R, r, wts, tau, max_order):
    """kappa and d^k/dR^k kappa, k <= max_order, on the (nR, nr) grid."""
    a = r * R / (2.0 * tau)
    expf = np.exp(-((r - R) ** 2) / (4.0 * tau))
    i0, i1 = _ive01(a)
    u0 = expf * i0
    u1 = expf * i1
    pre = r / (2.0 * tau)
    out = [pre * u0]
    if max_order >= 1:
        u0d = -(R / (2 * tau)) * u0 + (r / (2 * tau)) * u1
        u1d = (r / (2 * tau)) * u0 - (R / (2 * tau)) * u1 - u1 / R
        out.append(pre * u0d)
    if max_order >= 2:
        u0dd = -u0 / (2 * tau) - (R / (2 * tau)) * u0d + (r / (2 * tau)) * u1d
        u1dd = ((r / (2 * tau)) * u0d - u1 / (2 * tau) - (R / (2 * tau)) * u1d
                + u1 / R ** 2 - u1d / R)
        out.append(pre * u0dd)
    if max_order >= 3:
        u0ddd = -u0d / tau - (R / (2 * tau)) * u0dd + (r / (2 * tau)) * u1dd
        out.append(pre * u0ddd)
    return out


def _kernel_stack_2d(R, r, wts, tau, max_order):
    """Reflection kernel Gamma1(R - r) + Gamma1(R + r) and R-derivatives."""
    out = []
    for k in range(max_order + 1):
        acc = 0.0
        for s, x in ((1.0, R - r), (1.0, R + r)):
            g = gaussian_radial(1, x, tau)
            if k == 0:
                d = g
            elif k == 1:
                d = -x / (2 * tau) * g
            elif k == 2:
                d = (x * x / (4 * tau * tau) - 1.0 / (2 * tau)) * g
            else:
                d = (-x ** 3 / (8 * tau ** 3) + 3 * x / (4 * tau * tau)) * g
            acc = acc + d
        out.append(acc)
    return out


def _asym_A_derivs(Rcol, r, tau, max_order):
    """Slow amplitude A of kappa ~ A e^{-(r-R)^2/4 tau} and its images
    under D = d/dR + d/dr, as monomial sums in r and R."""
    mono = []
    pref = 0.5 / math.sqrt(math.pi * tau)
    for s, cs in enumerate(_I0E_COEF):
        mono.append((pref * cs * (2.0 * tau) ** s, 0.5 - s, -0.5 - s))
    out = []
    for _ in range(max_order + 1):
        out.append(sum(c * r ** al * Rcol ** be for c, al, be in mono))
        mono = ([(c * al, al - 1.0, be) for c, al, be in mono if al != 0.0]
                + [(c * be, al, be - 1.0) for c, al, be in mono if be != 0.0])
    return out


def _slice_deriv(j, r, h, n, factor):
    """j-th r-derivative of the Newtonian slice factor (j <= 3)."""
    rho2 = r * r + h * h
    if n == 3:
        inv = 1.0 / np.sqrt(rho2)
        i3 = inv ** 3
        i5 = i3 * inv * inv
        if factor == "g0":
            if j == 0:
                return -inv / (4.0 * math.pi)
            if j == 1:
                return r * i3 / (4.0 * math.pi)
            if j == 2:
                return (i3 - 3.0 * r * r * i5) / (4.0 * math.pi)
            return (-9.0 * r * i5 + 15.0 * r ** 3 * i5 * inv * inv) / (4.0 * math.pi)
        if j == 0:
            return h * i3 / (4.0 * math.pi)
        if j == 1:
            return -3.0 * r * h * i5 / (4.0 * math.pi)
        i7 = i5 * inv * inv
        if j == 2:
            return (-3.0 * h * i5 + 15.0 * r * r * h * i7) / (4.0 * math.pi)
        return (45.0 * r * h * i7 - 105.0 * r ** 3 * h * i7 * inv * inv) / (4.0 * math.pi)
    i2 = 1.0 / rho2
    i4 = i2 * i2
    if factor == "g0":
        if j == 0:
            return np.log(rho2) / (4.0 * math.pi)
        if j == 1:
            return r * i2 / (2.0 * math.pi)
        if j == 2:
            return (0.5 * i2 - r * r * i4) / math.pi
        return (-3.0 * r * i4 + 4.0 * r ** 3 * i4 * i2) / math.pi
    if j == 0:
        return h * i2 / (2.0 * math.pi)
    if j == 1:
        return -r * h * i4 / math.pi
    if j == 2:
        return (-h * i4 + 4.0 * r * r * h * i4 * i2) / math.pi
    return (12.0 * r * h * i4 * i2 - 24.0 * r ** 3 * h * i4 * i4) / math.pi


# profile kinds: (kernel derivative order, newton factor)
_KINDS = {
    "W": (0, "g0"),
    "WR": (1, "g0"),
    "WRR": (2, "g0"),
    "WRRR": (3, "g0"),
    "Wh": (0, "gh"),
    "WRh": (1, "gh"),
    "WRRh": (2, "gh"),
}


def w_profiles(R, h, tau, n, kinds, tail_sigma=10.0, r_floor_scale=1e-9):
    """Profiles W_kind(R_k, h_j, tau) as arrays of shape (nR, nh).

    R : array of radii (>= 0); h : array of heights (>= 0); tau > 0.
    kinds : iterable from {W, WR, WRR, WRRR, Wh, WRh, WRRh}.
    Derived vertical derivatives (Whh, WRhh) are assembled by the caller
    through `whh_from` / `wrhh_from` (harmonicity).
    """
    R = np.maximum(np.atleast_1d(np.asarray(R, dtype=float)), _R_FLOOR)
    h = np.atleast_1d(np.asarray(h, dtype=float))
    kinds = list(kinds)
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n}")
    max_order = max(_KINDS[k][0] for k in kinds)
    sigma = math.sqrt(2.0 * tau)
    c = tail_sigma * sigma
    r_floor = max(min(np.min(h[h > 0.0]) if np.any(h > 0.0) else c,
                      sigma) * r_floor_scale, 1e-280)

    grids = [_r_grid(Rk, c, sigma, r_floor) for Rk in R]
    nr = max(g.size - 1 for g in grids) * _GLX.size
    r_mat = np.zeros((R.size, nr))
    w_mat = np.zeros((R.size, nr))
    for k, g in enumerate(grids):
        nodes, wts = _panel_nodes(g)
        r_mat[k, :nodes.size] = nodes
        w_mat[k, :nodes.size] = wts
        if nodes.size < nr:
            r_mat[k, nodes.size:] = nodes[-1]   # harmless padding, zero weight

    lo_edge = R - c
    if n == 3:
        a_min = np.where(lo_edge > 0.0, lo_edge * R / (2.0 * tau), 0.0)
        asym = a_min >= _ASYM_A_MIN
    else:
        asym = (lo_edge > 0.0) & (R * R / (4.0 * tau) >= 60.0)
    idx_d = np.nonzero(~asym)[0]
    idx_a = np.nonzero(asym)[0]

    out = {kind: np.empty((R.size, h.size)) for kind in kinds}
    need_g0 = any(_KINDS[k][1] == "g0" for k in kinds)
    need_gh = any(_KINDS[k][1] == "gh" for k in kinds)

    if idx_d.size:
        Rcol = R[idx_d][:, None]
        r = r_mat[idx_d]
        w = w_mat[idx_d]
        if n == 3:
            ker = _kernel_stack_3d(Rcol, r, w, tau, max_order)
        else:
            ker = _kernel_stack_2d(Rcol, r, w, tau, max_order)
        rr = r[:, :, None]
        hh = h[None, None, :]
        g0 = _slice_deriv(0, rr, hh, n, "g0") if need_g0 else None
        gh = _slice_deriv(0, rr, hh, n, "gh") if need_gh else None
        for kind in kinds:
            order, gf = _KINDS[kind]
            g = g0 if gf == "g0" else gh
            out[kind][idx_d] = np.einsum("kr,kr,krh->kh", w, ker[order], g)

    if idx_a.size:
        Rcol = R[idx_a][:, None]
        r = r_mat[idx_a]
        w = w_mat[idx_a]
        rr = r[:, :, None]
        hh = h[None, None, :]
        if n == 3:
            e = np.exp(-((r - Rcol) ** 2) / (4.0 * tau))
            A = _asym_A_derivs(Rcol, r, tau, max_order)
            base = [w * Am * e for Am in A]
            for kind in kinds:
                order, gf = _KINDS[kind]
                acc = np.zeros((idx_a.size, h.size))
                for j in range(order + 1):
                    fj = _slice_deriv(j, rr, hh, n, gf)
                    acc += math.comb(order, j) * np.einsum(
                        "kr,krh->kh", base[order - j], fj)
                out[kind][idx_a] = acc
        else:
            base = w * gaussian_radial(1, Rcol - r, tau)
            for kind in kinds:
                order, gf = _KINDS[kind]
                fk = _slice_deriv(order, rr, hh, n, gf)
                out[kind][idx_a] = np.einsum("kr,krh->kh", base, fk)
    return out


def whh_from(p, R, n):
    """W_hh from radial derivatives via harmonicity (h > 0)."""
    R = np.maximum(np.atleast_1d(np.asarray(R, dtype=float)), _R_FLOOR)[:, None]
    if n == 3:
        return -(p["WRR"] + p["WR"] / R)
    return -p["WRR"]


def wrhh_from(p, R, n):
    """W_Rhh from radial derivatives via harmonicity (h > 0)."""
    R = np.maximum(np.atleast_1d(np.asarray(R, dtype=float)), _R_FLOOR)[:, None]
    if n == 3:
        return -(p["WRRR"] + p["WRR"] / R - p["WR"] / R ** 2)
    return -p["WRRR"]


def wh_boundary(R, tau, n):
    """One-sided limit W_h(R, 0+, tau) = Gamma'(R, tau) / 2 (layer jump)."""
    return 0.5 * gaussian_radial(n - 1, np.asarray(R, dtype=float), tau)


def wh_boundary_dr(R, tau, n):
    """d/dR of the layer-jump boundary value."""
    R = np.asarray(R, dtype=float)
    return -R / (2.0 * tau) * wh_boundary(R, tau, n)


def _zn_rule(x_n, tau, tail_sigma):
    """Nodes/weights for int_0^{x_n} Gamma1'(z_n, tau) ... dz_n; the factor
    Gamma1' cuts the range at ~ tail_sigma * sqrt(2 tau)."""
    top = min(x_n, 1.05 * tail_sigma * math.sqrt(2.0 * tau))
    width = max(top / 6.0, 1e-300)
    width = min(width, 1.2 * math.sqrt(2.0 * tau))
    n_p = max(4, min(24, int(math.ceil(top / width))))
    edges = np.linspace(0.0, top, n_p + 1)
    return _panel_nodes(edges)


def layer_profiles(R, x_n, tau, n, kinds, tail_sigma=10.0):
    """Vertical-layer integrals int_0^{x_n} Gamma1'(z_n, tau) W_kind dz_n.

    kinds from {"WRh", "Whh", "WRhh"}; W_* evaluated at heights
    h = x_n - z_n.  Returns dict kind -> array (nR,).
    """
    z, zw = _zn_rule(x_n, tau, tail_sigma)
    h = x_n - z
    base = set()
    for kind in kinds:
        if kind == "WRh":
            base.add("WRh")
        elif kind == "Whh":
            base.update(("WR", "WRR"))
        elif kind == "WRhh":
            base.update(("WR", "WRR", "WRRR"))
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
    prof = w_profiles(R, h, tau, n, sorted(base), tail_sigma=tail_sigma)
    g1p = -z / (2.0 * tau) * gaussian_radial(1, z, tau)
    wvec = zw * g1p
    out = {}
    for kind in kinds:
        if kind == "WRh":
            mat = prof["WRh"]
        elif kind == "Whh":
            mat = whh_from(prof, R, n)
        else:
            mat = wrhh_from(prof, R, n)
        out[kind] = mat @ wvec
    return out
